import math

import pytest
from fastapi.testclient import TestClient

from stable_area.main import app


@pytest.fixture
def client():
    return TestClient(app)


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"status": "Stable Area API is running"}


class TestWright:
    def test_eval(self, client):
        response = client.post("/wright/eval", json={"fn": "phi", "alpha": 2, "x": 0})
        assert response.status_code == 200
        body = response.json()
        assert body["value"] == pytest.approx(0.35502805388781722, abs=1e-15)
        assert body["route"] == "series"

    def test_complex(self, client):
        response = client.post("/wright/eval", json={"fn": "phi", "alpha": 2, "x": 1, "x_imag": 0.5})
        assert response.status_code == 200
        assert set(response.json()["value"]) == {"real", "imag"}

    def test_alpha_out_of_range(self, client):
        response = client.post("/wright/eval", json={"fn": "phi", "alpha": 2.5, "x": 0})
        assert response.status_code == 422

    def test_invalid_route_for_point(self, client):
        response = client.post("/wright/eval", json={"fn": "phi", "alpha": 1.5, "x": -1, "route": "asymptotic"})
        assert response.status_code == 400
        assert response.json()["detail"].startswith("[wright]")


class TestCoeffs:
    def test_exact(self, client):
        response = client.get("/coeffs/c", params={"alpha": 2, "n": 1, "exact": "true"})
        assert response.status_code == 200
        value = response.json()["values"][1]
        assert (value["numerator"], value["denominator"]) == (5, 48)

    def test_moments(self, client):
        response = client.get("/coeffs/moments", params={"alpha": 2, "n": 1})
        assert response.status_code == 200
        values = response.json()["values"]
        assert values["positive"][0] == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-10)
        assert values["negative"][0] == pytest.approx(1.054877, rel=1e-5)

    def test_unknown_family(self, client):
        response = client.get("/coeffs/zeta", params={"alpha": 1.5})
        assert response.status_code == 404

    def test_exact_gamma_family(self, client):
        response = client.get("/coeffs/delta", params={"alpha": 1.5, "exact": "true"})
        assert response.status_code == 400


class TestTransforms:
    def test_mean(self, client):
        response = client.post("/transforms/evaluate", json={"quantity": "mean_ex", "alpha": 2})
        assert response.status_code == 200
        assert response.json()["value"] == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)

    def test_tail(self, client):
        response = client.post("/transforms/evaluate", json={"quantity": "tail_meander", "alpha": 1.5})
        assert response.status_code == 200
        assert response.json()["exponent"] == pytest.approx(-1.5)

    def test_tail_needs_jumps(self, client):
        response = client.post("/transforms/evaluate", json={"quantity": "tail_meander", "alpha": 2})
        assert response.status_code == 400

    def test_mellin_range(self, client):
        response = client.post("/transforms/evaluate", json={"quantity": "mellin_area_T0", "alpha": 1.5, "nu": 0.5})
        assert response.status_code == 400

    def test_unknown_quantity(self, client):
        response = client.post("/transforms/evaluate", json={"quantity": "theorem9", "alpha": 1.5})
        assert response.status_code == 422


class TestInversion:
    def test_curve(self, client):
        payload = {"law": "conditioned", "alpha": 1.5, "s_values": [0.5, 1.0], "node_count": 16}
        response = client.post("/inversion/curve", json=payload)
        assert response.status_code == 200
        values = response.json()["values"]
        assert 1.0 > values[0] > values[1] > 0.0
        assert response.json()["monotone"]

    def test_negative_s(self, client):
        payload = {"law": "excursion", "alpha": 1.5, "s_values": [-1.0]}
        assert client.post("/inversion/curve", json=payload).status_code == 422


class TestSimulate:
    def test_meander(self, client):
        payload = {"target": "meander", "alpha": 1.5, "n": 200, "steps": 100}
        response = client.post("/simulate/estimate", json=payload)
        assert response.status_code == 200
        estimates = response.json()["estimates"]
        assert estimates["mean"]["mean"] > 0
        assert 0 < estimates["laplace"]["mean"] < 1
        assert estimates["mean"]["n"] == 200

    def test_too_few_paths(self, client):
        payload = {"target": "meander", "alpha": 1.5, "n": 10}
        assert client.post("/simulate/estimate", json=payload).status_code == 422
