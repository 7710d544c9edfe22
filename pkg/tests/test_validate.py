import math

import pytest

from stable_area import simulate, validate
from stable_area.errors import DegenerateWeights, InsufficientTail, NonConvergence
from stable_area.results import MCEstimate
from stable_area.validate import Check


class TestCheck:
    def test_status(self):
        assert Check("a", 1.0, 1.0, 0.0, 1e-8).status == "PASS"
        assert Check("b", 2.0, 1.0, 1.0, 1e-8).status == "FAIL"
        assert Check("c", 2.0, 1.0, 1.0, 1e-8, hard=False).status == "SOFT"

    def test_nan_statistic_fails(self):
        assert Check("d", math.nan, 1.0, math.nan, 1.0).status == "FAIL"

    def test_exit_status(self):
        passing = Check("a", 1.0, 1.0, 0.0, 1e-8)
        soft = Check("c", 2.0, 1.0, 1.0, 1e-8, hard=False)
        failing = Check("b", 2.0, 1.0, 1.0, 1e-8)
        assert validate.exit_status([passing, soft]) == 0
        assert validate.exit_status([passing, failing]) == 1

    def test_z_check(self):
        estimate = MCEstimate(mean=1.02, stderr=0.01, n=100, seed=0)
        check = validate._z_check("mc", estimate, 1.0)
        assert check.kind == "z"
        assert check.statistic == pytest.approx(2.0)
        assert check.status == "PASS"

    def test_relative_against_zero(self):
        assert validate._rel_check("zero", 1.0, 0.0, 0.1).status == "FAIL"

    def test_row(self):
        row = Check("a", 1.0, 1.0, 0.0, 1e-8).as_row()
        assert list(row) == ["check", "computed", "reference", "kind", "statistic", "tolerance", "status"]


def test_sizes():
    assert validate.Sizes.pick(True).paths < validate.Sizes.pick(False).paths


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_deterministic_checks_pass(alpha):
    checks = validate.deterministic_checks(alpha)
    failed = [c.name for c in checks if c.status == "FAIL"]
    assert failed == []


class TestGuardedChecks:
    def test_library_error_becomes_failed_row(self):
        def explode():
            raise DegenerateWeights("simulate", "effective sample size 7.8 < 100")

        checks = []
        validate._guarded(checks, "conditioned E[exp(-A)]", explode)
        validate._guarded(checks, "fine", lambda: Check("fine", 1.0, 1.0, 0.0, 1e-8))
        assert [c.name for c in checks] == ["conditioned E[exp(-A)]", "fine"]
        assert [c.status for c in checks] == ["FAIL", "PASS"]

    def test_soft_failure_stays_soft(self):
        def explode():
            raise NonConvergence("simulate", "no tail")

        checks = []
        validate._guarded(checks, "tail", explode, hard=False)
        assert checks[0].status == "SOFT"

    def test_short_tail_is_skipped_when_soft(self):
        def short():
            raise InsufficientTail("simulate", "fewer than 10 samples")

        checks = []
        validate._guarded(checks, "tail", short, hard=False)
        assert checks == []

    def test_other_errors_propagate(self):
        def broken():
            raise KeyError("missing")

        with pytest.raises(KeyError):
            validate._guarded([], "broken", broken)

    @pytest.mark.slow
    def test_one_failing_simulation_keeps_the_rest(self, monkeypatch):
        def degenerate(*args, **kwargs):
            raise DegenerateWeights("simulate", "effective sample size 7.8 < 100")

        monkeypatch.setattr(simulate, "sample_conditioned_weighted", degenerate)
        checks = validate.monte_carlo_checks(2.0, quick=True)
        status = {c.name: c.status for c in checks}
        assert status["conditioned E[exp(-A)]"] == "FAIL"
        assert "excursion mean" in status
        assert "meander E[exp(-A)]" in status
