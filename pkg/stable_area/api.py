from fractions import Fraction

import numpy as np
from fastapi import APIRouter, HTTPException, Query

from . import coeffs, inversion, simulate, transforms, wright
from .errors import InvalidInput, NumericalError
from .models import EvalRequest, InversionConfig, InversionRequest, SimulationRequest, TransformRequest
from .results import MCEstimate, TailAsymptotic

wright_router = APIRouter(prefix="/wright", tags=["Wright"])
coeffs_router = APIRouter(prefix="/coeffs", tags=["Coefficients"])
transforms_router = APIRouter(prefix="/transforms", tags=["Transforms"])
inversion_router = APIRouter(prefix="/inversion", tags=["Inversion"])
simulate_router = APIRouter(prefix="/simulate", tags=["Simulation"])

COEFF_FAMILIES = ("B", "c", "d", "omega", "delta", "moments")
MAX_COEFF_INDEX = 60


def _raise_http(exc: NumericalError):
    status = 400 if isinstance(exc, InvalidInput) else 422
    raise HTTPException(status_code=status, detail=f"[{exc.module}] {exc.detail}")


def _number(value):
    if isinstance(value, Fraction):
        return {"numerator": value.numerator, "denominator": value.denominator, "value": float(value)}
    return float(value)


@wright_router.post("/eval")
def evaluate(payload: EvalRequest):
    x = complex(payload.x, payload.x_imag) if payload.x_imag else payload.x
    try:
        result = getattr(wright, payload.fn)(payload.alpha, x, route=payload.route)
    except NumericalError as exc:
        _raise_http(exc)
    return {"fn": payload.fn, "alpha": payload.alpha, "x": payload.x, "x_imag": payload.x_imag, **result.as_dict()}


@coeffs_router.get("/{family}")
def coefficient_family(
    family: str,
    alpha: float = Query(..., gt=1, le=2),
    n: int = Query(5, ge=1, le=MAX_COEFF_INDEX),
    exact: bool = False,
):
    if family not in COEFF_FAMILIES:
        raise HTTPException(status_code=404, detail=f"Unknown family {family!r}")
    arg = Fraction(repr(alpha)) if exact else alpha
    try:
        if family == "B":
            values = [_number(coeffs.bell_B(arg, n, k, exact=exact)) for k in range(1, n + 1)]
        elif family == "c":
            values = [_number(coeffs.c_p(arg, p, exact=exact)) for p in range(n + 1)]
        elif family == "d":
            values = [_number(coeffs.d_p(arg, p, exact=exact)) for p in range(n + 1)]
        elif family == "omega":
            values = [_number(coeffs.omega_n(arg, m, exact=exact)) for m in range(1, n + 1)]
        elif exact:
            raise InvalidInput("coeffs", f"{family} involves Gamma values and has no exact mode")
        elif family == "delta":
            values = [coeffs.delta_n(alpha, m) for m in range(1, n + 1)]
        else:
            values = {
                "positive": [coeffs.moment_ex(alpha, m) for m in range(1, n + 1)],
                "negative": [coeffs.neg_moment_ex(alpha, m) for m in range(1, n + 1)],
            }
    except NumericalError as exc:
        _raise_http(exc)
    return {"family": family, "alpha": alpha, "n": n, "exact": exact, "values": values}


@transforms_router.post("/evaluate")
def evaluate_transform(payload: TransformRequest):
    a, lam = payload.alpha, payload.lam
    handlers = {
        "joint": lambda: transforms.joint_laplace_T0_area(a, payload.z, lam, payload.mu),
        "theorem1": lambda: transforms.theorem1_rhs(a, lam),
        "theorem1_alt": lambda: transforms.theorem1_alt_rhs(a, lam),
        "theorem2": lambda: transforms.theorem2_rhs(a, lam),
        "theorem3": lambda: transforms.theorem3_rhs(a, lam),
        "h_alpha": lambda: transforms.h_alpha(a, lam),
        "hitting_density": lambda: transforms.hitting_density(a, payload.z, payload.t),
        "mellin_area_T0": lambda: transforms.mellin_area_T0(a, payload.nu),
        "mellin_meander": lambda: transforms.mellin_meander(a, payload.nu),
        "mean_ex": lambda: transforms.mean_ex(a),
        "mean_meander": lambda: transforms.mean_meander(a),
        "second_moment_ex": lambda: transforms.second_moment_ex(a),
        "tail_meander": lambda: transforms.tail_meander(a),
        "tail_conditioned": lambda: transforms.tail_conditioned(a),
    }
    try:
        value = handlers[payload.quantity]()
    except NumericalError as exc:
        _raise_http(exc)
    if isinstance(value, TailAsymptotic):
        return {"quantity": payload.quantity, "alpha": a, "exponent": value.exponent, "prefactor": value.prefactor}
    return {"quantity": payload.quantity, "alpha": a, "value": value}


@inversion_router.post("/curve")
def laplace_curve(payload: InversionRequest):
    cfg = InversionConfig(method=payload.method, node_count=payload.node_count)
    try:
        curve = inversion.laplace_curve(payload.law, payload.alpha, payload.s_values, cfg)
    except NumericalError as exc:
        _raise_http(exc)
    return {
        "law": curve.law,
        "alpha": payload.alpha,
        "s": curve.s_grid.tolist(),
        "values": curve.values.tolist(),
        "errors": curve.errors.tolist(),
        "monotone": curve.is_monotone(),
    }


def _estimates(payload: SimulationRequest) -> dict:
    a, n, steps, seed = payload.alpha, payload.n, payload.steps, payload.seed
    if payload.target == "passage":
        return {"joint_transform": simulate.first_passage_functional(a, payload.z, payload.lam, payload.mu, n,
                                                                     1.0 / steps, seed)}
    if payload.target == "a1":
        q, path, direct = simulate.area_identity_check(a, max(n, 1000), (payload.q,), steps, seed)[0]
        return {"path_area": path, "stable_side": direct}
    if payload.target == "conditioned":
        estimate = simulate.sample_conditioned_weighted(a, simulate.CONDITIONED_START, steps,
                                                        lambda areas: np.exp(-payload.s * areas),
                                                        n_samples=n, seed=seed)
        extra = estimate.extra
        normalization = MCEstimate(mean=extra["normalization"], stderr=extra["normalization_stderr"],
                                   n=estimate.n, seed=seed)
        return {"normalization": normalization, "laplace": estimate}
    areas = simulate.sample_areas(payload.target, a, n, steps, seed)
    return {"mean": simulate.mc_moment(areas, 1.0, seed),
            "laplace": simulate.laplace_of_samples(areas, payload.s, seed=seed)}


@simulate_router.post("/estimate")
def estimate(payload: SimulationRequest):
    try:
        found = _estimates(payload)
    except NumericalError as exc:
        _raise_http(exc)
    return {"target": payload.target, "alpha": payload.alpha,
            "estimates": {name: e.as_dict() for name, e in found.items()}}


routers = [wright_router, coeffs_router, transforms_router, inversion_router, simulate_router]
