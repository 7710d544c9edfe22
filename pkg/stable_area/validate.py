"""The validation report: closed forms against independent oracles.

Hard checks decide the exit status; soft checks (tail slopes, horizon-cut
Mellin moments) are printed for information. Barrier-monitored Monte Carlo
runs on two grids and is Richardson-extrapolated before comparing.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy import integrate

from . import coeffs, inversion, simulate, transforms, wright
from .config import DEFAULT_SEED
from .errors import InsufficientTail, InvalidInput, NumericalError
from .models import as_index
from .results import MCEstimate, Route

logger = logging.getLogger(__name__)

Z_LIMIT = 3.0


@dataclass
class Check:
    name: str
    computed: float
    reference: float
    statistic: float
    tolerance: float
    hard: bool = True
    kind: str = "abs"

    @property
    def passed(self) -> bool:
        return math.isfinite(self.statistic) and abs(self.statistic) <= self.tolerance

    @property
    def status(self) -> str:
        if not self.hard:
            return "SOFT"
        return "PASS" if self.passed else "FAIL"

    def as_row(self):
        return {
            "check": self.name,
            "computed": self.computed,
            "reference": self.reference,
            "kind": self.kind,
            "statistic": self.statistic,
            "tolerance": self.tolerance,
            "status": self.status,
        }


def _abs_check(name, computed, reference, tol, hard=True) -> Check:
    return Check(name, float(computed), float(reference), float(computed) - float(reference), tol, hard, "abs")


def _rel_check(name, computed, reference, tol, hard=True) -> Check:
    reference = float(reference)
    stat = (float(computed) - reference) / abs(reference) if reference else math.inf
    return Check(name, float(computed), reference, stat, tol, hard, "rel")


def _z_check(name, estimate: MCEstimate, reference, hard=True) -> Check:
    return Check(name, estimate.mean, float(reference), estimate.z_score(float(reference)), Z_LIMIT, hard, "z")


def _pair_z(name, left: MCEstimate, right: MCEstimate, hard=True) -> Check:
    spread = math.hypot(left.stderr, right.stderr)
    stat = (left.mean - right.mean) / spread if spread else math.inf
    return Check(name, left.mean, right.mean, stat, Z_LIMIT, hard, "z")


@dataclass
class Sizes:
    paths: int
    steps: int
    passage: int
    dt: float

    @classmethod
    def pick(cls, quick: bool) -> "Sizes":
        if quick:
            return cls(paths=3000, steps=400, passage=3000, dt=4e-3)
        return cls(paths=10000, steps=1000, passage=20000, dt=1e-3)


def deterministic_checks(alpha: float) -> List[Check]:
    index = as_index(alpha, "validate")
    al = index.alpha
    checks = []
    for x in (0.0, 1.0, 2.0):
        series = wright.phi(al, x, route=Route.SERIES)
        quad = wright.phi(al, x, route=Route.QUADRATURE)
        checks.append(_abs_check(f"phi({x:g}) series vs contour quadrature", series.value, quad.value, 1e-8))
        series = wright.psi(al, x, route=Route.SERIES)
        quad = wright.psi(al, x, route=Route.QUADRATURE)
        checks.append(_abs_check(f"psi({x:g}) series vs ray quadrature", series.value, quad.value, 1e-8))
    if index.is_brownian:
        checks.append(_abs_check("phi(1) vs Airy quadrature", wright.phi(al, 1.0).value, wright.airy_reference(1.0), 1e-9))
    else:
        checks.append(_abs_check("phi(1) vs real-axis integral", wright.phi(al, 1.0).value,
                                 wright.phi_integral_reference(al, 1.0), 1e-8))
    checks.append(_abs_check("F identity at lambda=1", wright.f_identity_residual(al, 1.0), 0.0, 1e-8))

    first, second = coeffs.moment_closed_forms(al)
    checks.append(_rel_check("E[A_ex] recurrence vs closed form", coeffs.moment_ex(al, 1), first, 1e-10))
    checks.append(_rel_check("E[A_ex^2] recurrence vs closed form", coeffs.moment_ex(al, 2), second, 1e-10))

    lam = 1.0
    rebuilt = (transforms.theorem1_alt_rhs(al, lam) - transforms.theorem1_alt_rhs(al, 0.0)
               - float(coeffs.gamma(-1.0 / al)) * lam ** (1.0 / al))
    checks.append(_abs_check("theorem 1 vs alternative form", transforms.theorem1_rhs(al, lam), rebuilt, 1e-10))
    checks.append(_abs_check(
        "joint transform at lambda=0 vs level series",
        transforms.joint_laplace_T0_area(al, 1.0, 0.0, 1.0), transforms.area_laplace_from_level(al, 1.0, 1.0), 1e-10,
    ))
    lam = 0.5
    laplace, _ = integrate.quad(lambda t: math.exp(-lam * t) * transforms.hitting_density(al, 1.0, t),
                                0.0, math.inf, limit=200)
    checks.append(_abs_check("hitting density Laplace transform", laplace,
                             transforms.passage_time_laplace(al, 1.0, lam), 1e-6))
    if not index.is_brownian:
        lam = 100.0
        h = transforms.h_alpha(al, lam)
        scaled = (h - transforms.h_alpha_asymptotic(al, lam, 2)) * lam ** (2.0 + al - 1.0 / al)
        # for alpha near 2 the next correction, of order lam^(-3-1/alpha), is not yet negligible at lam=100
        checks.append(_rel_check("H expansion third coefficient", scaled, float(coeffs.gamma(1.0 + al)), 0.05,
                                 hard=al <= 1.6))
    if index.is_brownian:
        checks.append(_abs_check("theorem 3 vs Airy form", transforms.theorem3_rhs(al, 1.0),
                                 transforms.theorem3_airy_form(1.0), 1e-8))

    s = 1e-3
    checks.append(_rel_check("excursion small-s slope vs mean",
                             (1.0 - inversion.invert_excursion(al, s)) / s, transforms.mean_ex(al), 0.05))
    checks.append(_rel_check("meander small-s slope vs mean",
                             (1.0 - inversion.invert_meander(al, s)) / s, transforms.mean_meander(al), 0.05))
    for law in inversion.LAWS:
        value, other = inversion.cross_check(law, al, 1.0)
        checks.append(_abs_check(f"{law} stehfest vs talbot at s=1", value, other, 1e-6))
    return checks


def _two_grid(run: Callable[[int], MCEstimate], steps: int, alpha: float) -> MCEstimate:
    fine = run(steps)
    coarse = run(max(100, steps // 4))
    return simulate.richardson(fine, coarse, steps / max(100, steps // 4), alpha)


def _guarded(checks: List[Check], name: str, build: Callable[[], Check], hard: bool = True) -> None:
    """Append build(), or a FAIL row named ``name`` when it raises a library error."""
    try:
        checks.append(build())
    except InsufficientTail as exc:
        if hard:
            checks.append(Check(name, math.nan, math.nan, math.nan, 0.0))
        logger.info("check %r skipped: %s", name, exc)
    except NumericalError as exc:
        logger.error("check %r failed: %s", name, exc)
        checks.append(Check(name, math.nan, math.nan, math.nan, 0.0, hard))


def monte_carlo_checks(alpha: float, quick: bool = False, seed: int = DEFAULT_SEED,
                       threads: Optional[int] = None) -> List[Check]:
    index = as_index(alpha, "validate")
    al = index.alpha
    size = Sizes.pick(quick)
    checks = []

    def increment():
        values = simulate.standard_variates(al, size.paths * 10, np.random.default_rng(seed))
        return _z_check("increment Laplace transform at q=1", simulate.laplace_of_samples(values, 1.0, seed=seed),
                        math.e)

    _guarded(checks, "increment Laplace transform at q=1", increment)

    def identity():
        (q, path, direct), = simulate.area_identity_check(al, size.paths * 3, (1.0,), size.steps // 2, seed, threads)
        return _pair_z(f"area identity at q={q:g}", path, direct)

    _guarded(checks, "area identity at q=1", identity)

    def passage(steps):
        dt = size.dt * size.steps / steps
        return simulate.first_passage_functional(al, 1.0, 0.0, 1.0, size.passage, dt, seed, threads)

    _guarded(checks, "first passage area transform", lambda: _z_check(
        "first passage area transform", _two_grid(passage, size.steps, al),
        transforms.joint_laplace_T0_area(al, 1.0, 0.0, 1.0)))

    excursions = {}
    meanders = {}

    def areas(store, target, steps):
        if steps not in store:
            store[steps] = simulate.sample_areas(target, al, size.paths, steps, seed, threads)
        return store[steps]

    _guarded(checks, "excursion mean", lambda: _z_check("excursion mean", _two_grid(
        lambda k: simulate.mc_moment(areas(excursions, "excursion", k), 1.0, seed), size.steps, al),
        transforms.mean_ex(al)))
    _guarded(checks, "excursion E[exp(-A)]", lambda: _z_check("excursion E[exp(-A)]", _two_grid(
        lambda k: simulate.laplace_of_samples(areas(excursions, "excursion", k), 1.0, seed=seed), size.steps, al),
        inversion.invert_excursion(al, 1.0)))
    _guarded(checks, "meander mean", lambda: _z_check("meander mean", _two_grid(
        lambda k: simulate.mc_moment(areas(meanders, "meander", k), 1.0, seed), size.steps, al),
        transforms.mean_meander(al)))
    _guarded(checks, "meander E[exp(-A)]", lambda: _z_check("meander E[exp(-A)]", _two_grid(
        lambda k: simulate.laplace_of_samples(areas(meanders, "meander", k), 1.0, seed=seed), size.steps, al),
        inversion.invert_meander(al, 1.0)))

    def conditioned(steps):
        return simulate.sample_conditioned_weighted(al, simulate.CONDITIONED_START, steps, lambda a: np.exp(-a),
                                                    n_samples=size.paths * 2, seed=seed, threads=threads)

    _guarded(checks, "conditioned E[exp(-A)]", lambda: _z_check(
        "conditioned E[exp(-A)]", _two_grid(conditioned, size.steps, al), inversion.invert_conditioned(al, 1.0)))

    checks.extend(_soft_checks(index, size, excursions, meanders, seed, threads))
    return checks


def _soft_checks(index, size, excursions, meanders, seed, threads) -> List[Check]:
    al = index.alpha
    checks = []

    fine = excursions.get(size.steps)
    if fine is not None and fine.size >= 100_000:
        _guarded(checks, "excursion tail exponent", lambda: _rel_check(
            "excursion tail exponent", simulate.excursion_tail_slope(al, fine), al / (al - 1.0), 0.5, hard=False),
            hard=False)
    if not index.is_brownian:
        if size.steps in meanders:
            _guarded(checks, "meander tail exponent", lambda: _rel_check(
                "meander tail exponent", simulate.meander_tail_slope(meanders[size.steps]), -al, 0.15, hard=False),
                hard=False)

        def conditioned_tail():
            areas, weights = simulate.resampled_samples(al, simulate.CONDITIONED_START, size.paths * 2, size.steps,
                                                        seed, threads)
            return _rel_check("conditioned tail exponent", simulate.weighted_tail_slope(areas, weights),
                              1.0 - al, 0.15, hard=False)

        _guarded(checks, "conditioned tail exponent", conditioned_tail, hard=False)
    _guarded(checks, "Mellin moment of the passage area", lambda: _z_check(
        "Mellin moment of the passage area",
        simulate.mc_mellin_passage(al, 1.0, 0.2, size.passage // 4, seed=seed, threads=threads),
        transforms.mellin_area_T0(al, 0.2), hard=False), hard=False)
    return checks


def theorem_lhs_mc(law: str, alpha, lam: float, n_samples: int = 4000, n_steps: int = 400,
                   seed: int = DEFAULT_SEED, threads: Optional[int] = None) -> MCEstimate:
    """Monte Carlo value of the t-integral on the left of the law's theorem.

    excursion    int e^(-lam t) (1 - E exp(-t^b A_ex)) t^(-b) dt  (alternative form)
    meander      int e^(-lam t) E exp(-t^b A_me) t^(-1/alpha) dt
    conditioned  int e^(-lam t) E exp(-t^b A_up) dt
    with b = 1 + 1/alpha; each sample's integral is done on a log grid.
    """
    index = as_index(alpha, "validate")
    al = index.alpha
    if not lam > 0:
        raise InvalidInput("validate", f"lambda must be > 0 for the Monte Carlo left-hand side, got {lam!r}")
    law = inversion.normalize_law(law)
    if law == "conditioned":
        areas, weights = simulate.resampled_samples(al, simulate.CONDITIONED_START, n_samples, n_steps, seed, threads)
    else:
        areas = simulate.sample_areas(law, al, n_samples, n_steps, seed, threads)
    head = 1e-10
    t = np.geomspace(head, 60.0 / lam, 800)
    exponent = np.outer(areas, t ** index.beta)
    decay = np.exp(-exponent)
    if law == "excursion":
        integrand = -np.expm1(-exponent) * t ** (-index.beta)
        start = areas * head
    elif law == "meander":
        integrand = decay * t ** (-1.0 / al)
        start = np.full_like(areas, head ** (1.0 - 1.0 / al) / (1.0 - 1.0 / al))
    else:
        integrand = decay
        start = np.full_like(areas, head)
    values = integrate.trapezoid(integrand * np.exp(-lam * t) * t, np.log(t), axis=1) + start
    if law == "conditioned":
        return simulate.weighted_mean(values, weights, seed, extra={"law": law, "lambda": lam})
    return MCEstimate.from_values(values, seed, extra={"law": law, "lambda": lam})


def run_validation(alpha, quick: bool = False, seed: int = DEFAULT_SEED, threads: Optional[int] = None) -> List[Check]:
    al = as_index(alpha, "validate").alpha
    checks = []
    for stage in (lambda: deterministic_checks(al), lambda: monte_carlo_checks(al, quick, seed, threads)):
        try:
            checks.extend(stage())
        except NumericalError as exc:
            logger.error("validation stage aborted: %s", exc)
            checks.append(Check(f"aborted: {exc}", math.nan, math.nan, math.nan, 0.0))
    failed = sum(1 for c in checks if c.status == "FAIL")
    logger.info("validation at alpha=%g: %d checks, %d failed", al, len(checks), failed)
    return checks


def exit_status(checks: List[Check]) -> int:
    return 1 if any(c.status == "FAIL" for c in checks) else 0
