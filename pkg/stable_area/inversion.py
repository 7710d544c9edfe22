"""Laplace inversion of the theorem images back to s -> E[exp(-s A)].

With t = s^(alpha/(1+alpha)):

    excursion    E[exp(-s A_ex)] = 1 - t^(1+1/alpha) k(t),  k = L^-1[Gamma(-1/alpha)(Phi'/Phi + p^(1/alpha))]
    meander      E[exp(-s A_me)] = t^(1/alpha) L^-1[Gamma(1-1/alpha) H](t)
    conditioned  E[exp(-s A_up)] = L^-1[-p H - Phi'/Phi](t)

Phi'/Phi and H = pi W/Phi are meromorphic with poles at the zeros of Phi,
the rightmost being ``wright.first_zero``. Left alone, the inverses decay
like exp(z_1 t) and Stehfest loses digits fast once |z_1| t is more than a
few units. The images are therefore evaluated at p + sigma with sigma a
fixed fraction of the pole abscissa, and the inverse is multiplied back by
exp(sigma t). The excursion's p^(1/alpha) term is a branch point at 0 and
stays unshifted; its inverse t^(-1-1/alpha)/Gamma(-1/alpha) is known, so

    E[exp(-s A_ex)] = exp(sigma t) (1 - t^(1+1/alpha) L^-1[Gamma(-1/alpha)(Phi'/Phi(p+sigma) + p^(1/alpha))](t))

The images are evaluated in the inverting context's precision, so the
inversion sees them at whatever working precision mpmath chooses for the
requested degree.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from .coeffs import mp_context
from .config import default_threads
from .errors import InvalidInput, InversionUnstable
from .models import InversionConfig, as_index
from .results import LaplaceCurve, Law
from .wright import evaluate_all, first_zero

logger = logging.getLogger(__name__)

LAWS = ("excursion", "meander", "conditioned")
DEFAULT_INVERSION = InversionConfig()
CLAMP_TOL = 1e-8
# density_estimate inverts twice; the outer pass uses few nodes
OUTER_DEGREE = 14
DENSITY_ALPHA_RANGE = (1.3, 2.0)
# the shifted images keep their nearest pole this far (relative) left of the origin
SHIFT_FRACTION = 0.85
# Talbot nodes with Re(p t) below -(dps ln 10 + margin) add nothing at the working precision
TALBOT_SKIP_MARGIN = 50


def normalize_law(law: str) -> str:
    aliases = {"ex": "excursion", "me": "meander", "up": "conditioned"}
    law = aliases.get(law, law)
    if law not in LAWS:
        raise InvalidInput("inversion", f"unknown law {law!r}; expected one of {', '.join(LAWS)}")
    return law


def image_function(law: Law, alpha, shift: float = 0.0):
    """The image p -> F(p) whose inverse Laplace transform carries the law.

    With ``shift`` the meromorphic part is read at p + shift; the excursion's
    p^(1/alpha) term is never shifted.
    """
    law = normalize_law(law)
    al = as_index(alpha, "inversion").alpha

    def _point(p):
        ctx = p.context if hasattr(p, "context") else mp_context()
        p = ctx.convert(p)
        return ctx, p, evaluate_all(al, p + shift, ctx=ctx)

    def excursion(p):
        ctx, p, (phi, dphi, _, _) = _point(p)
        a = ctx.mpf(al)
        return ctx.gamma(-1 / a) * (dphi / phi + p ** (1 / a))

    def meander(p):
        ctx, p, (phi, dphi, psi, dpsi) = _point(p)
        a = ctx.mpf(al)
        return ctx.gamma(1 - 1 / a) * ctx.pi * (dpsi * phi - dphi * psi) / phi

    def conditioned(p):
        ctx, p, (phi, dphi, psi, dpsi) = _point(p)
        h = ctx.pi * (dpsi * phi - dphi * psi) / phi
        return -(p + shift) * h - dphi / phi

    return {"excursion": excursion, "meander": meander, "conditioned": conditioned}[law]


def singularity_shift(alpha, cfg: Optional[InversionConfig] = None) -> float:
    """The sigma the images are shifted by: SHIFT_FRACTION of the pole abscissa."""
    cfg = cfg or DEFAULT_INVERSION
    abscissa = cfg.singularity_abscissa
    if abscissa is None:
        abscissa = first_zero(alpha)
    return SHIFT_FRACTION * abscissa


def _invert(law: str, al: float, s, cfg: InversionConfig, ctx):
    """E[exp(-s A)] as a number of ``ctx``, before clamping."""
    sigma = singularity_shift(al, cfg)
    image = image_function(law, al, sigma)
    t = ctx.convert(s) ** (ctx.mpf(al) / (1 + ctx.mpf(al)))
    if cfg.method == "talbot":
        def target(p):
            if ctx.re(p) * t < -(ctx.dps * ctx.ln10 + TALBOT_SKIP_MARGIN):
                return ctx.zero
            return image(p)
    else:
        target = image
    if cfg.precision_bits is not None:
        with ctx.workprec(cfg.precision_bits):
            raw = ctx.invertlaplace(target, t, **cfg.invert_kwargs())
    else:
        raw = ctx.invertlaplace(target, t, **cfg.invert_kwargs())
    a = ctx.mpf(al)
    growth = ctx.exp(sigma * t)
    if law == "excursion":
        return growth * (1 - t ** (1 + 1 / a) * raw)
    if law == "meander":
        return growth * t ** (1 / a) * raw
    return growth * raw


def _clamp(value: float, law: str, s: float) -> float:
    if 0.0 <= value <= 1.0:
        return value
    if -CLAMP_TOL <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + CLAMP_TOL:
        return 1.0
    raise InversionUnstable("inversion", f"{law} transform at s={s:g} came out as {value:.6g}, outside [0, 1]")


def _evaluate(law: str, alpha, s, cfg: Optional[InversionConfig]) -> float:
    law = normalize_law(law)
    al = as_index(alpha, "inversion").alpha
    s = float(s)
    if not (math.isfinite(s) and s > 0):
        raise InvalidInput("inversion", f"s must be finite and > 0, got {s!r}")
    cfg = cfg or DEFAULT_INVERSION
    ctx = mp_context()
    value = float(ctx.re(_invert(law, al, s, cfg, ctx)))
    if cfg.cross_check:
        for other in (cfg.doubled(), _other_method(cfg)):
            check = float(ctx.re(_invert(law, al, s, other, ctx)))
            if abs(check - value) > cfg.cross_check_tol * max(1.0, abs(value)):
                raise InversionUnstable(
                    "inversion",
                    f"{law} at s={s:g}: {cfg.method}/{cfg.node_count} gives {value:.12g}, "
                    f"{other.method}/{other.node_count} gives {check:.12g}",
                )
        logger.debug("%s at s=%g passed the cross-check", law, s)
    return _clamp(value, law, s)


def invert_excursion(alpha, s, cfg: Optional[InversionConfig] = None) -> float:
    return _evaluate("excursion", alpha, s, cfg)


def invert_meander(alpha, s, cfg: Optional[InversionConfig] = None) -> float:
    return _evaluate("meander", alpha, s, cfg)


def invert_conditioned(alpha, s, cfg: Optional[InversionConfig] = None) -> float:
    return _evaluate("conditioned", alpha, s, cfg)


def invert(law: Law, alpha, s, cfg: Optional[InversionConfig] = None) -> float:
    return _evaluate(law, alpha, s, cfg)


def _other_method(cfg: InversionConfig) -> InversionConfig:
    other = "talbot" if cfg.method == "stehfest" else "stehfest"
    # talbot reaches the same accuracy with more nodes than stehfest at equal precision
    nodes = 2 * cfg.node_count if other == "talbot" else cfg.node_count
    return cfg.model_copy(update={"method": other, "node_count": nodes, "cross_check": False})


def cross_check(law: Law, alpha, s, cfg: Optional[InversionConfig] = None):
    """The same point by Stehfest and by Talbot: (value, other_value)."""
    cfg = (cfg or DEFAULT_INVERSION).model_copy(update={"cross_check": False})
    law = normalize_law(law)
    al = as_index(alpha, "inversion").alpha
    ctx = mp_context()
    first = float(ctx.re(_invert(law, al, float(s), cfg, ctx)))
    second = float(ctx.re(_invert(law, al, float(s), _other_method(cfg), ctx)))
    return first, second


def _curve_point(args):
    law, al, s, cfg = args
    ctx = mp_context()
    value = float(ctx.re(_invert(law, al, s, cfg, ctx)))
    finer = float(ctx.re(_invert(law, al, s, cfg.doubled(), ctx)))
    return _clamp(value, law, s), abs(finer - value)


def laplace_curve(law: Law, alpha, s_grid, cfg: Optional[InversionConfig] = None,
                  threads: Optional[int] = None) -> LaplaceCurve:
    """E[exp(-s A)] on a grid of s, one inversion per point, spread over a thread pool.

    The error column is the change when the node count is doubled.
    The curve comes back sorted by s.
    """
    law = normalize_law(law)
    al = as_index(alpha, "inversion").alpha
    cfg = cfg or DEFAULT_INVERSION
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0 or np.any(~np.isfinite(s_grid)) or np.any(s_grid <= 0):
        raise InvalidInput("inversion", "s grid must be a non-empty list of positive numbers")
    threads = threads or default_threads()
    jobs = [(law, al, float(s), cfg) for s in s_grid]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(_curve_point, jobs))
    else:
        points = [_curve_point(job) for job in jobs]
    order = np.argsort(s_grid, kind="stable")
    curve = LaplaceCurve(
        s_grid=s_grid[order],
        values=np.array([p[0] for p in points])[order],
        law=law,
        errors=np.array([p[1] for p in points])[order],
    )
    if not curve.is_monotone(tol=1e-8):
        logger.warning("%s curve at alpha=%g is not monotone in s", law, al)
    return curve


def completely_monotone(values, tol: float = 1e-8) -> bool:
    """Finite differences of an equally spaced curve alternate in sign."""
    diffs = np.asarray(values, dtype=float)
    for order in range(1, len(diffs)):
        diffs = np.diff(diffs)
        sign = (-1) ** order
        if np.any(sign * diffs < -tol):
            return False
    return True


def geometric_grid(lo: float = 1e-3, hi: float = 1e3, n: int = 25) -> np.ndarray:
    if not (0 < lo < hi) or n < 2:
        raise InvalidInput("inversion", f"bad grid {lo}:{hi}:{n}")
    return np.geomspace(lo, hi, n)


def density_estimate(law: Law, alpha, x, cfg: Optional[InversionConfig] = None) -> float:
    """Density of the area at x by inverting s -> E[exp(-s A)] a second time."""
    law = normalize_law(law)
    index = as_index(alpha, "inversion")
    lo, hi = DENSITY_ALPHA_RANGE
    if not (lo <= index.alpha <= hi):
        raise InvalidInput("inversion", f"density estimates are offered for alpha in [{lo}, {hi}], got {index.alpha}")
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise InvalidInput("inversion", f"x must be finite and > 0, got {x!r}")
    inner = (cfg or DEFAULT_INVERSION).doubled()
    ctx = mp_context()

    def outer(s):
        return ctx.re(_invert(law, index.alpha, s, inner, ctx))

    value = float(ctx.invertlaplace(outer, x, method="stehfest", degree=OUTER_DEGREE))
    if value < -1e-3:
        raise InversionUnstable("inversion", f"{law} density at x={x:g} came out as {value:.4g}")
    return max(0.0, value)


def density_curve(law: Law, alpha, x_grid, cfg: Optional[InversionConfig] = None,
                  threads: Optional[int] = None) -> np.ndarray:
    x_grid = np.asarray(x_grid, dtype=float)
    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.array(list(pool.map(lambda x: density_estimate(law, alpha, x, cfg), x_grid)))
    return np.array([density_estimate(law, alpha, x, cfg) for x in x_grid])
