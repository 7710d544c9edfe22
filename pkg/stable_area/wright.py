"""Phi_alpha, Psi_alpha, their derivatives and F_alpha.

Three evaluation routes:

* series: the entire power series, summed in an mpmath context whose working
  precision is raised by the number of digits the largest term exceeds the
  result by (the series cancels badly once x(1+alpha)^(1/(1+alpha)) is large);
* quadrature: Phi and Phi' along the vertical line through the saddle point of
  w^(1+alpha)/(1+alpha) - xw, Psi and Psi' along the ray arg w = pi/(1+alpha);
* asymptotic: the large-x expansions with coefficients c_p, d_p (Phi, Phi')
  and the Watson expansion (Psi, Psi'), truncated at the smallest term.

``i^theta`` always means exp(i pi theta / 2).
"""
import cmath
import logging
import math
import threading
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .coeffs import EXTENDED_BITS, coefficient_table, loggamma, mp_context
from .config import CACHE_ENABLED
from .errors import InvalidInput, NonConvergence
from .models import EvalConfig, StableIndex, as_index
from .results import EvalResult, Route

logger = logging.getLogger(__name__)

LN10 = math.log(10.0)
DEFAULT_CONFIG = EvalConfig()
KINDS = ("phi", "phi_prime", "psi", "psi_prime")

# Re(exponent) drop at which integrands are cut off
_CUTOFF = 50.0
_MAX_PANELS = 4000

_coef_cache = threading.local()
_MAX_COEF_LISTS = 64


def _check_x(x, module="wright"):
    if isinstance(x, complex):
        if not (math.isfinite(x.real) and math.isfinite(x.imag)):
            raise InvalidInput(module, f"x must be finite, got {x!r}")
        return x
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise InvalidInput(module, f"x must be a number, got {x!r}")
    if not math.isfinite(value):
        raise InvalidInput(module, f"x must be finite, got {x!r}")
    return value


# --------------------------------------------------------------------------
# series route (extended precision)
# --------------------------------------------------------------------------

def _term_log10(alpha: float, n: int, log_absz: float) -> float:
    a = 1.0 + alpha
    return (loggamma((1 + n) / a) + (n - alpha) / a * math.log(a)
            - loggamma(n + 1) - math.log(math.pi) + n * log_absz) / LN10


def _phi_log10(alpha: float, x: float) -> float:
    """Rough log10 |Phi_alpha(x)| used to size the guard digits."""
    if x <= 1.0:
        return -2.0
    xi = x ** (1.0 + 1.0 / alpha)
    return (-(alpha / (1.0 + alpha)) * xi + (1.0 - alpha) / (2.0 * alpha) * math.log(x)
            - 0.5 * math.log(2 * math.pi * alpha)) / LN10 - 1.0


def _series_plan(alpha: float, absz: float, digits: int, floor10: float, max_terms: int):
    """Number of terms, log10 of the largest term and of the first omitted one."""
    if absz == 0.0:
        return 2, 0.0, -math.inf
    log_absz = math.log(absz)
    peak = -math.inf
    previous = math.inf
    n = 0
    while True:
        level = _term_log10(alpha, n, log_absz)
        if n > 0:
            level = max(level, level + math.log10(n) - log_absz / LN10)
        peak = max(peak, level)
        if n > 2 and level < previous and level < floor10 - digits - 3:
            return n, peak, level
        previous = level
        n += 1
        if n > max_terms:
            raise NonConvergence("wright", f"series needs more than {max_terms} terms at |z|={absz:g}")


def _working_dps(digits: int, peak: float, floor10: float) -> int:
    guard = max(0.0, peak - floor10) + 8
    dps = digits + int(math.ceil(guard))
    return 10 * ((dps + 9) // 10)


def _coefficients(alpha: float, ctx, count: int, family: str):
    """Cached series coefficients at the context's current precision."""
    store = getattr(_coef_cache, "tables", None)
    if store is None:
        store = {}
        _coef_cache.tables = store
    key = (id(ctx), alpha, ctx.prec, family)
    coefs = store.get(key) if CACHE_ENABLED else None
    if coefs is None:
        coefs = []
        if CACHE_ENABLED:
            if len(store) >= _MAX_COEF_LISTS:
                store.clear()
            store[key] = coefs
    a = ctx.mpf(alpha) + 1
    while len(coefs) < count:
        n = len(coefs)
        sign = -1 if n % 2 else 1
        if family == "wright":
            g = sign * a ** ((n - a + 1) / a) * ctx.gamma((1 + n) / a) / (ctx.factorial(n) * ctx.pi)
            coefs.append((g * ctx.sinpi((1 + n) / a), g * ctx.cospi((1 + n) / a)))
        else:
            phase = ctx.expjpi((3 - a) * (n + 1) / (2 * a))
            g = sign * ctx.gamma((n + 1) / a) * a ** ((n + 1) / a) / (a * ctx.factorial(n))
            coefs.append(g * phase)
    return coefs


def series_all(alpha, z, digits: int = 17, max_terms: int = 4000, ctx=None):
    """Phi, Phi', Psi, Psi' at z by the power series.

    Returns the four values as numbers of ``ctx`` plus an absolute error
    estimate (float).
    """
    alpha = as_index(alpha, "wright").alpha
    ctx = ctx or mp_context()
    absz = abs(complex(z))
    real_z = not isinstance(z, complex) and not hasattr(z, "_mpc_")
    floor10 = _phi_log10(alpha, float(z)) if real_z else -2.0
    count, peak, omitted = _series_plan(alpha, absz, digits, floor10, max_terms)
    dps = _working_dps(digits, peak, floor10)
    with ctx.workdps(dps):
        zz = ctx.convert(z)
        coefs = _coefficients(alpha, ctx, count, "wright")
        phi = psi = dphi = dpsi = ctx.zero
        power = ctx.one
        previous = ctx.zero
        for n in range(count):
            s, c = coefs[n]
            phi += s * power
            psi += c * power
            if n:
                dphi += n * s * previous
                dpsi += n * c * previous
            previous = power
            power = power * zz
        values = (phi, dphi, psi, dpsi)
    scale = max(abs(complex(v)) for v in values)
    err = 10.0 ** omitted * (1.0 + count / max(absz, 1e-300)) + scale * 10.0 ** (-digits)
    if absz == 0.0:
        err = scale * 10.0 ** (-digits)
    logger.debug("series |z|=%.4g terms=%d dps=%d", absz, count, dps)
    return values, float(err)


def f_series(alpha, lam, digits: int = 17, max_terms: int = 4000, ctx=None):
    """F_alpha(lambda) by its power series; returns (value, abs error)."""
    alpha = as_index(alpha, "wright").alpha
    ctx = ctx or mp_context()
    absz = abs(complex(lam))
    count, peak, omitted = _series_plan(alpha, absz, digits, -2.0, max_terms)
    dps = _working_dps(digits, peak, -2.0)
    with ctx.workdps(dps):
        zz = ctx.convert(lam)
        coefs = _coefficients(alpha, ctx, count, "f")
        total = ctx.zero
        power = ctx.one
        for n in range(count):
            total += coefs[n] * power
            power = power * zz
    err = 10.0 ** omitted * math.pi + abs(complex(total)) * 10.0 ** (-digits)
    return total, float(err)


# --------------------------------------------------------------------------
# asymptotic route
# --------------------------------------------------------------------------

def _asym_table(alpha: float, bits: int = EXTENDED_BITS):
    return coefficient_table(alpha, 64 * ((bits + 63) // 64))


def _optimal_cut(magnitudes):
    """Index of the smallest term among terms 1.. (term 0 is always kept)."""
    if len(magnitudes) < 2:
        return len(magnitudes)
    return 1 + int(np.argmin(magnitudes[1:]))


def _phi_family_terms(alpha: float, x: float, count: int, derivative: bool):
    table = _asym_table(alpha)
    xi = x ** (1.0 + 1.0 / alpha)
    terms = []
    for p in range(count):
        coef = float(table.d_p(p) if derivative else table.c_p(p))
        sign = (-1) ** (p + 1) if derivative else (-1) ** p
        terms.append(sign * coef * xi ** (-p))
    return np.array(terms)


def _phi_family_prefactor(alpha: float, x: float, derivative: bool) -> float:
    xi = x ** (1.0 + 1.0 / alpha)
    power = (3.0 - alpha) / (2.0 * alpha) if derivative else (1.0 - alpha) / (2.0 * alpha)
    return (2 * math.pi * alpha) ** -0.5 * x ** power * math.exp(-(alpha / (1.0 + alpha)) * xi)


def _watson_terms(alpha: float, x: float, count: int, derivative: bool):
    a = 1.0 + alpha
    terms = []
    for n in range(count):
        log_w = loggamma(1 + a * n) - loggamma(n + 1) - n * math.log(a) - (a * n + 1) * math.log(x)
        w = math.exp(log_w) / math.pi
        terms.append(-(a * n + 1) * w / x if derivative else w)
    return np.array(terms)


def _asymptotic_terms(kind: str, alpha: float, x: float, count: int):
    if kind in ("phi", "phi_prime"):
        derivative = kind == "phi_prime"
        return _phi_family_prefactor(alpha, x, derivative) * _phi_family_terms(alpha, x, count, derivative)
    return _watson_terms(alpha, x, count, kind == "psi_prime")


def _check_positive(x, N: int):
    x = _check_x(x)
    if isinstance(x, complex) or x <= 0:
        raise InvalidInput("wright", f"asymptotic expansions need x > 0, got {x!r}")
    if N < 1:
        raise InvalidInput("wright", f"N must be >= 1, got {N}")
    return x


def phi_asymptotic(alpha, x, N: int) -> float:
    """N-term truncation of the large-x expansion of Phi_alpha."""
    alpha = as_index(alpha, "wright").alpha
    x = _check_positive(x, N)
    return float(np.sum(_asymptotic_terms("phi", alpha, x, N)))


def phi_prime_asymptotic(alpha, x, N: int) -> float:
    alpha = as_index(alpha, "wright").alpha
    x = _check_positive(x, N)
    return float(np.sum(_asymptotic_terms("phi_prime", alpha, x, N)))


def psi_asymptotic(alpha, x, N: int) -> float:
    alpha = as_index(alpha, "wright").alpha
    x = _check_positive(x, N)
    return float(np.sum(_asymptotic_terms("psi", alpha, x, N)))


def psi_prime_asymptotic(alpha, x, N: int) -> float:
    alpha = as_index(alpha, "wright").alpha
    x = _check_positive(x, N)
    return float(np.sum(_asymptotic_terms("psi_prime", alpha, x, N)))


def _asymptotic_optimal(kind: str, alpha: float, x: float, max_terms: int):
    terms = _asymptotic_terms(kind, alpha, x, max_terms)
    cut = _optimal_cut(np.abs(terms))
    value = float(np.sum(terms[:cut]))
    err = float(abs(terms[cut])) if cut < len(terms) else float(abs(terms[-1]))
    return value, err + abs(value) * 4e-16


def asymptotic_all(alpha, x, digits: int, max_terms: int = 40, ctx=None):
    """The four functions at real x > 0 from the expansions, in extended precision.

    Returns None when the smallest term is not below 10^-digits, i.e. when x
    is too small for the expansions to reach the requested accuracy.
    """
    alpha = as_index(alpha, "wright").alpha
    ctx = ctx or mp_context()
    bits = int((digits + 10) / math.log10(2))
    table = _asym_table(alpha, bits)
    with ctx.workdps(digits + 10):
        a = ctx.mpf(alpha)
        xx = ctx.convert(x)
        xi = xx ** (1 + 1 / a)
        tol = ctx.mpf(10) ** (-digits - 2)

        def truncated(coef_of, sign_of):
            terms = []
            best = None
            for p in range(max_terms):
                term = sign_of(p) * ctx.convert(coef_of(p)) * xi ** (-p)
                terms.append(term)
                if p and (best is None or abs(term) < abs(terms[best])):
                    best = p
                if p and abs(term) < tol:
                    return ctx.fsum(terms[:-1])
                if best is not None and p > best + 3:
                    break
            return None

        s_phi = truncated(table.c_p, lambda p: (-1) ** p)
        s_dphi = truncated(table.d_p, lambda p: (-1) ** (p + 1))
        if s_phi is None or s_dphi is None:
            return None
        envelope = ctx.exp(-(a / (1 + a)) * xi) / ctx.sqrt(2 * ctx.pi * a)
        phi = envelope * xx ** ((1 - a) / (2 * a)) * s_phi
        dphi = envelope * xx ** ((3 - a) / (2 * a)) * s_dphi

        psi_terms = []
        dpsi_terms = []
        b = 1 + a
        for n in range(max_terms):
            w = ctx.gamma(1 + b * n) / (ctx.factorial(n) * b ** n) * xx ** (-b * n - 1) / ctx.pi
            if n and abs(w) < tol * abs(psi_terms[0]):
                break
            if n > 1 and abs(w) > abs(psi_terms[-1]):
                return None
            psi_terms.append(w)
            dpsi_terms.append(-(b * n + 1) * w / xx)
        else:
            return None
        values = (phi, dphi, ctx.fsum(psi_terms), ctx.fsum(dpsi_terms))
    return values, 0.0


def evaluate_all(alpha, x, digits: Optional[int] = None, ctx=None, switchover: float = 25.0):
    """Phi, Phi', Psi, Psi' at one point in the context's precision.

    Real x far enough right goes through the expansions when they can reach
    the requested number of digits; everything else through the series.
    """
    ctx = ctx or mp_context()
    digits = digits or ctx.dps
    alpha = as_index(alpha, "wright").alpha
    if not hasattr(x, "_mpc_") and not isinstance(x, complex):
        xf = float(x)
        if xf > 0 and xf ** (1.0 + 1.0 / alpha) >= switchover:
            found = asymptotic_all(alpha, x, digits, ctx=ctx)
            if found is not None:
                return found[0]
    values, _ = series_all(alpha, x, digits=digits, max_terms=200000, ctx=ctx)
    return values


# --------------------------------------------------------------------------
# quadrature route (double precision)
# --------------------------------------------------------------------------

def _panel_quad(func, upper: float, width: float, limit: int):
    panels = int(min(_MAX_PANELS, max(4, math.ceil(upper / width))))
    edges = np.linspace(0.0, upper, panels + 1)
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, e = integrate.quad(func, lo, hi, limit=limit, epsabs=1e-16, epsrel=1e-13)
        total += value
        err += e
    return total, err


def _vertical_line(alpha: float, x: float, derivative: bool, limit: int):
    a = 1.0 + alpha
    if x >= 0:
        c = max(x, 1.0) ** (1.0 / alpha)
    else:
        c = min(1.0, 1.0 / abs(x))

    def g(y):
        w = complex(c, y)
        return w ** a / a - w * x

    g0 = g(0.0).real
    upper = 1.0
    while (g(upper).real - g0) > -_CUTOFF and upper < 1e4:
        upper *= 2.0
    sigma = 1.0 / math.sqrt(alpha * c ** (alpha - 1.0))
    freq = abs(complex(c, upper) ** alpha) + abs(x)
    width = min(sigma, math.pi / (4.0 * max(freq, 1e-3)))

    if derivative:
        def integrand(y):
            w = complex(c, y)
            return (w * cmath.exp(g(y) - g0)).real
    else:
        def integrand(y):
            return cmath.exp(g(y) - g0).real

    total, err = _panel_quad(integrand, upper, width, limit)
    scale = math.exp(g0) / math.pi
    sign = -1.0 if derivative else 1.0
    return sign * scale * total, scale * err


def _ray(alpha: float, x: float, kind: str, limit: int):
    a = 1.0 + alpha
    theta = math.pi / a
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    derivative = kind.endswith("prime")
    trig = math.sin if kind.startswith("phi") else math.cos
    order = 2.0 if derivative else 1.0

    def exponent(r):
        return -r ** a / a - x * r * cos_t

    peak_r = (max(0.0, -x) * cos_t) ** (1.0 / alpha)
    top = exponent(peak_r)
    upper = max(1.0, 2 * peak_r)
    while exponent(upper) - top > -_CUTOFF and upper < 1e4:
        upper *= 2.0
    if x > 0:
        upper = min(upper, max(1.0, 2 * _CUTOFF / (x * cos_t)))
    width = math.pi / (4.0 * max(abs(x) * sin_t, 1.0))

    def integrand(r):
        weight = r if derivative else 1.0
        return weight * math.exp(exponent(r) - top) * trig(order * theta - x * r * sin_t)

    total, err = _panel_quad(integrand, upper, width, limit)
    scale = math.exp(top) / math.pi
    sign = -1.0 if derivative else 1.0
    return sign * scale * total, scale * err


def _quadrature(kind: str, alpha: float, x: float, cfg: EvalConfig):
    if kind in ("phi", "phi_prime"):
        return _vertical_line(alpha, x, kind == "phi_prime", cfg.quadrature_nodes)
    return _ray(alpha, x, kind, cfg.quadrature_nodes)


# --------------------------------------------------------------------------
# public evaluation
# --------------------------------------------------------------------------

def _series_value(kind: str, alpha: float, x, cfg: EvalConfig):
    ctx = mp_context()
    values, err = series_all(alpha, x, digits=cfg.digits, max_terms=cfg.max_series_terms, ctx=ctx)
    value = values[KINDS.index(kind)]
    if isinstance(x, complex):
        return complex(value), err
    return float(ctx.re(value)), err


def _evaluate(kind: str, alpha: StableIndex, x, cfg: EvalConfig, route: Optional[Route]) -> EvalResult:
    a = alpha.alpha
    if route is None:
        if isinstance(x, complex):
            route = Route.SERIES
        elif x > 0 and x ** alpha.beta >= cfg.asymptotic_switchover:
            route = Route.ASYMPTOTIC
        else:
            route = Route.SERIES
        forced = False
    else:
        route = Route(route)
        forced = True
        if isinstance(x, complex) and route is not Route.SERIES:
            raise InvalidInput("wright", "complex arguments are only supported on the series route")

    if route is Route.ASYMPTOTIC:
        if x <= 0:
            raise InvalidInput("wright", f"asymptotic route needs x > 0, got {x}")
        value, err = _asymptotic_optimal(kind, a, x, cfg.asymptotic_max_terms)
        if forced or err <= max(cfg.target_abs_tol, 1e-12 * abs(value)):
            return EvalResult(value, err, Route.ASYMPTOTIC)
        logger.debug("%s(%g): expansion error %.2e too large, using series", kind, x, err)
        route = Route.SERIES

    if route is Route.SERIES:
        try:
            value, err = _series_value(kind, a, x, cfg)
            return EvalResult(value, err, Route.SERIES)
        except NonConvergence:
            if forced or isinstance(x, complex):
                raise
            logger.warning("%s(alpha=%g, x=%g): series gave up, trying quadrature", kind, a, x)

    value, err = _quadrature(kind, a, x, cfg)
    if not (math.isfinite(value) and math.isfinite(err)) or err > max(1e-6 * abs(value), 1e3 * cfg.target_abs_tol, 1e-10):
        raise NonConvergence("wright", f"{kind}(alpha={a}, x={x}) failed on every route (quadrature error {err:.2e})")
    return EvalResult(value, err, Route.QUADRATURE)


@lru_cache(maxsize=8192)
def _cached(kind: str, alpha: float, x, is_complex: bool, cfg: EvalConfig, route):
    # 1.0 and 1+0j hash alike, the flag keeps their results apart
    return _evaluate(kind, as_index(alpha, "wright"), x, cfg, route)


def _dispatch(kind: str, alpha, x, cfg: Optional[EvalConfig], route) -> EvalResult:
    alpha = as_index(alpha, "wright")
    x = _check_x(x)
    cfg = cfg or DEFAULT_CONFIG
    route = Route(route) if route is not None else None
    if CACHE_ENABLED:
        return _cached(kind, alpha.alpha, x, isinstance(x, complex), cfg, route)
    return _evaluate(kind, alpha, x, cfg, route)


def phi(alpha, x, cfg: Optional[EvalConfig] = None, route=None) -> EvalResult:
    return _dispatch("phi", alpha, x, cfg, route)


def psi(alpha, x, cfg: Optional[EvalConfig] = None, route=None) -> EvalResult:
    return _dispatch("psi", alpha, x, cfg, route)


def phi_prime(alpha, x, cfg: Optional[EvalConfig] = None, route=None) -> EvalResult:
    return _dispatch("phi_prime", alpha, x, cfg, route)


def psi_prime(alpha, x, cfg: Optional[EvalConfig] = None, route=None) -> EvalResult:
    return _dispatch("psi_prime", alpha, x, cfg, route)


ZERO_SCAN_STEP = 0.25
ZERO_SCAN_LIMIT = 40.0


@lru_cache(maxsize=64)
def _first_zero(alpha: float) -> float:
    def value(x):
        return phi(alpha, x, route=Route.SERIES).value

    right, f_right = 0.0, value(0.0)
    x = 0.0
    try:
        while x > -ZERO_SCAN_LIMIT:
            x -= ZERO_SCAN_STEP
            fx = value(x)
            if fx == 0.0:
                return x
            if (fx < 0.0) != (f_right < 0.0):
                return float(optimize.brentq(value, x, right, xtol=1e-13, rtol=1e-13))
            right, f_right = x, fx
    except NonConvergence as exc:
        logger.warning("zero scan for alpha=%g stopped at x=%g: %s", alpha, x, exc.detail)
    logger.warning("no zero of Phi_%g found on [-%g, 0]", alpha, ZERO_SCAN_LIMIT)
    return 0.0


def first_zero(alpha) -> float:
    """The zero of Phi_alpha nearest the origin, on the negative axis.

    The Laplace images built from Phi'/Phi and Psi/Phi have their rightmost
    pole here. Returns 0.0 when no sign change shows up before
    x = -ZERO_SCAN_LIMIT.
    """
    return _first_zero(as_index(alpha, "wright").alpha)


# --------------------------------------------------------------------------
# F_alpha
# --------------------------------------------------------------------------

def _f_quadrature(alpha: float, lam: complex, limit: int):
    a = 1.0 + alpha
    rot = cmath.exp(1j * math.pi * alpha / 2.0)

    def exponent(t):
        return -lam * t + rot * t ** a / a

    top = 0.0
    upper = 1.0
    while upper < 1e4:
        level = exponent(upper).real
        top = max(top, level)
        if level - top < -_CUTOFF:
            break
        upper *= 2.0
    freq = abs(rot.imag) * upper ** alpha + abs(lam.imag)
    width = math.pi / (4.0 * max(freq, 1.0))
    re, re_err = _panel_quad(lambda t: cmath.exp(exponent(t) - top).real, upper, width, limit)
    im, im_err = _panel_quad(lambda t: cmath.exp(exponent(t) - top).imag, upper, width, limit)
    scale = math.exp(top)
    return complex(re, im) * scale, (re_err + im_err) * scale


def f_alpha(alpha, lam, cfg: Optional[EvalConfig] = None, route=None) -> EvalResult:
    """F_alpha(lambda) = int_0^inf exp(-lambda t + i^alpha t^(1+alpha)/(1+alpha)) dt."""
    alpha = as_index(alpha, "wright")
    cfg = cfg or DEFAULT_CONFIG
    lam = complex(_check_x(lam))
    if route is None:
        route = Route.SERIES if abs(lam) <= 10.0 else Route.QUADRATURE
    route = Route(route)
    if route is Route.ASYMPTOTIC:
        raise InvalidInput("wright", "f_alpha has no asymptotic route")
    if route is Route.SERIES:
        value, err = f_series(alpha, lam, digits=cfg.digits, max_terms=cfg.max_series_terms)
        return EvalResult(complex(value), err, Route.SERIES)
    value, err = _f_quadrature(alpha.alpha, lam, cfg.quadrature_nodes)
    return EvalResult(value, err, Route.QUADRATURE)


def rotation(alpha) -> complex:
    """i^(-alpha/(1+alpha))"""
    alpha = as_index(alpha, "wright")
    return cmath.exp(-1j * math.pi * alpha.alpha_ratio / 2.0)


def f_identity_residual(alpha, lam, cfg: Optional[EvalConfig] = None) -> float:
    """|F(lambda) - pi i^(-a)(Psi + i Phi)(i^(-a) lambda)| with a = alpha/(1+alpha)."""
    cfg = cfg or DEFAULT_CONFIG
    rot = rotation(alpha)
    z = rot * complex(lam)
    rhs = math.pi * rot * (psi(alpha, z, cfg).value + 1j * phi(alpha, z, cfg).value)
    return abs(f_alpha(alpha, lam, cfg).value - rhs)


# --------------------------------------------------------------------------
# independent oracles
# --------------------------------------------------------------------------

def _airy_line(x: float, derivative: bool) -> float:
    ctx = mp_context()
    with ctx.workdps(30):
        xx = ctx.mpf(x)
        c = ctx.sqrt(max(xx, 1)) if x >= 0 else 1 / (1 + abs(xx))
        g0 = c ** 3 / 3 - c * xx

        def integrand(y):
            w = ctx.mpc(c, y)
            value = ctx.exp(w ** 3 / 3 - w * xx - g0)
            return (w * value).real if derivative else value.real

        upper = ctx.sqrt(_CUTOFF * 1.2 / c)
        pieces = 8 + int(float(upper ** 3 + abs(xx) * upper) / 2)
        total = ctx.quad(integrand, ctx.linspace(0, upper, pieces))
        value = ctx.exp(g0) * total / ctx.pi
        return float(-value if derivative else value)


def airy_reference(x) -> float:
    """Ai(x) by quadrature of the Airy contour integral, never touching phi."""
    x = _check_x(x)
    if isinstance(x, complex):
        raise InvalidInput("wright", "airy_reference takes real x")
    return _airy_line(x, derivative=False)


def airy_prime_reference(x) -> float:
    x = _check_x(x)
    if isinstance(x, complex):
        raise InvalidInput("wright", "airy_prime_reference takes real x")
    return _airy_line(x, derivative=True)


def phi_integral_reference(alpha, x, derivative: bool = False, tol: float = 1e-14) -> float:
    """Phi_alpha(x) (or Phi') from the real-axis integral, alpha < 2 only.

    (1/pi) int_0^inf exp(-sin(pi a/2) z^(1+a)/(1+a)) cos(cos(pi a/2) z^(1+a)/(1+a) - zx) dz
    """
    alpha = as_index(alpha, "wright")
    if alpha.is_brownian:
        raise InvalidInput("wright", "the real-axis integral does not converge absolutely at alpha = 2")
    x = _check_x(x)
    a = alpha.one_plus_alpha
    s = math.sin(math.pi * alpha.alpha / 2.0)
    c = math.cos(math.pi * alpha.alpha / 2.0)
    upper = (a * math.log(10.0 / tol) / s) ** (1.0 / a)
    freq = abs(c) * upper ** alpha.alpha + abs(x)
    width = math.pi / (4.0 * max(freq, 1.0))

    if derivative:
        def integrand(z):
            return z * math.exp(-s * z ** a / a) * math.sin(c * z ** a / a - z * x)
    else:
        def integrand(z):
            return math.exp(-s * z ** a / a) * math.cos(c * z ** a / a - z * x)

    total, _ = _panel_quad(integrand, upper, width, 200)
    return total / math.pi
