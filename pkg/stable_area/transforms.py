"""Closed-form transforms of the area functionals.

Everything that divides or subtracts Wright-function values is computed in
the thread's mpmath context at WORKING_DIGITS; the cancellation in
-lambda H - Phi'/Phi at large lambda eats several digits.
"""
import logging
import math

from scipy import integrate, special

from .coeffs import gamma, loggamma, moment_closed_forms, mp_context, rgamma
from .errors import InvalidInput, NonConvergence, PoleError, QuadratureFailure
from .models import as_index, require_below_two
from .results import TailAsymptotic, TransformPoint
from .wright import evaluate_all

logger = logging.getLogger(__name__)

WORKING_DIGITS = 30
# beyond this lambda the three-term expansion of H is exact to double precision
H_EXPANSION_CUTOFF = 1e6
MELLIN_ENDPOINT_MARGIN = 1e-9
# hitting densities below exp(-50) are reported as 0
DENSITY_FLOOR_EXPONENT = 50.0


def _nonnegative(name: str, value) -> float:
    value = float(value)
    if not (math.isfinite(value) and value >= 0):
        raise InvalidInput("transforms", f"{name} must be finite and >= 0, got {value!r}")
    return value


def _positive(name: str, value) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidInput("transforms", f"{name} must be finite and > 0, got {value!r}")
    return value


def _values(alpha: float, x, ctx):
    phi, dphi, psi, dpsi = evaluate_all(alpha, x, digits=WORKING_DIGITS, ctx=ctx)
    if phi == 0:
        raise PoleError("transforms", f"Phi_{alpha}({float(x):g}) vanishes")
    return phi, dphi, psi, dpsi


# --------------------------------------------------------------------------
# first passage
# --------------------------------------------------------------------------

def joint_laplace_T0_area(alpha, z, lam, mu) -> float:
    """E_z[exp(-lambda T_0 - mu int_0^T_0 L)]."""
    index = as_index(alpha, "transforms")
    z = _nonnegative("z", z)
    lam = _nonnegative("lambda", lam)
    mu = float(mu)
    if not (math.isfinite(mu) and mu > 0):
        raise InvalidInput("transforms", f"mu must be > 0, got {mu!r}")
    if z == 0:
        return 1.0
    ctx = mp_context()
    with ctx.workdps(WORKING_DIGITS):
        a = ctx.mpf(index.alpha) + 1
        m = ctx.mpf(mu)
        upper = m ** (1 / a) * (z + lam / m)
        lower = m ** ((1 - a) / a) * lam
        ratio = _values(index.alpha, upper, ctx)[0] / _values(index.alpha, lower, ctx)[0]
        return float(min(ratio, 1))


def joint_transform_point(alpha, z, lam, mu) -> TransformPoint:
    return TransformPoint(lam=float(lam), mu=float(mu), z=float(z),
                          value=joint_laplace_T0_area(alpha, z, lam, mu))


def area_laplace_from_level(alpha, z, mu) -> float:
    """E_z[exp(-mu int_0^T_0 L)] from its power series in z mu^(1/(1+alpha))."""
    index = as_index(alpha, "transforms")
    z = _nonnegative("z", z)
    mu = _positive("mu", mu)
    a = index.one_plus_alpha
    y = z * mu ** (1.0 / a)
    if y == 0:
        return 1.0
    log_base = math.log(a) / a + math.log(y)
    peak = 0.0
    n = 1
    while True:
        level = (loggamma(1 - (index.alpha - n) / a) - loggamma(n + 1) + n * log_base) / math.log(10)
        peak = max(peak, level)
        if n > 3 and level < -WORKING_DIGITS - 5:
            break
        n += 1
        if n > 20000:
            raise NonConvergence("transforms", f"level series needs more than 20000 terms at z mu^(1/(1+alpha))={y:g}")
    ctx = mp_context()
    with ctx.workdps(WORKING_DIGITS + int(peak) + 10):
        aa = ctx.mpf(index.alpha) + 1
        al = aa - 1
        base = aa ** (1 / aa) * ctx.mpf(y)
        total = ctx.zero
        power = ctx.one
        for k in range(1, n + 1):
            power = -power * base / k
            total += power * ctx.rgamma((al - k) / aa)
        return float(1 + ctx.gamma(al / aa) * total)


def passage_time_laplace(alpha, z, lam) -> float:
    """E_z[exp(-lambda T_0)] = exp(-z lambda^(1/alpha))."""
    index = as_index(alpha, "transforms")
    z = _nonnegative("z", z)
    lam = _nonnegative("lambda", lam)
    return math.exp(-z * lam ** (1.0 / index.alpha))


def mellin_area_T0(alpha, nu) -> float:
    """E_1[(int_0^T_0 L)^nu] for nu < 1/(1+alpha)."""
    index = as_index(alpha, "transforms")
    nu = float(nu)
    a = index.one_plus_alpha
    if not (math.isfinite(nu) and nu < 1.0 / a):
        raise InvalidInput("transforms", f"nu must be < 1/(1+alpha) = {1.0 / a:.6g}, got {nu!r}")
    r = index.alpha_ratio
    return float(a ** nu * gamma(r) * gamma(1 - a * nu) * rgamma(r - nu) * rgamma(1 - nu))


def hitting_density(alpha, z, t) -> float:
    """Density of T_0 under P_z, a positive stable law of index 1/alpha.

    Reduced to z = 1 by the scaling z^-alpha g(t z^-alpha), then summed as a
    series in u^(-1/alpha) with guard digits sized from the largest term.
    """
    index = as_index(alpha, "transforms")
    z = _positive("z", z)
    t = _positive("t", t)
    al = index.alpha
    u = t * z ** (-al)
    y = u ** (-1.0 / al)
    # near t = 0 the density behaves like exp(-kappa y^(alpha/(alpha-1)))
    kappa = (al - 1.0) * al ** (-al / (al - 1.0))
    if kappa * y ** (al / (al - 1.0)) > DENSITY_FLOOR_EXPONENT:
        return 0.0
    log_y = math.log(y)
    peak = -math.inf
    n = 1
    while True:
        level = (loggamma(1 + n / al) - loggamma(n + 1) + n * log_y) / math.log(10)
        peak = max(peak, level)
        if n > 3 and level < min(peak, 0.0) - WORKING_DIGITS - 5:
            break
        n += 1
        if n > 20000:
            raise NonConvergence("transforms", f"hitting density series diverges numerically at t z^-alpha = {u:g}")
    ctx = mp_context()
    with ctx.workdps(WORKING_DIGITS + max(0, int(peak)) + 10):
        aa = ctx.mpf(al)
        yy = ctx.mpf(y)
        total = ctx.zero
        power = ctx.one
        for k in range(1, n + 1):
            power = power * yy / k
            sign = 1 if k % 2 else -1
            total += sign * ctx.sinpi(k / aa) * ctx.gamma(1 + k / aa) * power
        value = total / (ctx.pi * ctx.mpf(u)) * ctx.mpf(z) ** (-aa)
        return max(0.0, float(value))


# --------------------------------------------------------------------------
# theorem right-hand sides
# --------------------------------------------------------------------------

def _log_derivative(alpha: float, lam: float, ctx):
    phi, dphi, _, _ = _values(alpha, lam, ctx)
    return dphi / phi


def theorem1_rhs(alpha, lam) -> float:
    """alpha Gamma(1 - 1/alpha)(Phi'(0)/Phi(0) - Phi'(lambda)/Phi(lambda))"""
    index = as_index(alpha, "transforms")
    lam = _nonnegative("lambda", lam)
    if lam == 0:
        return 0.0
    ctx = mp_context()
    with ctx.workdps(WORKING_DIGITS):
        a = ctx.mpf(index.alpha)
        diff = _log_derivative(index.alpha, 0, ctx) - _log_derivative(index.alpha, lam, ctx)
        return float(a * ctx.gamma(1 - 1 / a) * diff)


def theorem1_alt_rhs(alpha, lam) -> float:
    """Gamma(-1/alpha)(Phi'(lambda)/Phi(lambda) + lambda^(1/alpha))"""
    index = as_index(alpha, "transforms")
    lam = _nonnegative("lambda", lam)
    ctx = mp_context()
    with ctx.workdps(WORKING_DIGITS):
        a = ctx.mpf(index.alpha)
        lead = _log_derivative(index.alpha, lam, ctx) + ctx.mpf(lam) ** (1 / a)
        return float(ctx.gamma(-1 / a) * lead)


def _h(alpha: float, lam, ctx):
    phi, dphi, psi, dpsi = _values(alpha, lam, ctx)
    return ctx.pi * (dpsi * phi - dphi * psi) / phi, dphi / phi


def h_alpha(alpha, lam) -> float:
    """H(lambda) = pi (Psi' Phi - Phi' Psi)/Phi."""
    index = as_index(alpha, "transforms")
    lam = _nonnegative("lambda", lam)
    ctx = mp_context()
    with ctx.workdps(WORKING_DIGITS):
        return float(_h(index.alpha, lam, ctx)[0])


def h_alpha_asymptotic(alpha, lam, terms: int = 3) -> float:
    index = as_index(alpha, "transforms")
    lam = _positive("lambda", lam)
    if terms not in (1, 2, 3):
        raise InvalidInput("transforms", f"the expansion of H has 1 to 3 terms, got {terms}")
    al = index.alpha
    parts = (
        lam ** (1.0 / al - 1.0),
        -(al + 1.0) / (2.0 * al) * lam ** -2.0,
        gamma(1.0 + al) * lam ** (-2.0 - al + 1.0 / al),
    )
    return float(sum(parts[:terms]))


def theorem2_rhs(alpha, lam) -> float:
    index = as_index(alpha, "transforms")
    return float(gamma(1.0 - 1.0 / index.alpha)) * h_alpha(index, lam)


def theorem3_rhs(alpha, lam) -> float:
    """pi lambda (Phi' Psi - Psi' Phi)/Phi - Phi'/Phi, i.e. -lambda H - Phi'/Phi."""
    index = as_index(alpha, "transforms")
    lam = _nonnegative("lambda", lam)
    ctx = mp_context()
    with ctx.workdps(WORKING_DIGITS):
        h, log_derivative = _h(index.alpha, lam, ctx)
        return float(-ctx.mpf(lam) * h - log_derivative)


# --------------------------------------------------------------------------
# moments and tails
# --------------------------------------------------------------------------

def mean_ex(alpha) -> float:
    return moment_closed_forms(alpha)[0]


def second_moment_ex(alpha) -> float:
    return moment_closed_forms(alpha)[1]


def mean_meander(alpha) -> float:
    """Gamma(1 - 1/alpha)(alpha + 1)/(2 alpha)"""
    al = as_index(alpha, "transforms").alpha
    return float(gamma(1.0 - 1.0 / al) * (al + 1.0) / (2.0 * al))


def mean_conditioned_divergence(alpha) -> bool:
    """True when E[A_up] is infinite, which is every alpha < 2."""
    return as_index(alpha, "transforms").alpha < 2.0


def tail_meander(alpha) -> TailAsymptotic:
    index = as_index(alpha, "transforms")
    require_below_two(index, "transforms", "the meander tail constant")
    al = index.alpha
    prefactor = ((al - 1.0) * gamma(1.0 + al) * gamma(1.0 - 1.0 / al)
                 * rgamma(2.0 - al) * rgamma(2.0 + al - 1.0 / al))
    return TailAsymptotic(exponent=-al, prefactor=float(prefactor))


def tail_conditioned(alpha) -> TailAsymptotic:
    index = as_index(alpha, "transforms")
    require_below_two(index, "transforms", "the conditioned tail constant")
    al = index.alpha
    prefactor = gamma(1.0 + al) * rgamma(1.0 + al - 1.0 / al) * rgamma(2.0 - al)
    return TailAsymptotic(exponent=1.0 - al, prefactor=float(prefactor))


# --------------------------------------------------------------------------
# Mellin transform of H
# --------------------------------------------------------------------------

def _check_mellin_nu(al: float, nu) -> float:
    nu = float(nu)
    top = 1.0 - 1.0 / al
    # 1 - 1/1.5 rounds above 1/3, hence the relative margin
    if not (math.isfinite(nu) and 0.0 < nu < top * (1.0 - MELLIN_ENDPOINT_MARGIN)):
        raise InvalidInput("transforms", f"nu must lie in (0, {top:.6g}), got {nu!r}")
    return nu


def _h_expansion_tail(al: float, nu: float, cut: float) -> float:
    """int_cut^inf lambda^(nu-1) H(lambda) dlambda with H replaced by its three-term expansion."""
    powers = (1.0 - 1.0 / al, 2.0, 2.0 + al - 1.0 / al)
    weights = (1.0, -(al + 1.0) / (2.0 * al), float(gamma(1.0 + al)))
    return sum(c * cut ** (nu - q) / (q - nu) for c, q in zip(weights, powers))


def h_mellin_integral(alpha, nu, tol: float = 1e-9):
    """int_0^inf lambda^(nu-1) H(lambda) dlambda for 0 < nu < 1 - 1/alpha.

    (0, 1] is done with lambda = v^(1/nu), [1, H_EXPANSION_CUTOFF] in
    log lambda, and the rest in closed form from the expansion of H.
    """
    index = as_index(alpha, "transforms")
    al = index.alpha
    nu = _check_mellin_nu(al, nu)

    def near(v):
        return h_alpha(al, v ** (1.0 / nu)) / nu

    def middle(y):
        lam = math.exp(y)
        return lam ** nu * h_alpha(al, lam)

    try:
        left, left_err = integrate.quad(near, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
        mid, mid_err = integrate.quad(middle, 0.0, math.log(H_EXPANSION_CUTOFF), epsabs=tol, epsrel=tol, limit=200)
        tail = _h_expansion_tail(al, nu, H_EXPANSION_CUTOFF)
    except ArithmeticError as exc:
        raise QuadratureFailure("transforms", f"Mellin integral of H at nu={nu}: {exc}") from exc
    total = left + mid + tail
    err = left_err + mid_err
    if not math.isfinite(total) or err > 1e-6 * max(1.0, abs(total)):
        raise QuadratureFailure("transforms", f"Mellin integral of H at nu={nu} did not converge (error {err:.2e})")
    return total, err


def mellin_meander_exponent(alpha, nu) -> float:
    al = as_index(alpha, "transforms").alpha
    return (1.0 - al + al * nu) / (1.0 + al)


def mellin_meander(alpha, nu) -> float:
    """E[A_me^((1 - alpha + alpha nu)/(1 + alpha))] from the Mellin transform of H."""
    index = as_index(alpha, "transforms")
    al = index.alpha
    nu = _check_mellin_nu(al, nu)
    integral, _ = h_mellin_integral(index, nu)
    front = al * gamma(nu) * gamma((al - 1.0 - al * nu) / (al + 1.0)) / (1.0 + al)
    return float(gamma(1.0 - 1.0 / al) * integral / front)


# --------------------------------------------------------------------------
# Brownian closed forms
# --------------------------------------------------------------------------

def _airy(x: float) -> float:
    return float(special.airy(x)[0])


def wronskian_airy(lam) -> float:
    """(1/pi) int_lambda^inf Ai, the alpha = 2 value of Psi' Ai - Ai' Psi."""
    lam = float(lam)
    head, _ = integrate.quad(_airy, 0.0, lam, epsabs=1e-14, epsrel=1e-13)
    return (1.0 / 3.0 - head) / math.pi


def theorem3_airy_form(lam) -> float:
    """int_0^inf x Ai(x + lambda) dx / Ai(lambda)"""
    lam = _nonnegative("lambda", lam)
    upper = 40.0
    top, _ = integrate.quad(lambda x: x * _airy(x + lam), 0.0, upper, epsabs=1e-15, epsrel=1e-13, limit=200)
    return top / _airy(lam)
