"""Coefficient families behind the moment recurrences and the large-x expansions.

The table holds the Bell-type triangle B[n][k], the expansion coefficients
c[p], d[p] of Phi_alpha and Phi'_alpha, the moment sequence Omega[n] and the
negative-moment sequence Delta[n]. Rows are grown on demand. Numbers are
plain floats, mpmath floats of a private context (extended precision) or
``Fraction`` (exact mode, rational alpha).

This module is also the Gamma layer of the package: every other module calls
``gamma``/``rgamma``/``loggamma`` from here.
"""
import logging
import math
import threading
import warnings
from collections import OrderedDict
from fractions import Fraction

import numpy as np
from mpmath.ctx_mp import MPContext
from scipy import special

from .config import CACHE_ENABLED
from .errors import InvalidInput, PrecisionLoss
from .models import StableIndex, as_index

logger = logging.getLogger(__name__)

EXTENDED_BITS = 256
WIDE_BITS = 512

_local = threading.local()


def mp_context() -> MPContext:
    """The calling thread's private mpmath context."""
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = MPContext()
        _local.ctx = ctx
    return ctx


def _is_mp(x) -> bool:
    return hasattr(x, "_mpf_") or hasattr(x, "_mpc_")


def gamma(x):
    if _is_mp(x):
        return x.context.gamma(x)
    if isinstance(x, Fraction):
        x = float(x)
    return special.gamma(x)


def rgamma(x):
    """1/Gamma(x); zero at the poles."""
    if _is_mp(x):
        return x.context.rgamma(x)
    if isinstance(x, Fraction):
        x = float(x)
    return special.rgamma(x)


def loggamma(x):
    """log|Gamma(x)| for real x."""
    if _is_mp(x):
        return x.context.log(abs(x.context.gamma(x)))
    return special.gammaln(float(x))


def pochhammer(x, n: int):
    """Rising factorial (x)_n = x(x+1)...(x+n-1), (x)_0 = 1."""
    result = x * 0 + 1
    for j in range(n):
        result = result * (x + j)
    return result


def half_pochhammer(m: int, one=1.0):
    """(1/2)_m = Gamma(m+1/2)/sqrt(pi), exact when ``one`` is a Fraction."""
    half = one / 2
    result = one
    for j in range(m):
        result = result * (half + j)
    return result


def auto_bits(n: int) -> int:
    if n <= 15:
        return 53
    if n <= 40:
        return EXTENDED_BITS
    return WIDE_BITS


def _exact_alpha(alpha) -> Fraction:
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, StableIndex):
        alpha = alpha.alpha
    if isinstance(alpha, str):
        return Fraction(alpha)
    return Fraction(str(float(alpha)))


class CoefficientTable:
    """Lazily extended coefficient arrays for one alpha at one precision.

    Growth is single-writer under a lock; rows already computed never change,
    so snapshots handed out through the properties are safe to share.
    """

    def __init__(self, alpha, precision_bits: int = 53, exact: bool = False):
        if exact:
            rational = _exact_alpha(alpha)
            self.alpha = as_index(float(rational), "coeffs")
            self._a = rational
            self._convert = Fraction
            self._ctx = None
        else:
            self.alpha = as_index(alpha, "coeffs")
            if precision_bits > 53:
                self._ctx = MPContext()
                self._ctx.prec = precision_bits
                self._convert = self._ctx.mpf
            else:
                self._ctx = None
                self._convert = float
            self._a = self._convert(self.alpha.alpha)
        self.exact = exact
        self.precision_bits = precision_bits
        self._one = self._convert(1)
        self._lock = threading.RLock()
        self._poch = [None, self._one]
        self._B = [[]]
        self._c = [self._one]
        self._d = [self._one]
        self._omega = [None]
        self._delta = [None]

    def __repr__(self):
        mode = "exact" if self.exact else f"{self.precision_bits} bits"
        return f"CoefficientTable(alpha={self.alpha.alpha}, {mode}, rows={len(self._B) - 1})"

    # read-only snapshots
    @property
    def B(self):
        return tuple(tuple(row) for row in self._B[1:])

    @property
    def c(self):
        return tuple(self._c)

    @property
    def d(self):
        return tuple(self._d)

    @property
    def omega(self):
        return tuple(self._omega[1:])

    @property
    def delta(self):
        return tuple(self._delta[1:])

    def _num(self, value):
        return self._convert(value)

    def _grow_B(self, n: int) -> None:
        a = self._a
        while len(self._B) <= n:
            m = len(self._B)
            while len(self._poch) <= m:
                j = len(self._poch)
                # (2-a)_{j-1} from (2-a)_{j-2}
                self._poch.append(self._poch[-1] * (2 - a + (j - 2)))
            row = [None, self._poch[m] / ((m + 1) * (m + 2))]
            for k in range(1, m):
                total = self._num(0)
                for l in range(k, m):
                    total = total + math.comb(m, l) * self._B[m - l][1] * self._B[l][k]
                row.append(total / (k + 1))
            self._B.append(row)

    def bell_B(self, n: int, k: int):
        if n < 1 or k < 1 or k > n:
            raise InvalidInput("coeffs", f"B[n][k] needs 1 <= k <= n, got n={n}, k={k}")
        with self._lock:
            self._grow_B(n)
            return self._B[n][k]

    def c_p(self, p: int):
        if p < 0:
            raise InvalidInput("coeffs", f"p must be >= 0, got {p}")
        with self._lock:
            a = self._a
            while len(self._c) <= p:
                q = len(self._c)
                self._grow_B(2 * q)
                total = self._num(0)
                scale = 2 * (a - 1)
                power = self._one
                for k in range(1, 2 * q + 1):
                    power = power * scale
                    total = total + self._B[2 * q][k] * half_pochhammer(q + k, self._one) * power
                self._c.append(total * (2 / a) ** q / math.factorial(2 * q))
            return self._c[p]

    def d_p(self, p: int):
        if p < 0:
            raise InvalidInput("coeffs", f"p must be >= 0, got {p}")
        with self._lock:
            a = self._a
            while len(self._d) <= p:
                q = len(self._d)
                factor = ((2 * q - 1) * (a + 1) - 2) / (2 * a)
                self._d.append(self.c_p(q) - self.c_p(q - 1) * factor)
            return self._d[p]

    def _check_cancellation(self, name: str, n: int, positive, result) -> None:
        if self.exact or result == 0:
            return
        lost = math.log2(abs(float(positive) / float(result))) if float(result) else float("inf")
        if lost > self.precision_bits / 2:
            warnings.warn(
                PrecisionLoss(f"{name}[{n}] lost {lost:.0f} of {self.precision_bits} bits; use a wider table"),
                stacklevel=3,
            )

    def omega_n(self, n: int):
        if n < 1:
            raise InvalidInput("coeffs", f"n must be >= 1, got {n}")
        with self._lock:
            a = self._a
            while len(self._omega) <= n:
                m = len(self._omega)
                lead = self.c_p(m - 1) * (((2 * m - 1) * (a + 1) - 2) / (2 * a))
                total = self._num(0)
                for k in range(1, m):
                    total = total + self._omega[k] * self.c_p(m - k)
                value = lead - total
                self._check_cancellation("omega", m, lead, value)
                self._omega.append(value)
            return self._omega[n]

    def _require_inexact(self, what: str) -> None:
        if self.exact:
            raise InvalidInput("coeffs", f"{what} involves Gamma values; use a float or extended table")

    def moment_ex(self, n: int):
        """E[A_ex^n] from Omega_n."""
        self._require_inexact("moment_ex")
        a = self._a
        omega = self.omega_n(n)
        return (math.factorial(n) * a * gamma(1 - 1 / a) * omega
                * rgamma((n - 1) * (a + 1) / a + 1))

    def delta_n(self, n: int):
        if n < 1:
            raise InvalidInput("coeffs", f"n must be >= 1, got {n}")
        self._require_inexact("delta_n")
        with self._lock:
            a = self._a
            g = gamma(a / (a + 1))
            front = (1 + 1 / a) * gamma(-1 / a)
            rg1 = rgamma((a - 1) / (a + 1))
            while len(self._delta) <= n:
                m = len(self._delta)
                rhs = front * (g * rgamma((a - 1 - m) / (a + 1))
                               - g * g * rg1 * rgamma((a - m) / (a + 1)))
                total = self._num(0)
                for k in range(1, m):
                    total = total + math.comb(m, k) * self._delta[m - k] * g * rgamma((a - k) / (a + 1))
                value = rhs - total
                self._check_cancellation("delta", m, abs(rhs) + abs(total), value)
                self._delta.append(value)
            return self._delta[n]

    def neg_moment_ex(self, n: int):
        """E[A_ex^((1 - alpha n)/(alpha + 1))] from Delta_n."""
        a = self._a
        delta = self.delta_n(n)
        return delta * (1 + a) ** ((n + 1) / (1 + a)) * rgamma((a * n - 1) / (a + 1))


# least recently used tables are dropped past this many
MAX_TABLES = 64
_TABLES: "OrderedDict[tuple, CoefficientTable]" = OrderedDict()
_TABLES_LOCK = threading.Lock()


def coefficient_table(alpha, precision_bits: int = 53, exact: bool = False) -> CoefficientTable:
    if exact:
        key = (_exact_alpha(alpha), "exact")
    else:
        key = (float(as_index(alpha, "coeffs").alpha).hex(), max(53, precision_bits))
    if not CACHE_ENABLED:
        return CoefficientTable(alpha, precision_bits, exact)
    with _TABLES_LOCK:
        table = _TABLES.get(key)
        if table is None:
            table = CoefficientTable(alpha, max(53, precision_bits), exact)
            _TABLES[key] = table
            logger.debug("new coefficient table %r", table)
            while len(_TABLES) > MAX_TABLES:
                _TABLES.popitem(last=False)
        else:
            _TABLES.move_to_end(key)
        return table


def _value(x, exact: bool):
    return x if exact else float(x)


def bell_B(alpha, n: int, k: int, exact: bool = False):
    return _value(coefficient_table(alpha, auto_bits(n), exact).bell_B(n, k), exact)


def c_p(alpha, p: int, exact: bool = False):
    return _value(coefficient_table(alpha, auto_bits(2 * p), exact).c_p(p), exact)


def d_p(alpha, p: int, exact: bool = False):
    return _value(coefficient_table(alpha, auto_bits(2 * p), exact).d_p(p), exact)


def omega_n(alpha, n: int, exact: bool = False):
    return _value(coefficient_table(alpha, auto_bits(n), exact).omega_n(n), exact)


def moment_ex(alpha, n: int) -> float:
    return float(coefficient_table(alpha, auto_bits(n)).moment_ex(n))


def delta_n(alpha, n: int) -> float:
    return float(coefficient_table(alpha, auto_bits(n)).delta_n(n))


def neg_moment_ex(alpha, n: int) -> float:
    return float(coefficient_table(alpha, auto_bits(n)).neg_moment_ex(n))


def moment_closed_forms(alpha):
    """(E[A_ex], E[A_ex^2]) in closed form."""
    a = as_index(alpha, "coeffs").alpha
    first = (a - 1) / 2 * gamma(1 - 1 / a)
    second = gamma(1 - 1 / a) * (a - 1) * (2 * a + 1) / 12 * rgamma(1 + 1 / a)
    return float(first), float(second)


def growth_check_c(alpha, n_max: int) -> np.ndarray:
    if n_max < 5:
        raise InvalidInput("coeffs", f"n_max must be >= 5, got {n_max}")
    table = coefficient_table(alpha, auto_bits(2 * n_max))
    out = []
    for n in range(1, n_max + 1):
        c = table.c_p(n)
        root = c ** (table._one / n) if table._ctx is not None else float(c) ** (1.0 / n)
        out.append(float(root) / n)
    return np.array(out)


def bell_bound_violations(alpha, n_max: int):
    """Pairs (n, k) where B[n][k]/n! exceeds (1/4)^k/k!."""
    table = coefficient_table(alpha, auto_bits(n_max))
    bad = []
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            lhs = table.bell_B(n, k) / math.factorial(n)
            if lhs > table._one / (4 ** k * math.factorial(k)):
                bad.append((n, k))
    return bad


def c_lower_bound(alpha, n: int) -> float:
    """The last (k = 2n) term of c_n on its own, with B[2n][2n] = 6^(-2n)."""
    table = coefficient_table(alpha, auto_bits(2 * n))
    a = table._a
    one = table._one
    term = (2 / a) ** n * half_pochhammer(3 * n, one) * (2 * (a - 1)) ** (2 * n)
    return float(term / (math.factorial(2 * n) * 36 ** n))


def closed_form_c_brownian(n: int, exact: bool = True):
    """c_n at alpha = 2: (1/2)_{3n} / ((2n)! 9^n)."""
    one = Fraction(1) if exact else 1.0
    value = half_pochhammer(3 * n, one) / (math.factorial(2 * n) * 9 ** n)
    return value
