import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional, Union

import numpy as np


class Route(str, Enum):
    SERIES = "series"
    QUADRATURE = "quadrature"
    ASYMPTOTIC = "asymptotic"


Law = Literal["excursion", "meander", "conditioned"]


@dataclass(frozen=True)
class EvalResult:
    value: Union[float, complex]
    abs_error_estimate: float
    route: Route

    def __post_init__(self):
        if not math.isfinite(self.abs_error_estimate) or self.abs_error_estimate < 0:
            raise ValueError(f"bad error estimate {self.abs_error_estimate!r}")

    def agrees_with(self, other: "EvalResult", slack: float = 0.0) -> bool:
        bound = self.abs_error_estimate + other.abs_error_estimate + slack
        return abs(self.value - other.value) <= bound

    def as_dict(self):
        value = self.value
        if isinstance(value, complex):
            value = {"real": value.real, "imag": value.imag}
        return {"value": value, "abs_error_estimate": self.abs_error_estimate, "route": self.route.value}


@dataclass(frozen=True)
class TransformPoint:
    lam: float
    mu: float
    z: float
    value: float


@dataclass(frozen=True)
class TailAsymptotic:
    exponent: float
    prefactor: float

    def survival(self, x: float) -> float:
        return self.prefactor * x ** self.exponent


@dataclass
class LaplaceCurve:
    s_grid: np.ndarray
    values: np.ndarray
    law: Law
    errors: Optional[np.ndarray] = None

    def is_monotone(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.diff(self.values) <= tol))


@dataclass
class PathSample:
    dt: float
    values: np.ndarray
    area: float
    t_hit: Optional[float] = None


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n: int
    seed: int
    truncated: int = 0
    tail_bound: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("an estimate needs at least one sample")
        if not self.stderr >= 0:
            raise ValueError(f"bad standard error {self.stderr!r}")

    def z_score(self, target: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.stderr

    @classmethod
    def from_values(cls, values, seed: int, **kwargs) -> "MCEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean=float(values.mean()), stderr=stderr, n=int(n), seed=seed, **kwargs)

    def as_dict(self):
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
            "seed": self.seed,
            "truncated": self.truncated,
            "tail_bound": self.tail_bound,
        }
