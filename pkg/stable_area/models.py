import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .config import DEFAULT_SEED
from .errors import InvalidInput


class StableIndex(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=1, le=2)

    @property
    def one_plus_alpha(self) -> float:
        return 1.0 + self.alpha

    @property
    def alpha_ratio(self) -> float:
        """alpha/(1+alpha)"""
        return self.alpha / (1.0 + self.alpha)

    @property
    def inv_one_plus_alpha(self) -> float:
        return 1.0 / (1.0 + self.alpha)

    @property
    def beta(self) -> float:
        """Time-scaling exponent 1+1/alpha."""
        return 1.0 + 1.0 / self.alpha

    @property
    def is_brownian(self) -> bool:
        return self.alpha == 2.0


def as_index(alpha, module: str = "models") -> StableIndex:
    if isinstance(alpha, StableIndex):
        return alpha
    try:
        return StableIndex(alpha=float(alpha))
    except (ValidationError, TypeError, ValueError):
        raise InvalidInput(module, f"alpha must lie in (1, 2], got {alpha!r}")


def require_below_two(alpha: StableIndex, module: str, what: str) -> None:
    if alpha.alpha >= 2:
        raise InvalidInput(module, f"{what} requires 1 < alpha < 2")


class EvalConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    target_abs_tol: float = Field(default=1e-14, gt=0)
    max_series_terms: int = Field(default=4000, gt=0)
    quadrature_nodes: int = Field(default=200, gt=0)
    asymptotic_switchover: float = Field(default=25.0, gt=0)
    asymptotic_max_terms: int = Field(default=30, gt=0)
    precision_bits: int = Field(default=53, ge=53)

    @property
    def digits(self) -> int:
        return max(17, int(self.precision_bits * math.log10(2)) + 2)


class InversionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["stehfest", "talbot"] = "stehfest"
    node_count: int = Field(default=32, ge=8)
    precision_bits: Optional[int] = Field(default=None, ge=53)
    # None: the first zero of Phi_alpha, found by wright.first_zero
    singularity_abscissa: Optional[float] = Field(default=None, le=0)
    cross_check: bool = False
    cross_check_tol: float = Field(default=1e-6, gt=0)

    def invert_kwargs(self) -> dict:
        # with an explicit precision mpmath picks the degree itself
        if self.precision_bits is not None:
            return {"method": self.method}
        return {"method": self.method, "degree": self.node_count}

    def doubled(self) -> "InversionConfig":
        return self.model_copy(update={"node_count": 2 * self.node_count, "precision_bits": None})


class RunConfig(BaseModel):
    command: Literal["eval", "coeffs", "transform", "invert", "simulate", "validate"]
    alpha: float = Field(default=1.5, gt=1, le=2)
    seed: int = DEFAULT_SEED
    threads: int = Field(default=1, ge=1)
    target_abs_tol: Optional[float] = Field(default=None, gt=0)
    node_count: Optional[int] = Field(default=None, ge=8)
    output_path: Optional[str] = None
    header: bool = True
    options: dict = Field(default_factory=dict)

    def eval_config(self) -> EvalConfig:
        if self.target_abs_tol is None:
            return EvalConfig()
        return EvalConfig(target_abs_tol=self.target_abs_tol)

    def inversion_config(self, method: str = "stehfest") -> InversionConfig:
        if self.node_count is None:
            return InversionConfig(method=method)
        return InversionConfig(method=method, node_count=self.node_count)


class EvalRequest(BaseModel):
    fn: Literal["phi", "psi", "phi_prime", "psi_prime", "f_alpha"]
    alpha: float = Field(gt=1, le=2)
    x: float = 0.0
    x_imag: float = 0.0
    route: Optional[Literal["series", "quadrature", "asymptotic"]] = None


class TransformRequest(BaseModel):
    quantity: Literal[
        "joint", "theorem1", "theorem1_alt", "theorem2", "theorem3", "h_alpha",
        "hitting_density", "mellin_area_T0", "mellin_meander", "mean_ex", "mean_meander",
        "second_moment_ex", "tail_meander", "tail_conditioned",
    ]
    alpha: float = Field(gt=1, le=2)
    lam: float = Field(default=0.0, ge=0)
    mu: float = Field(default=1.0, gt=0)
    z: float = Field(default=1.0, ge=0)
    t: float = Field(default=1.0, gt=0)
    nu: float = 0.2


class InversionRequest(BaseModel):
    law: Literal["excursion", "meander", "conditioned"]
    alpha: float = Field(gt=1, le=2)
    s_values: List[float] = Field(min_length=1, max_length=64)
    method: Literal["stehfest", "talbot"] = "stehfest"
    node_count: int = Field(default=32, ge=8, le=96)

    @field_validator("s_values")
    @classmethod
    def _positive(cls, values):
        if any(not (s > 0 and math.isfinite(s)) for s in values):
            raise ValueError("s values must be positive and finite")
        return values


class SimulationRequest(BaseModel):
    target: Literal["passage", "excursion", "meander", "conditioned", "a1"]
    alpha: float = Field(gt=1, le=2)
    n: int = Field(default=2000, ge=100, le=200_000)
    steps: int = Field(default=200, ge=100, le=5000)
    seed: int = DEFAULT_SEED
    s: float = Field(default=1.0, gt=0)
    z: float = Field(default=1.0, gt=0)
    lam: float = Field(default=0.0, ge=0)
    mu: float = Field(default=1.0, ge=0)
    q: float = Field(default=1.0, gt=0)
