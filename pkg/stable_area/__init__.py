"""Area functionals of spectrally positive stable processes.

Wright-type special functions Phi_alpha and Psi_alpha, the coefficient
recurrences behind the moments, the closed-form transforms, their numerical
inversion and a Monte Carlo engine that checks all of it.
"""
from .errors import (
    DegenerateWeights,
    HorizonExceeded,
    InsufficientTail,
    InvalidInput,
    InversionUnstable,
    NonConvergence,
    NumericalError,
    PoleError,
    PrecisionLoss,
    QuadratureFailure,
    RejectionBudgetExceeded,
)
from .models import EvalConfig, InversionConfig, RunConfig, StableIndex
from .results import EvalResult, LaplaceCurve, MCEstimate, PathSample, Route, TailAsymptotic, TransformPoint

__version__ = "0.1.0"
