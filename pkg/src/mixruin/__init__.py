"""Ruin probabilities for surplus processes with mixed Poisson premium and claim arrivals."""

from .adjustment import AdjustmentResult, adjustment_exponential, adjustment_general, lundberg_bound
from .closedform import ruin_prob_conditional, ruin_prob_mixed
from .errors import (
    InfiniteSecondMoment,
    MixRuinError,
    NetProfitViolated,
    NoAdjustmentCoefficient,
    NoConvergence,
    NoMGF,
    NotApplicable,
    OutsideConvergenceStrip,
    UnsupportedJumpLaw,
)
from .kernels import (
    ConditionalModel,
    SignedKernel,
    TiltedKernel,
    build_signed_kernel,
    build_tilted_kernel,
    conditional_model,
    mgf_balance,
)
from .model import (
    Degenerate,
    Discrete,
    Empirical,
    Exponential,
    Gamma,
    IndependentGamma,
    ModelSpec,
    Pareto,
    mean_surplus,
    net_profit_margin,
    var_surplus,
)
from .renewal_solver import SolverGrid, SolverSolution, solve_renewal, verify_tilt_identity

__version__ = "0.1.0"
