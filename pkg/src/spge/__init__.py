"""Smoothing proximal gradient with extrapolation for capped-l1 sparse regression."""

from .diagnostics import (
    RecoveryMetrics,
    lifted_stationarity_gap,
    lower_bound_check,
    proximal_residual,
    recovery_metrics,
)
from .penalty import (
    BoxConstraint,
    CappedL1Penalty,
    d_select,
    phi,
    phi_d,
    prox_capped_piece,
    theta,
)
from .problems import (
    InstanceParseError,
    ProblemInstance,
    gen_censored,
    gen_l1_regression,
    gen_toy,
    load_instance,
    save_instance,
)
from .smoothing import (
    CensoredLossSmoother,
    L1LossSmoother,
    SmoothingOracle,
    estimate_lf,
    estimate_ltilde,
)
from .solver import (
    DivergenceError,
    SolveResult,
    SolverConfig,
    spg_solve,
    spge_solve,
    spge_step,
)

__version__ = "0.1.0"
