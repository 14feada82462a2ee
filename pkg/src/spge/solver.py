"""Smoothing proximal gradient with extrapolation (SPGE).

Each iteration extrapolates ``y = x^k + beta (x^k - x^{k-1})``, takes a
gradient step on the smoothed loss at ``y`` with stepsize ``mu_k / L`` and
applies the closed-form prox of the capped-l1 surrogate selected at ``x^k``.
The smoothing parameter is frozen while the monitor

    H_k + kappa mu_k = F~(x^{k+1}, mu_k) + tau_k ||x^{k+1} - x^k||^2 + kappa mu_k

drops by at least ``alpha mu_k^2`` per step, and otherwise decays as
``mu_0 / (k+1)^sigma``.  With ``beta_schedule="none"`` this is plain SPG.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .penalty import d_select, prox_capped_piece

__all__ = [
    "BETA_SCHEDULES",
    "SolverConfig",
    "SolverState",
    "IterationRecord",
    "SolveResult",
    "DivergenceError",
    "beta_safe_cap",
    "beta_fista",
    "restart_check",
    "monitor_value",
    "initial_state",
    "spge_step",
    "spge_solve",
    "spg_solve",
]

logger = logging.getLogger(__name__)

BETA_SCHEDULES = (
    "none",
    "safe_cap_max",
    "fista",
    "fista_fixed_restart",
    "fista_adaptive_restart",
)
MONITOR_CONVENTIONS = ("provisional", "lookahead")
DIVERGENCE_NORM = 1e12


class DivergenceError(RuntimeError):
    """Raised when an iterate or gradient stops being finite or blows up."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


@dataclass(frozen=True)
class SolverConfig:
    """Algorithm knobs.

    ``L`` scales the stepsize ``mu/L``; the descent analysis wants
    ``L >= ltilde`` of the smoothing oracle but smaller values are allowed
    (a warning is logged).  ``kappa=None`` takes the oracle's constant.
    ``restart_resets_mu=None`` resets mu on fixed restarts only.
    """

    L: float = 1.0
    alpha: float = 1.0
    sigma: float = 0.9
    mu0: float = 0.1
    epsilon: float = 1e-3
    maxiter: int = 10_000
    a: float = 1e-4
    beta_schedule: str = "safe_cap_max"
    restart_period: int = 500
    restart_resets_mu: bool | None = None
    kappa: float | None = None
    monitor_convention: str = "provisional"
    track_residual: bool = True

    def __post_init__(self):
        def bad(name, why):
            raise ValueError(f"{name}: {why} (got {getattr(self, name)!r})")

        for name in ("L", "alpha", "mu0", "epsilon"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                bad(name, "must be a positive finite number")
        if not 0 < self.sigma < 1:
            bad("sigma", "must lie in (0, 1)")
        if not 0 < self.a < 1:
            bad("a", "must lie in (0, 1)")
        if not isinstance(self.maxiter, (int, np.integer)) or self.maxiter < 1:
            bad("maxiter", "must be a positive integer")
        if self.beta_schedule not in BETA_SCHEDULES:
            bad("beta_schedule", f"must be one of {BETA_SCHEDULES}")
        if not isinstance(self.restart_period, (int, np.integer)) or self.restart_period < 1:
            bad("restart_period", "must be a positive integer")
        if self.kappa is not None and not self.kappa > 0:
            bad("kappa", "must be positive")
        if self.monitor_convention not in MONITOR_CONVENTIONS:
            bad("monitor_convention", f"must be one of {MONITOR_CONVENTIONS}")

    @property
    def resets_mu(self) -> bool:
        if self.restart_resets_mu is not None:
            return self.restart_resets_mu
        return self.beta_schedule == "fista_fixed_restart"

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class SolverState:
    """Rolling state entering iteration ``k``.

    ``smoothed_prev`` is ``F~(x^k, mu_{k-1})`` and ``step_sq_prev`` is
    ``||x^k - x^{k-1}||^2``; together with the beta chosen at iteration
    ``k`` they give the previous monitor value exactly.
    """

    k: int
    x_prev: np.ndarray
    x_cur: np.ndarray
    mu_prev: float
    mu_cur: float
    t_prev: float
    y_prev: np.ndarray | None
    smoothed_prev: float
    step_sq_prev: float
    d_cur: np.ndarray
    monitor_prev: float = float("nan")


@dataclass
class IterationRecord:
    """Metrics of iteration ``k`` (the map ``x^k -> x^{k+1}``).

    ``objective`` and ``nnz`` describe ``x^{k+1}``; ``residual`` is the
    unit-step proximal residual of ``x^k`` at ``mu_k``.  ``monitor`` is the
    exact ``H_k + kappa mu_k`` and is filled in once ``beta_k`` and
    ``mu_{k+1}`` are known; ``monitor_provisional`` is the value the
    smoothing-parameter test used.
    """

    k: int
    mu: float
    beta: float
    objective: float
    smoothed_objective: float
    monitor: float
    step_norm: float
    residual: float
    nnz: int
    time_s: float
    monitor_provisional: float = float("nan")
    mu_next: float = float("nan")
    restarted: bool = False
    mu_decreased: bool = False
    step_sq: float = float("nan")

    CSV_COLUMNS = ("k", "mu", "beta", "objective", "smoothed_objective", "monitor",
                   "step_norm", "residual", "nnz", "time_s")


@dataclass
class SolveResult:
    x_final: np.ndarray
    trace: list[IterationRecord]
    termination_reason: str
    iterations: int
    mu_final: float
    wall_clock_s: float
    initial_monitor: float = float("nan")
    x_history: np.ndarray | None = field(default=None, repr=False)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self.trace])


def beta_safe_cap(mu_prev, mu_cur, a) -> float:
    """Largest admissible momentum ``sqrt((1 - a r) r)`` with ``r = mu_cur/mu_prev``."""
    if not (mu_prev > 0 and mu_cur > 0):
        raise ValueError("smoothing parameters must be positive")
    r = mu_cur / mu_prev
    if r > 1.0:
        raise ValueError(f"mu must be nonincreasing, got ratio {r}")
    return math.sqrt(max(0.0, (1.0 - a * r) * r))


def beta_fista(t_prev, mu_prev, mu_cur):
    """s-FISTA momentum: returns ``(t_new, beta)``."""
    t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * (mu_prev / mu_cur) * t_prev * t_prev))
    return t_new, (t_prev - 1.0) / t_new


def restart_check(mode, period, k, y_prev, x_cur, x_prev) -> bool:
    """Whether the momentum should be restarted at iteration ``k``.

    ``mode`` is ``"fixed"`` (every ``period`` iterations) or ``"adaptive"``
    (restart when ``<y^{k-1} - x^k, x^k - x^{k-1}> > 0``).
    """
    if mode == "fixed":
        return k > 0 and k % period == 0
    if mode == "adaptive":
        if y_prev is None:
            return False
        return float(np.dot(y_prev - x_cur, x_cur - x_prev)) > 0.0
    raise ValueError(f"unknown restart mode {mode!r}")


def monitor_value(x_next, x_cur, mu_k, beta_k, mu_next, oracle, penalty, L, kappa=0.0):
    """``F~(x_next, mu_k) + tau ||x_next - x_cur||^2 + kappa mu_k``.

    ``tau = L/(4 mu_k) + L beta_k^2 / (4 mu_next)``.  The solver's
    provisional convention passes ``beta_k = beta_{k-1}`` and
    ``mu_next = mu_k``.
    """
    smoothed = oracle.value(x_next, mu_k) + penalty.value(x_next)
    diff = np.asarray(x_next, dtype=float) - np.asarray(x_cur, dtype=float)
    return _monitor(smoothed, float(diff @ diff), mu_k, beta_k, mu_next, L, kappa)


def _monitor(smoothed, step_sq, mu, beta, mu_next, L, kappa):
    tau = L / (4.0 * mu) + L * beta * beta / (4.0 * mu_next)
    return smoothed + tau * step_sq + kappa * mu


def _choose_beta(config, k, t_prev, mu_prev, mu_cur, y_prev, x_cur, x_prev):
    """Momentum for iteration ``k``: returns ``(beta, t_new, restarted)``."""
    sched = config.beta_schedule
    if sched == "none":
        return 0.0, t_prev, False
    cap = beta_safe_cap(mu_prev, mu_cur, config.a)
    if sched == "safe_cap_max":
        return cap, t_prev, False
    restarted = False
    if sched == "fista_fixed_restart":
        restarted = restart_check("fixed", config.restart_period, k, y_prev, x_cur, x_prev)
    elif sched == "fista_adaptive_restart":
        restarted = restart_check("adaptive", config.restart_period, k, y_prev, x_cur, x_prev)
    if restarted:
        t_prev = 1.0
        if config.resets_mu:
            mu_prev = mu_cur = config.mu0
            cap = beta_safe_cap(mu_prev, mu_cur, config.a)
    t_new, beta = beta_fista(t_prev, mu_prev, mu_cur)
    return min(beta, cap), t_new, restarted


def initial_state(problem, config: SolverConfig, x0=None) -> SolverState:
    box = problem.box
    if x0 is None:
        x0 = getattr(problem, "x0", None)
    if x0 is None:
        x0 = np.zeros(box.n)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != box.n:
        raise ValueError(f"x0 has length {x0.size}, expected {box.n}")
    if not box.contains(x0):
        logger.info("initial point is infeasible; projecting onto the box")
    x0 = box.project(x0)
    smoothed = problem.oracle.value(x0, config.mu0) + problem.penalty.value(x0)
    kappa = _kappa(problem, config)
    return SolverState(
        k=0, x_prev=x0, x_cur=x0, mu_prev=config.mu0, mu_cur=config.mu0,
        t_prev=1.0, y_prev=None, smoothed_prev=smoothed, step_sq_prev=0.0,
        d_cur=d_select(x0, problem.penalty.v),
        monitor_prev=smoothed + kappa * config.mu0,
    )


def _kappa(problem, config):
    return config.kappa if config.kappa is not None else problem.oracle.kappa


def spge_step(state: SolverState, problem, config: SolverConfig):
    """One SPGE iteration; returns ``(new_state, record)``.

    ``record.monitor`` is left as NaN; :func:`spge_solve` fills it in once
    the next momentum is known.
    """
    oracle, penalty, box = problem.oracle, problem.penalty, problem.box
    L, k = config.L, state.k
    kappa = _kappa(problem, config)

    beta, t_new, restarted = _choose_beta(
        config, k, state.t_prev, state.mu_prev, state.mu_cur,
        state.y_prev, state.x_cur, state.x_prev)
    x_cur = state.x_cur
    mu_prev, mu_cur = state.mu_prev, state.mu_cur
    if restarted and config.resets_mu:
        # fresh start from x^k: x^{-1} = x^0, mu_{-1} = mu_0 = mu0
        mu_prev = mu_cur = config.mu0
        x_prev = x_cur
        prev_monitor = oracle.value(x_cur, mu_cur) + penalty.value(x_cur) + kappa * mu_cur
    else:
        x_prev = state.x_prev
        prev_monitor = _monitor(state.smoothed_prev, state.step_sq_prev,
                                mu_prev, beta, mu_cur, L, kappa)

    d = d_select(x_cur, penalty.v)
    y = x_cur + beta * (x_cur - x_prev) if beta != 0.0 else x_cur
    grad_y = oracle.gradient(y, mu_cur)
    if not np.all(np.isfinite(grad_y)):
        raise DivergenceError(f"non-finite gradient at iteration {k}; check L", k)
    residual = float("nan")
    if config.track_residual:
        if y is x_cur:
            grad_x = grad_y
        else:
            grad_x = oracle.gradient(x_cur, mu_cur)
        p = prox_capped_piece(x_cur - grad_x, d, penalty.lam, penalty.v, box)
        residual = float(np.linalg.norm(x_cur - p))

    step = mu_cur / L
    x_next = prox_capped_piece(y - step * grad_y, d, penalty.lam * step, penalty.v, box)
    if not np.all(np.isfinite(x_next)) or np.linalg.norm(x_next) > DIVERGENCE_NORM:
        raise DivergenceError(f"iterate diverged at iteration {k}; check L", k)

    f_next = oracle.value(x_next, mu_cur)
    pen_next = penalty.value(x_next)
    smoothed_next = f_next + pen_next
    diff = x_next - x_cur
    step_sq = float(diff @ diff)

    if config.monitor_convention == "provisional":
        beta_k, mu_k_next = beta, mu_cur
    else:
        # beta_k as the schedule would pick it if the test passes (mu frozen)
        beta_k, _, _ = _choose_beta(config, k + 1, t_new, mu_cur, mu_cur,
                                    y, x_next, x_cur)
        mu_k_next = mu_cur
    cur_monitor = _monitor(smoothed_next, step_sq, mu_cur, beta_k, mu_k_next, L, kappa)

    passed = cur_monitor - prev_monitor <= -config.alpha * mu_cur * mu_cur
    mu_next = mu_cur if passed else config.mu0 / (k + 1) ** config.sigma

    record = IterationRecord(
        k=k, mu=mu_cur, beta=beta,
        objective=oracle.exact_value(x_next) + pen_next,
        smoothed_objective=smoothed_next,
        monitor=float("nan"),
        step_norm=math.sqrt(step_sq),
        residual=residual,
        nnz=int(np.count_nonzero(x_next)),
        time_s=0.0,
        monitor_provisional=cur_monitor,
        mu_next=mu_next,
        restarted=restarted,
        mu_decreased=not passed,
        step_sq=step_sq,
    )
    new_state = SolverState(
        k=k + 1, x_prev=x_cur, x_cur=x_next, mu_prev=mu_cur, mu_cur=mu_next,
        t_prev=t_new, y_prev=y, smoothed_prev=smoothed_next, step_sq_prev=step_sq,
        d_cur=d_select(x_next, penalty.v), monitor_prev=cur_monitor,
    )
    return new_state, record


def _warn_small_L(problem, config):
    try:
        lt = problem.oracle.ltilde
    except (AttributeError, NotImplementedError):
        return
    if config.L < lt:
        msg = (f"L={config.L:.4g} is below the gradient-Lipschitz estimate "
               f"{lt:.4g}; the monitor may fail to decrease")
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def spge_solve(problem, config: SolverConfig, x0=None, keep_history=False) -> SolveResult:
    """Run SPGE until ``k >= maxiter`` or ``mu_k <= epsilon``.

    ``problem`` must expose ``oracle``, ``penalty`` and ``box`` (and
    optionally ``x0``).  ``termination_reason`` is ``"mu_threshold"`` or
    ``"maxiter"``.
    """
    _warn_small_L(problem, config)
    kappa = _kappa(problem, config)
    with np.errstate(over="ignore", invalid="ignore"):
        state = initial_state(problem, config, x0)
    trace: list[IterationRecord] = []
    history = [state.x_cur] if keep_history else None
    start = time.perf_counter()
    initial_monitor = state.monitor_prev

    reason = "maxiter"
    while True:
        if state.mu_cur <= config.epsilon:
            reason = "mu_threshold"
            break
        if state.k >= config.maxiter:
            reason = "maxiter"
            break
        # overflow surfaces as DivergenceError, not as numpy warnings
        with np.errstate(over="ignore", invalid="ignore"):
            state, rec = spge_step(state, problem, config)
        rec.time_s = time.perf_counter() - start
        trace.append(rec)
        if history is not None:
            history.append(state.x_cur)
    elapsed = time.perf_counter() - start

    _finalize_monitors(trace, state, problem, config, kappa)
    return SolveResult(
        x_final=state.x_cur,
        trace=trace,
        termination_reason=reason,
        iterations=state.k,
        mu_final=state.mu_cur,
        wall_clock_s=elapsed,
        initial_monitor=initial_monitor,
        x_history=np.array(history) if history is not None else None,
    )


def _finalize_monitors(trace, state, problem, config, kappa):
    """Fill ``monitor`` with ``H_k + kappa mu_k`` using the realized ``beta_k``."""
    if not trace:
        return
    L = config.L
    last_beta, _, _ = _choose_beta(config, state.k, state.t_prev, state.mu_prev,
                                   state.mu_cur, state.y_prev, state.x_cur, state.x_prev)
    for i, rec in enumerate(trace):
        beta_k = trace[i + 1].beta if i + 1 < len(trace) else last_beta
        rec.monitor = _monitor(rec.smoothed_objective, rec.step_sq,
                               rec.mu, beta_k, rec.mu_next, L, kappa)


def spg_solve(problem, config: SolverConfig, x0=None, keep_history=False) -> SolveResult:
    """SPG baseline: SPGE with zero momentum."""
    return spge_solve(problem, replace(config, beta_schedule="none"), x0, keep_history)
