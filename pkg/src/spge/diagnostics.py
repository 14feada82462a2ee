"""Stationarity and recovery diagnostics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .penalty import d_select, prox_capped_piece

__all__ = [
    "SUCCESS_TOL",
    "RecoveryMetrics",
    "proximal_residual",
    "prox_grad_map",
    "lower_bound_check",
    "lifted_stationarity_gap",
    "recovery_metrics",
    "residual_scaling",
    "settle_iteration",
]

SUCCESS_TOL = 0.01


def prox_grad_map(x, mu, oracle, penalty, box, step=1.0, d=None):
    """``prox_{step * lam * Phi^d}(x - step * grad f~(x, mu))`` over the box."""
    x = np.asarray(x, dtype=float)
    if d is None:
        d = d_select(x, penalty.v)
    grad = oracle.gradient(x, mu)
    return prox_capped_piece(x - step * grad, d, step * penalty.lam, penalty.v, box)


def proximal_residual(x, mu, oracle, penalty, box) -> float:
    """Unit-step residual ``||x - prox_{lam Phi^d(x)}(x - grad f~(x, mu))||``."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - prox_grad_map(x, mu, oracle, penalty, box)))


def lower_bound_check(x, v, tol):
    """Every coordinate is (numerically) zero or at least ``v`` in magnitude.

    Returns ``(ok, violating_indices)``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    a = np.abs(np.asarray(x, dtype=float))
    bad = np.flatnonzero((a > tol) & (a < v - tol))
    return bad.size == 0, bad


def lifted_stationarity_gap(x, oracle, penalty, box, mu_probe=1e-4, L=1.0) -> float:
    """Gradient-mapping norm at smoothing level ``mu_probe`` and step ``mu_probe/L``.

    Zero exactly when ``x`` is a fixed point of the prox-gradient map, which
    for small ``mu_probe`` certifies approximate lifted stationarity.
    """
    if not mu_probe > 0:
        raise ValueError(f"mu_probe must be positive, got {mu_probe}")
    step = mu_probe / L
    x = np.asarray(x, dtype=float)
    p = prox_grad_map(x, mu_probe, oracle, penalty, box, step=step)
    return float(np.linalg.norm(x - p)) / step


def residual_scaling(y, z, alpha, penalty, box, d=None):
    """``(p, q)`` with ``q = ||prox_{alpha g}(y - alpha z) - y||`` and ``p = q/alpha``.

    ``g = lam * Phi^d`` restricted to the box.
    """
    y = np.asarray(y, dtype=float)
    if d is None:
        d = d_select(y, penalty.v)
    q = float(np.linalg.norm(
        prox_capped_piece(y - alpha * np.asarray(z), d, alpha * penalty.lam, penalty.v, box) - y))
    return q / alpha, q


@dataclass(frozen=True)
class RecoveryMetrics:
    rel_err: float | None
    success_rate: float | None
    sparsity_rate: float | None
    support_size: int
    iterations: int | None
    wall_clock_s: float | None

    def as_dict(self):
        return asdict(self)


def recovery_metrics(x_out, x_true=None, trace=None) -> RecoveryMetrics:
    """Recovery quality of ``x_out`` against the ground truth.

    ``success_rate`` is the fraction of coordinates within 0.01 of ``x_true``;
    ``sparsity_rate`` the fraction of zero coordinates of ``x_true`` that are
    also zero in ``x_out``.  ``trace`` may be a :class:`SolveResult` or a list
    of iteration records.
    """
    x_out = np.asarray(x_out, dtype=float)
    support_size = int(np.count_nonzero(x_out))
    iterations = wall = None
    if trace is not None:
        recs = getattr(trace, "trace", trace)
        iterations = getattr(trace, "iterations", len(recs))
        wall = getattr(trace, "wall_clock_s", recs[-1].time_s if recs else 0.0)
    if x_true is None:
        return RecoveryMetrics(None, None, None, support_size, iterations, wall)
    x_true = np.asarray(x_true, dtype=float)
    if x_true.shape != x_out.shape:
        raise ValueError(f"shape mismatch: {x_out.shape} vs {x_true.shape}")
    nrm = np.linalg.norm(x_true)
    rel_err = float(np.linalg.norm(x_out - x_true) / nrm) if nrm > 0 else float("nan")
    success = float(np.mean(np.abs(x_out - x_true) <= SUCCESS_TOL))
    zeros = x_true == 0
    sparsity = float(np.mean(x_out[zeros] == 0)) if zeros.any() else 1.0
    return RecoveryMetrics(rel_err, success, sparsity, support_size, iterations, wall)


def settle_iteration(x_history, tol) -> int:
    """First iteration after which every iterate stays within ``tol`` of the last one.

    ``x_history`` has one row per iterate ``x^0, x^1, ...``.
    """
    hist = np.asarray(x_history, dtype=float)
    dist = np.max(np.abs(hist - hist[-1]), axis=1)
    far = np.flatnonzero(dist > tol)
    return 0 if far.size == 0 else int(far[-1] + 1)
