"""Capped-l1 penalty, its DC pieces and the box-constrained piecewise prox.

The capped-l1 function ``phi(t) = min(1, |t|/v)`` is written as a difference
of convex functions ``|t|/v - max(theta_1, theta_2, theta_3)``.  Fixing the
active concave piece per coordinate (the "d-vector") yields a convex surrogate
``Phi^d`` whose proximal operator over a box has a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CappedL1Penalty",
    "BoxConstraint",
    "phi",
    "theta",
    "d_select",
    "phi_d",
    "prox_capped_piece",
]


@dataclass(frozen=True)
class CappedL1Penalty:
    """Penalty ``lam * sum_i min(1, |x_i|/v)``."""

    lam: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not (np.isfinite(self.v) and self.v > 0):
            raise ValueError(f"v must be positive, got {self.v}")

    def satisfies_cap(self, lf: float) -> bool:
        """Whether ``v < lam / lf``, the condition that makes stationary points sparse."""
        return self.v < self.lam / lf

    def value(self, x) -> float:
        return self.lam * float(np.sum(phi(x, self.v)))


class BoxConstraint:
    """Coordinatewise bounds ``lower <= x <= upper`` with ``lower <= 0 <= upper``.

    Infinite bounds are allowed; clamping against them is the identity on
    that side.
    """

    __slots__ = ("lower", "upper")

    def __init__(self, lower, upper):
        lower = np.array(lower, dtype=float).ravel()
        upper = np.array(upper, dtype=float).ravel()
        if lower.shape != upper.shape:
            raise ValueError(
                f"lower and upper differ in length: {lower.size} vs {upper.size}")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lower > 0) or np.any(upper < 0):
            raise ValueError("box must contain the origin (lower <= 0 <= upper)")
        if np.any(lower >= upper):
            raise ValueError("box must satisfy lower < upper coordinatewise")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __setattr__(self, name, value):
        raise AttributeError("BoxConstraint is immutable")

    @classmethod
    def uniform(cls, n: int, lower: float, upper: float) -> "BoxConstraint":
        return cls(np.full(n, lower), np.full(n, upper))

    @property
    def n(self) -> int:
        return self.lower.size

    def project(self, x) -> np.ndarray:
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def __eq__(self, other):
        if not isinstance(other, BoxConstraint):
            return NotImplemented
        return (np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __repr__(self):
        return f"BoxConstraint(lower={self.lower!r}, upper={self.upper!r})"


def _check_v(v):
    if not np.all(np.asarray(v) > 0):
        raise ValueError(f"v must be positive, got {v}")


def phi(t, v):
    """Capped-l1 function ``min(1, |t|/v)``, elementwise."""
    _check_v(v)
    return np.minimum(1.0, np.abs(t) / v)


def theta(piece, t, v):
    """Concave-part pieces: ``0``, ``t/v - 1`` or ``-t/v - 1`` for labels 1, 2, 3."""
    _check_v(v)
    piece = np.asarray(piece)
    if not np.all(np.isin(piece, (1, 2, 3))):
        raise ValueError(f"piece labels must be in {{1, 2, 3}}, got {piece}")
    t = np.asarray(t, dtype=float)
    out = np.where(piece == 2, t / v - 1.0, np.where(piece == 3, -t / v - 1.0, 0.0))
    return out if out.ndim else float(out)


def d_select(x, v) -> np.ndarray:
    """Label of the active concave piece at each coordinate of ``x``.

    ``x_i >= v`` gives 2, ``x_i <= -v`` gives 3, everything else 1.  At
    ``|x_i| == v`` the pieces 1 and 2 (or 3) tie; the nonzero piece wins.
    """
    _check_v(v)
    x = np.asarray(x, dtype=float)
    d = np.ones(x.shape, dtype=np.int8)
    d[x >= v] = 2
    d[x <= -v] = 3
    return d


def phi_d(x, d, v) -> float:
    """Convex surrogate ``sum_i |x_i|/v - theta_{d_i}(x_i)``."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d)
    if x.shape != d.shape:
        raise ValueError(f"x and d differ in shape: {x.shape} vs {d.shape}")
    return float(np.sum(np.abs(x) / v - theta(d, x, v)))


def prox_capped_piece(w, d, tau, v, box: BoxConstraint) -> np.ndarray:
    """Minimize ``tau * phi_d(x, d, v) + 0.5 * ||x - w||^2`` over ``box``.

    The problem separates by coordinate.  The linear piece selected by ``d``
    shifts ``w`` by ``+tau/v`` (label 2) or ``-tau/v`` (label 3), the result
    is soft-thresholded at ``tau/v`` and finally clamped to the box.
    ``tau`` and ``v`` may also be arrays broadcasting against ``w``.
    """
    if not np.all(np.asarray(tau) > 0):
        raise ValueError(f"tau must be positive, got {tau}")
    _check_v(v)
    w = np.asarray(w, dtype=float)
    d = np.asarray(d)
    if w.shape != d.shape or w.ndim != 1 or w.size != box.n:
        raise ValueError(
            f"dimension mismatch: w {w.shape}, d {d.shape}, box n={box.n}")
    thr = tau / v
    shift = np.where(d == 2, thr, np.where(d == 3, -thr, 0.0))
    wt = w + shift
    # |wt| <= thr maps to exactly zero
    h = np.where(wt > thr, wt - thr, np.where(wt < -thr, wt + thr, 0.0))
    return box.project(h)
