"""Smoothed surrogates of nonsmooth convex regression losses.

A smoothing oracle exposes ``value(x, mu)`` and ``gradient(x, mu)`` of a
differentiable family that converges to the exact loss as ``mu -> 0``, with
the two constants the solver needs: ``kappa`` bounds the smoothing gap
``|f~(x, mu) - f(x)| <= kappa * mu`` and ``ltilde / mu`` bounds the Lipschitz
constant of the gradient.
"""

from __future__ import annotations

import abc

import numpy as np

__all__ = [
    "theta_tilde",
    "theta_tilde_prime",
    "plus_tilde",
    "plus_tilde_prime",
    "SmoothingOracle",
    "L1LossSmoother",
    "CensoredLossSmoother",
    "l1_value_grad",
    "censored_value_grad",
    "estimate_lf",
    "estimate_ltilde",
]


def _check_mu(mu):
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")


def theta_tilde(s, mu):
    """Huber-type smoothing of ``|s|``: ``s^2/(2 mu) + mu/2`` on ``|s| <= mu``."""
    _check_mu(mu)
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    out = np.where(a > mu, a, s * s / (2.0 * mu) + 0.5 * mu)
    return out if out.ndim else float(out)


def theta_tilde_prime(s, mu):
    _check_mu(mu)
    s = np.asarray(s, dtype=float)
    out = np.where(np.abs(s) > mu, np.sign(s), s / mu)
    return out if out.ndim else float(out)


def plus_tilde(s, mu):
    """Smoothing of ``max(s, 0)``: ``(s + mu)^2 / (4 mu)`` on ``|s| <= mu``."""
    _check_mu(mu)
    s = np.asarray(s, dtype=float)
    out = np.where(np.abs(s) > mu, np.maximum(s, 0.0), (s + mu) ** 2 / (4.0 * mu))
    return out if out.ndim else float(out)


def plus_tilde_prime(s, mu):
    _check_mu(mu)
    s = np.asarray(s, dtype=float)
    out = np.where(np.abs(s) > mu, (s > 0).astype(float), (s + mu) / (2.0 * mu))
    return out if out.ndim else float(out)


def _as_problem(A, b, c=None):
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float).ravel()
    if A.size == 0:
        raise ValueError("A must be nonempty")
    m = A.shape[0]
    if b.size != m:
        raise ValueError(f"b has length {b.size}, expected {m}")
    if c is not None:
        c = np.array(c, dtype=float).ravel()
        if c.size != m:
            raise ValueError(f"c has length {c.size}, expected {m}")
    return A, b, c


def _check_x(A, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != A.shape[1]:
        raise ValueError(f"x has shape {x.shape}, expected ({A.shape[1]},)")
    return x


def l1_value_grad(A, b, x, mu):
    """Value and gradient of ``(1/m) sum_i theta_tilde(A_i x - b_i, mu)``."""
    _check_mu(mu)
    A, b, _ = _as_problem(A, b)
    x = _check_x(A, x)
    r = A @ x - b
    m = A.shape[0]
    value = float(np.sum(theta_tilde(r, mu))) / m
    grad = A.T @ theta_tilde_prime(r, mu) / m
    return value, grad


def censored_value_grad(A, b, c, x, mu):
    """Value and gradient of ``(1/m) sum_i theta_tilde(plus_tilde(A_i x - c_i) - b_i)``."""
    _check_mu(mu)
    A, b, c = _as_problem(A, b, c)
    x = _check_x(A, x)
    s = A @ x - c
    u = plus_tilde(s, mu) - b
    m = A.shape[0]
    value = float(np.sum(theta_tilde(u, mu))) / m
    grad = A.T @ (theta_tilde_prime(u, mu) * plus_tilde_prime(s, mu)) / m
    return value, grad


def estimate_lf(A) -> float:
    """Max absolute row sum of ``A``; the Lipschitz constant used in the experiments."""
    A = np.array(A, dtype=float, ndmin=2)
    if A.size == 0:
        raise ValueError("A must be nonempty")
    return float(np.max(np.sum(np.abs(A), axis=1)))


def estimate_ltilde(A) -> float:
    """``||A||_2^2 / m``: gradient-Lipschitz scale for kernels with curvature ``<= 1/mu``."""
    A = np.array(A, dtype=float, ndmin=2)
    if A.size == 0:
        raise ValueError("A must be nonempty")
    return float(np.linalg.norm(A, 2) ** 2 / A.shape[0])


class SmoothingOracle(abc.ABC):
    """Smoothing function of a convex loss ``f`` on the feasible box."""

    kappa: float

    @abc.abstractmethod
    def value_grad(self, x, mu) -> tuple[float, np.ndarray]:
        ...

    @abc.abstractmethod
    def exact_value(self, x) -> float:
        """The unsmoothed loss ``f(x)``."""

    @property
    @abc.abstractmethod
    def ltilde(self) -> float:
        ...

    @property
    @abc.abstractmethod
    def lf(self) -> float:
        ...

    @property
    @abc.abstractmethod
    def n(self) -> int:
        ...

    def value(self, x, mu) -> float:
        return self.value_grad(x, mu)[0]

    def gradient(self, x, mu) -> np.ndarray:
        return self.value_grad(x, mu)[1]


class _MatrixLoss(SmoothingOracle):
    def __init__(self, A, b, c=None):
        A, b, c = _as_problem(A, b, c)
        for arr in (A, b, c):
            if arr is not None:
                arr.setflags(write=False)
        self.A, self.b = A, b
        if c is not None:
            self.c = c
        self._ltilde = None

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def lf(self) -> float:
        return estimate_lf(self.A)


class L1LossSmoother(_MatrixLoss):
    """Smoothed ``(1/m) ||Ax - b||_1``.

    ``theta_tilde`` lies between ``|s|`` and ``|s| + mu/2`` and increases in
    ``mu`` with slope at most 1/2, so ``kappa = 1/2``.
    """

    kappa = 0.5

    def __init__(self, A, b):
        super().__init__(A, b)

    def value_grad(self, x, mu):
        return l1_value_grad(self.A, self.b, x, mu)

    def exact_value(self, x) -> float:
        x = _check_x(self.A, x)
        return float(np.sum(np.abs(self.A @ x - self.b))) / self.m

    @property
    def ltilde(self) -> float:
        if self._ltilde is None:
            self._ltilde = estimate_ltilde(self.A)
        return self._ltilde


class CensoredLossSmoother(_MatrixLoss):
    """Smoothed censored loss ``(1/m) sum_i |max(A_i x - c_i, 0) - b_i|``.

    ``plus_tilde`` overestimates ``max(s, 0)`` by at most ``mu/4`` and the
    outer kernel adds at most ``mu/2``, giving ``kappa = 3/4``.  The composed
    kernel has curvature up to ``1/mu + 1/(2 mu)``, hence the factor 3/2 in
    ``ltilde``.
    """

    kappa = 0.75

    def __init__(self, A, b, c=None):
        A = np.array(A, dtype=float, ndmin=2)
        if c is None:
            c = np.zeros(A.shape[0])
        super().__init__(A, b, c)

    def value_grad(self, x, mu):
        return censored_value_grad(self.A, self.b, self.c, x, mu)

    def exact_value(self, x) -> float:
        x = _check_x(self.A, x)
        s = np.maximum(self.A @ x - self.c, 0.0)
        return float(np.sum(np.abs(s - self.b))) / self.m

    @property
    def ltilde(self) -> float:
        if self._ltilde is None:
            self._ltilde = 1.5 * estimate_ltilde(self.A)
        return self._ltilde
