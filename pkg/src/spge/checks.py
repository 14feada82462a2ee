"""Self-check suites run by ``spge check``.

Each suite compares the library against an independent reference (grid
search, finite differences, the monitor's descent property, the residual
decay rate) and returns a :class:`CheckResult` with the worst cases found.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .penalty import BoxConstraint, prox_capped_piece
from .problems import gen_l1_regression, make_rng
from .smoothing import CensoredLossSmoother, L1LossSmoother, plus_tilde
from .solver import SolverConfig, spge_solve

__all__ = [
    "CheckResult",
    "PROX_TOL",
    "GRAD_TOL",
    "MONITOR_TOL",
    "RATE_FACTOR",
    "RATE_KS",
    "check_prox",
    "check_grad",
    "check_monitor",
    "check_rate",
    "SUITES",
]

PROX_TOL = 1e-6
GRAD_TOL = 1e-5
MONITOR_TOL = 1e-10
RATE_FACTOR = 2.0
RATE_KS = (250, 500, 1000, 2000)

# smoothing levels and iteration limits for the solver-driven suites
EXAMPLE2_CONFIG = dict(L=2.0, alpha=1.0, sigma=0.9, mu0=50.0, epsilon=1e-3,
                       maxiter=10_000, kappa=0.5)


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_violation: float
    tolerance: float
    samples: int
    runtime_s: float
    worst: list = field(default_factory=list)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.name}: {status} max violation {self.max_violation:.3e} "
                f"(tolerance {self.tolerance:.1e}, {self.samples} samples, "
                f"{self.runtime_s:.2f} s)")


def _slopes(d, v):
    # |x|/v - theta_d(x) equals max(s_plus * x, s_minus * x) up to a constant
    s_plus = np.where(d == 2, 0.0, np.where(d == 3, 2.0, 1.0)) / v
    s_minus = np.where(d == 2, -2.0, np.where(d == 3, 0.0, -1.0)) / v
    return s_plus, s_minus


def _scalar_prox_objective(x, w, tau, s_plus, s_minus):
    return tau * np.maximum(s_plus * x, s_minus * x) + 0.5 * (x - w) ** 2


def grid_prox(w, d, tau, v, lower, upper, spacing=1e-4, refine_steps=45):
    """Per-coordinate prox by grid search followed by ternary refinement.

    All arguments are 1-D arrays of equal length (one scalar problem per
    entry).  The scalar objective is convex for every piece label, so
    ternary search inside the winning grid cell converges to the minimizer.
    """
    w, d, tau, v, lower, upper = (np.asarray(a, dtype=float) for a in
                                  (w, d, tau, v, lower, upper))
    s_plus, s_minus = _slopes(d, v)
    n_pts = int(np.ceil(np.max(upper - lower) / spacing)) + 1
    grid = np.linspace(0.0, 1.0, n_pts)
    out = np.empty_like(w)
    chunk = max(1, 2_000_000 // n_pts)
    for s in range(0, w.size, chunk):
        sl = slice(s, s + chunk)
        lo, hi = lower[sl, None], upper[sl, None]
        xs = lo + (hi - lo) * grid[None, :]
        vals = _scalar_prox_objective(xs, w[sl, None], tau[sl, None],
                                      s_plus[sl, None], s_minus[sl, None])
        idx = np.argmin(vals, axis=1)
        step = (upper[sl] - lower[sl]) / (n_pts - 1)
        a = np.maximum(lower[sl], xs[np.arange(idx.size), idx] - step)
        b = np.minimum(upper[sl], xs[np.arange(idx.size), idx] + step)
        args = (w[sl], tau[sl], s_plus[sl], s_minus[sl])
        for _ in range(refine_steps):
            m1 = a + (b - a) / 3.0
            m2 = b - (b - a) / 3.0
            left = _scalar_prox_objective(m1, *args) <= _scalar_prox_objective(m2, *args)
            b = np.where(left, m2, b)
            a = np.where(left, a, m1)
        out[sl] = 0.5 * (a + b)
    return out


def random_prox_cases(n, rng):
    """``n`` random scalar prox problems ``(w, d, tau, v, lower, upper)``."""
    v = rng.uniform(0.1, 2.0, n)
    tau = rng.uniform(0.01, 2.0, n)
    d = rng.integers(1, 4, n)
    lower = -rng.uniform(0.0, 1.5, n)
    upper = rng.uniform(0.0, 1.5, n)
    # keep the box nondegenerate
    upper = np.where(upper - lower < 1e-2, upper + 0.5, upper)
    w = rng.uniform(-3.0, 3.0, n)
    return w, d, tau, v, lower, upper


def check_prox(n_cases=10_000, seed=0) -> CheckResult:
    start = time.perf_counter()
    rng = make_rng(seed)
    w, d, tau, v, lower, upper = random_prox_cases(n_cases, rng)
    ref = grid_prox(w, d, tau, v, lower, upper)
    got = prox_capped_piece(w, d, tau, v, BoxConstraint(lower, upper))
    err = np.abs(got - ref)
    order = np.argsort(err)[::-1][:5]
    worst = [dict(w=w[i], d=int(d[i]), tau=tau[i], v=v[i], lower=lower[i],
                  upper=upper[i], closed_form=got[i], reference=ref[i], error=err[i])
             for i in order]
    mx = float(err.max())
    return CheckResult("prox", mx <= PROX_TOL, mx, PROX_TOL, n_cases,
                       time.perf_counter() - start, worst)


def _seam_distance(oracle, x, mu):
    r = oracle.A @ x - (oracle.c if isinstance(oracle, CensoredLossSmoother) else oracle.b)
    dist = np.abs(np.abs(r) - mu)
    if isinstance(oracle, CensoredLossSmoother):
        u = plus_tilde(r, mu) - oracle.b
        dist = np.minimum(dist, np.abs(np.abs(u) - mu))
    return float(dist.min())


def fd_gradient(fun, x, h=1e-6):
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def check_grad(n_points=1000, seed=0, h=1e-6, seam_gap=1e-3) -> CheckResult:
    """Central differences for both smoothers at points away from kernel seams."""
    start = time.perf_counter()
    rng = make_rng(seed)
    errs, worst = [], []
    per_kind = n_points // 2
    for kind in ("l1", "censored"):
        done = 0
        while done < per_kind:
            m, n = int(rng.integers(2, 8)), int(rng.integers(1, 6))
            A = rng.standard_normal((m, n))
            b = rng.standard_normal(m)
            oracle = (L1LossSmoother(A, b) if kind == "l1"
                      else CensoredLossSmoother(A, np.abs(b), rng.standard_normal(m) * 0.3))
            x = rng.standard_normal(n)
            mu = float(rng.uniform(0.05, 1.0))
            if _seam_distance(oracle, x, mu) < seam_gap:
                continue
            g = oracle.gradient(x, mu)
            fd = fd_gradient(lambda z: oracle.value(z, mu), x, h)
            rel = float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-8))
            errs.append(rel)
            worst.append(dict(kind=kind, mu=mu, rel_error=rel))
            done += 1
    worst.sort(key=lambda r: -r["rel_error"])
    mx = float(max(errs))
    return CheckResult("grad", mx <= GRAD_TOL, mx, GRAD_TOL, len(errs),
                       time.perf_counter() - start, worst[:5])


def check_monitor(seeds=(0,), m=60, n=120, s=12) -> CheckResult:
    """Largest one-step increase of ``H_k + kappa mu_k`` under the safe cap."""
    start = time.perf_counter()
    cfg = SolverConfig(beta_schedule="safe_cap_max", track_residual=False, **EXAMPLE2_CONFIG)
    incs, worst = [], []
    for seed in seeds:
        res = spge_solve(gen_l1_regression(m, n, s, seed), cfg)
        h = np.concatenate([[res.initial_monitor], res.column("monitor")])
        dh = np.diff(h)
        k = int(np.argmax(dh))
        incs.append(float(dh[k]))
        worst.append(dict(seed=seed, k=k, increase=float(dh[k]), iterations=res.iterations))
    mx = max(incs)
    return CheckResult("monitor", mx <= MONITOR_TOL, mx, MONITOR_TOL, len(seeds),
                       time.perf_counter() - start, worst)


def rate_sequence(residuals, sigma, ks=RATE_KS):
    """``min_{k<=K} r(x^k)^2 * (K+1)^(1-sigma)`` for each ``K`` in ``ks``."""
    r2 = np.asarray(residuals, dtype=float) ** 2
    best = np.minimum.accumulate(r2)
    return {K: float(best[K] * (K + 1) ** (1.0 - sigma)) for K in ks}


def check_rate(seed=0, m=60, n=120, s=12) -> CheckResult:
    start = time.perf_counter()
    ks = RATE_KS
    cfg = SolverConfig(beta_schedule="fista_fixed_restart", restart_period=500,
                       **{**EXAMPLE2_CONFIG, "maxiter": max(ks) + 1, "epsilon": 1e-12})
    res = spge_solve(gen_l1_regression(m, n, s, seed), cfg)
    vals = rate_sequence(res.column("residual"), cfg.sigma, ks)
    ratio = max(vals.values()) / vals[ks[0]]
    worst = [dict(K=K, value=val) for K, val in vals.items()]
    return CheckResult("rate", ratio <= RATE_FACTOR, ratio, RATE_FACTOR, len(ks),
                       time.perf_counter() - start, worst)


SUITES = {
    "prox": check_prox,
    "grad": check_grad,
    "monitor": check_monitor,
    "rate": check_rate,
}
