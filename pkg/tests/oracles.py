"""Reference implementations used only by the tests.

They are written from the defining formulas and share no code with the
package, so agreement is evidence rather than tautology.
"""

import numpy as np


def capped_piece_penalty(x, d, v):
    """``|x|/v - theta_d(x)`` evaluated straight from the piece definitions."""
    concave = np.select([d == 1, d == 2, d == 3], [0.0 * x, x / v - 1.0, -x / v - 1.0])
    return np.abs(x) / v - concave


def brute_force_prox(w, d, tau, v, lower, upper, spacing=1e-4, refine=50):
    """Scalar prox problems solved by a uniform grid and golden-section refinement.

    Every argument is a 1-D array with one entry per scalar problem
    ``min_{lower <= x <= upper} tau * pen_d(x) + (x - w)^2 / 2``.
    """
    w, d, tau, v, lower, upper = (np.asarray(a, dtype=float) for a in (w, d, tau, v, lower, upper))

    def obj(x, i):
        return tau[i] * capped_piece_penalty(x, d[i], v[i]) + 0.5 * (x - w[i]) ** 2

    # grid stage: the penalty is a*|x| + b*x + const on each piece
    a_coef = tau / v
    b_coef = np.select([d == 2, d == 3], [-tau / v, tau / v], 0.0)

    width = upper - lower
    n_pts = int(np.ceil(width.max() / spacing)) + 1
    unit = np.linspace(0.0, 1.0, n_pts)
    out = np.empty_like(w)
    rows = max(1, 1_500_000 // n_pts)
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    for start in range(0, w.size, rows):
        i = np.arange(start, min(start + rows, w.size))
        xs = lower[i, None] + width[i, None] * unit[None, :]
        vals = a_coef[i, None] * np.abs(xs) + b_coef[i, None] * xs + 0.5 * (xs - w[i, None]) ** 2
        j = np.argmin(vals, axis=1)
        h = width[i] / (n_pts - 1)
        x_best = xs[np.arange(i.size), j]
        a = np.maximum(lower[i], x_best - h)
        b = np.minimum(upper[i], x_best + h)
        for _ in range(refine):
            c = b - gr * (b - a)
            e = a + gr * (b - a)
            left = obj(c, i) <= obj(e, i)
            b = np.where(left, e, b)
            a = np.where(left, a, c)
        out[i] = 0.5 * (a + b)
    return out


def central_difference(fun, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for j in range(x.size):
        step = np.zeros_like(x)
        step[j] = h
        g[j] = (fun(x + step) - fun(x - step)) / (2.0 * h)
    return g


def huber(s, mu):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) > mu, np.abs(s), s ** 2 / (2 * mu) + mu / 2)


def smooth_plus(s, mu):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) > mu, np.maximum(s, 0.0), (s + mu) ** 2 / (4 * mu))


def toy_objective(x1, x2, lam, v):
    cap = lambda t: np.minimum(1.0, np.abs(t) / v)
    return np.abs(x1 + x2 - 1.0) + lam * (cap(x1) + cap(x2))


def toy_global_set(lam, v):
    """Global minimizers of the toy objective over ``[0, 1]^2``.

    On the box the objective is piecewise linear, so its minimum is attained
    at a vertex of the partition by the lines ``x_i = v`` and
    ``x_1 + x_2 = 1``; enumerating those vertices is exact.
    """
    cands = {0.0, 1.0, v, 1.0 - v}
    pts = [(a, b) for a in cands for b in cands if 0 <= a <= 1 and 0 <= b <= 1]
    pts += [(a, 1.0 - a) for a in cands if 0 <= a <= 1]
    vals = [float(toy_objective(a, b, lam, v)) for a, b in pts]
    best = min(vals)
    return sorted({(round(a, 12), round(b, 12)) for (a, b), f in zip(pts, vals)
                   if f <= best + 1e-12})
