"""Problem instances, synthetic generators and the instance text format.

Random instances are drawn from numpy's ``Generator`` on the Philox-4x64
counter-based bit generator seeded with the integer ``seed``, so the same
seed gives the same instance on every platform numpy supports.

Instance files are plain text::

    spge-instance 1
    kind: l1_regression
    m: 60
    n: 120
    seed: 0
    lambda: 18.8
    v: 1.2
    @A 60 120
    <60 lines of 120 numbers>
    @b 1 60
    <1 line of 60 numbers>
    ...
    @end

Header keys are ``kind, m, n, seed, lambda, v`` (``seed`` may be ``none``).
Each block starts with ``@<name> <rows> <cols>`` followed by ``rows`` lines of
``cols`` whitespace-separated decimals written with 17 significant digits, so
values round-trip exactly; ``inf``/``-inf`` are allowed in bounds.  Required
blocks: ``A``, ``b``, ``lower``, ``upper``; optional ``c``, ``x0``,
``x_true``.  Vectors are stored as ``1 x len`` blocks.  The file must end with
``@end``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .penalty import BoxConstraint, CappedL1Penalty
from .smoothing import CensoredLossSmoother, L1LossSmoother, estimate_lf

__all__ = [
    "LOSS_KINDS",
    "ProblemInstance",
    "InstanceParseError",
    "make_rng",
    "gen_toy",
    "gen_l1_regression",
    "gen_censored",
    "save_instance",
    "load_instance",
]

LOSS_KINDS = ("l1_regression", "censored_regression", "toy_abs")
FORMAT_TAG = "spge-instance 1"
_HEADER_KEYS = ("kind", "m", "n", "seed", "lambda", "v")
_VECTOR_BLOCKS = ("b", "c", "lower", "upper", "x0", "x_true")


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _frozen(arr):
    if arr is None:
        return None
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Data of ``min_{x in box} f(x) + lam * sum_i min(1, |x_i|/v)``."""

    kind: str
    A: np.ndarray
    b: np.ndarray
    box: BoxConstraint
    penalty: CappedL1Penalty
    c: np.ndarray | None = None
    x_true: np.ndarray | None = None
    x0: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"kind must be one of {LOSS_KINDS}, got {self.kind!r}")
        A = np.array(self.A, dtype=float, ndmin=2)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        for name in ("b", "c", "x_true", "x0"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _frozen(np.ravel(val)))
        m, n = A.shape
        if self.b.size != m:
            raise ValueError(f"b has length {self.b.size}, expected m={m}")
        if self.box.n != n:
            raise ValueError(f"box has dimension {self.box.n}, expected n={n}")
        if self.kind == "censored_regression":
            if self.c is None:
                object.__setattr__(self, "c", _frozen(np.zeros(m)))
            elif self.c.size != m:
                raise ValueError(f"c has length {self.c.size}, expected m={m}")
        elif self.c is not None:
            raise ValueError(f"c is only meaningful for censored_regression")
        for name in ("x_true", "x0"):
            val = getattr(self, name)
            if val is not None and val.size != n:
                raise ValueError(f"{name} has length {val.size}, expected n={n}")
        if self.x_true is not None and not self.box.contains(self.x_true):
            raise ValueError("x_true lies outside the box")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @cached_property
    def oracle(self):
        if self.kind == "censored_regression":
            return CensoredLossSmoother(self.A, self.b, self.c)
        return L1LossSmoother(self.A, self.b)

    def objective(self, x) -> float:
        """Exact ``f(x) + lam * Phi(x)``."""
        return self.oracle.exact_value(x) + self.penalty.value(x)

    def objective_l0(self, x) -> float:
        """``f(x) + lam * ||x||_0``."""
        return self.oracle.exact_value(x) + self.penalty.lam * int(np.count_nonzero(x))

    def with_penalty(self, lam, v) -> "ProblemInstance":
        return ProblemInstance(self.kind, self.A, self.b, self.box,
                               CappedL1Penalty(lam, v), self.c, self.x_true,
                               self.x0, self.seed)

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented

        def same(u, w):
            if u is None or w is None:
                return u is None and w is None
            return np.array_equal(u, w)

        return (self.kind == other.kind and self.seed == other.seed
                and self.penalty == other.penalty and self.box == other.box
                and all(same(getattr(self, k), getattr(other, k))
                        for k in ("A", "b", "c", "x_true", "x0")))

    __hash__ = None


def gen_toy(lam=1.0, v=0.5) -> ProblemInstance:
    """``|x_1 + x_2 - 1| + lam * Phi(x)`` on ``[0, 1]^2``, started at ``(1, 0.8)``."""
    return ProblemInstance(
        kind="toy_abs",
        A=np.array([[1.0, 1.0]]),
        b=np.array([1.0]),
        box=BoxConstraint.uniform(2, 0.0, 1.0),
        penalty=CappedL1Penalty(lam, v),
        x0=np.array([1.0, 0.8]),
    )


def _check_sizes(m, n, s):
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be positive, got m={m}, n={n}")
    if not 0 < s <= n:
        raise ValueError(f"need 0 < s <= n, got s={s}, n={n}")


def gen_l1_regression(m, n, s, seed, lam=18.8, noise=0.0) -> ProblemInstance:
    """Sparse nonnegative recovery from ``b = A x*`` with an l1 data fit.

    ``A`` has standard normal entries with columns scaled to unit norm;
    ``x*`` has ``s`` nonzeros at uniformly chosen positions with magnitudes
    uniform on ``[1, 5]``.  The box is ``[0, 10]^n``, ``v = min(lam/L_f, 10)``
    with ``L_f`` the max row sum of ``A``, and the start is ``1.97 * ones``.
    """
    _check_sizes(m, n, s)
    rng = make_rng(seed)
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=0)
    x_true = np.zeros(n)
    support = rng.choice(n, size=s, replace=False)
    x_true[support] = rng.uniform(1.0, 5.0, size=s)
    b = A @ x_true
    if noise:
        b = b + noise * rng.standard_normal(m)
    v = min(lam / estimate_lf(A), 10.0)
    return ProblemInstance(
        kind="l1_regression", A=A, b=b,
        box=BoxConstraint.uniform(n, 0.0, 10.0),
        penalty=CappedL1Penalty(lam, v),
        x_true=x_true, x0=np.full(n, 1.97), seed=seed,
    )


def gen_censored(m, n, s, seed, lam0=0.05, noise=0.0, c=None) -> ProblemInstance:
    """Censored regression ``b = max(A x* - c, 0)`` with ``x*`` in ``(0, 1]``.

    ``A`` is standard normal, ``x*`` has ``s`` nonzeros uniform on
    ``(0, 1]``, ``c`` defaults to zero.  ``lam = lam0 * L_f`` and
    ``v = min(lam0, 1)``; the box is ``[0, 1]^n`` and the start ``0.1 * ones``.
    """
    _check_sizes(m, n, s)
    if not lam0 > 0:
        raise ValueError(f"lam0 must be positive, got {lam0}")
    rng = make_rng(seed)
    A = rng.standard_normal((m, n))
    x_true = np.zeros(n)
    support = rng.choice(n, size=s, replace=False)
    x_true[support] = 1.0 - rng.random(s)
    c = np.zeros(m) if c is None else np.asarray(c, dtype=float)
    b = np.maximum(A @ x_true - c, 0.0)
    if noise:
        b = b + noise * rng.standard_normal(m)
    lf = estimate_lf(A)
    lam = lam0 * lf
    return ProblemInstance(
        kind="censored_regression", A=A, b=b, c=c,
        box=BoxConstraint.uniform(n, 0.0, 1.0),
        penalty=CappedL1Penalty(lam, min(lam / lf, 1.0)),
        x_true=x_true, x0=np.full(n, 0.1), seed=seed,
    )


class InstanceParseError(ValueError):
    """Malformed instance file; ``field`` and ``line`` locate the problem."""

    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line


def _fmt(x) -> str:
    return "%.17g" % x


def save_instance(instance: ProblemInstance, path) -> None:
    p = instance
    lines = [FORMAT_TAG]
    header = {
        "kind": p.kind, "m": p.m, "n": p.n,
        "seed": "none" if p.seed is None else int(p.seed),
        "lambda": _fmt(p.penalty.lam), "v": _fmt(p.penalty.v),
    }
    lines += [f"{k}: {header[k]}" for k in _HEADER_KEYS]

    def block(name, arr):
        arr = np.atleast_2d(arr)
        lines.append(f"@{name} {arr.shape[0]} {arr.shape[1]}")
        lines.extend(" ".join(_fmt(x) for x in row) for row in arr)

    block("A", p.A)
    block("b", p.b)
    if p.c is not None:
        block("c", p.c)
    block("lower", p.box.lower)
    block("upper", p.box.upper)
    if p.x0 is not None:
        block("x0", p.x0)
    if p.x_true is not None:
        block("x_true", p.x_true)
    lines.append("@end")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_float(tok, field, lineno):
    try:
        val = float(tok)
    except ValueError:
        raise InstanceParseError(f"not a number: {tok!r}", field, lineno) from None
    if math.isnan(val):
        raise InstanceParseError("NaN is not allowed", field, lineno)
    return val


def load_instance(path) -> ProblemInstance:
    """Parse an instance file; raises :class:`InstanceParseError` on any defect."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_TAG:
        raise InstanceParseError(f"missing format tag {FORMAT_TAG!r}", "format", 1)

    header = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("@"):
        raw = lines[i].strip()
        i += 1
        if not raw or raw.startswith("#"):
            continue
        key, sep, val = raw.partition(":")
        key = key.strip()
        if not sep or key not in _HEADER_KEYS:
            raise InstanceParseError(f"unexpected header line {raw!r}", key or None, i)
        if key in header:
            raise InstanceParseError("duplicate header key", key, i)
        header[key] = (val.strip(), i)
    for key in _HEADER_KEYS:
        if key not in header:
            raise InstanceParseError("missing header key", key, i)

    def header_int(key):
        val, ln = header[key]
        try:
            return int(val)
        except ValueError:
            raise InstanceParseError(f"not an integer: {val!r}", key, ln) from None

    kind, kind_ln = header["kind"]
    if kind not in LOSS_KINDS:
        raise InstanceParseError(f"unknown kind {kind!r}", "kind", kind_ln)
    m, n = header_int("m"), header_int("n")
    seed = None if header["seed"][0] == "none" else header_int("seed")
    lam = _parse_float(header["lambda"][0], "lambda", header["lambda"][1])
    v = _parse_float(header["v"][0], "v", header["v"][1])

    blocks = {}
    ended = False
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw == "@end":
            ended = True
            break
        parts = raw.split()
        if not parts[0].startswith("@") or len(parts) != 3:
            raise InstanceParseError(f"expected block header, got {raw!r}", None, i)
        name = parts[0][1:]
        if name != "A" and name not in _VECTOR_BLOCKS:
            raise InstanceParseError("unknown block", name, i)
        if name in blocks:
            raise InstanceParseError("duplicate block", name, i)
        try:
            rows, cols = int(parts[1]), int(parts[2])
        except ValueError:
            raise InstanceParseError("bad block shape", name, i) from None
        expected = (m, n) if name == "A" else (1, n if name in ("lower", "upper", "x0", "x_true") else m)
        if (rows, cols) != expected:
            raise InstanceParseError(
                f"block shape {rows}x{cols} does not match expected {expected[0]}x{expected[1]}",
                name, i)
        data = np.empty((rows, cols))
        for r in range(rows):
            if i >= len(lines):
                raise InstanceParseError("file truncated inside block", name, i + 1)
            toks = lines[i].split()
            i += 1
            if len(toks) != cols:
                raise InstanceParseError(
                    f"expected {cols} values, found {len(toks)}", name, i)
            data[r] = [_parse_float(t, name, i) for t in toks]
        blocks[name] = data if name == "A" else data[0]
    if not ended:
        raise InstanceParseError("file truncated: missing @end", None, len(lines))
    for name in ("A", "b", "lower", "upper"):
        if name not in blocks:
            raise InstanceParseError("missing required block", name, None)

    try:
        return ProblemInstance(
            kind=kind, A=blocks["A"], b=blocks["b"],
            box=BoxConstraint(blocks["lower"], blocks["upper"]),
            penalty=CappedL1Penalty(lam, v),
            c=blocks.get("c"), x_true=blocks.get("x_true"),
            x0=blocks.get("x0"), seed=seed,
        )
    except ValueError as exc:
        raise InstanceParseError(f"inconsistent instance: {exc}") from exc
