"""Command-line driver.

Subcommands::

    spge solve CONFIG
    spge reproduce {1,2,3} [--seeds N] [--out DIR] [--rows 1,2,3] [--full-grid] [--no-timing]
    spge check {prox,grad,monitor,rate}
    spge gen {toy,l1_regression,censored} [--m M --n N --s S --seed K ...] --out FILE

Exit codes: 0 success, 1 failed check suite, 2 configuration or input
error, 3 numerical failure (divergence), 4 output could not be written.

The output directory is taken from ``--out``, else the environment variable
``SPGE_OUTPUT_DIR``, else the config file's ``output_dir``, else
``spge_out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .checks import SUITES
from .diagnostics import proximal_residual, recovery_metrics, settle_iteration
from .problems import (
    InstanceParseError,
    gen_censored,
    gen_l1_regression,
    gen_toy,
    load_instance,
    save_instance,
)
from .solver import DivergenceError, IterationRecord, SolverConfig, spg_solve, spge_solve

__all__ = ["main", "RunConfig", "ConfigError", "parse_config", "load_config",
           "cmd_solve", "cmd_reproduce", "cmd_check", "cmd_gen", "OUTPUT_ENV"]

OUTPUT_ENV = "SPGE_OUTPUT_DIR"
DEFAULT_OUTPUT = "spge_out"

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

PROBLEMS = ("toy", "l1_regression", "censored", "file")
ALGORITHMS = ("spge", "spg", "both")
REPORT_FORMATS = ("csv", "json")

# settle tolerance used for the iteration counts of the toy table
TOY_SETTLE_TOL = 1e-4


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None, line=None):
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None and not message.startswith(f"{field}:"):
            prefix += f"{field}: "
        super().__init__(prefix + message)
        self.field = field
        self.line = line


# ---------------------------------------------------------------------------
# configuration

_SOLVER_TYPES = {
    "L": float, "alpha": float, "sigma": float, "mu0": float, "epsilon": float,
    "maxiter": int, "a": float, "beta_schedule": str, "restart_period": int,
    "restart_resets_mu": "optbool", "kappa": "optfloat",
    "monitor_convention": str, "track_residual": bool,
}
_RUN_TYPES = {
    "problem": str, "instance": str, "m": int, "n": int, "s": int,
    "lam": float, "v": float, "lam0": float, "noise": float,
    "algorithm": str, "seeds": "intlist", "output_dir": str,
    "report_format": str, "record_timing": bool,
}
CONFIG_KEYS = tuple(_SOLVER_TYPES) + tuple(_RUN_TYPES)


@dataclass(frozen=True)
class RunConfig:
    """Everything a ``solve`` run needs; see :data:`CONFIG_KEYS` for the file keys."""

    solver: SolverConfig = field(default_factory=SolverConfig)
    problem: str = "toy"
    instance: str | None = None
    m: int | None = None
    n: int | None = None
    s: int | None = None
    lam: float | None = None
    v: float | None = None
    lam0: float | None = None
    noise: float = 0.0
    algorithm: str = "spge"
    seeds: tuple = (0,)
    output_dir: str = DEFAULT_OUTPUT
    report_format: str = "csv"
    record_timing: bool = True

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"must be one of {PROBLEMS} (got {self.problem!r})", "problem")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"must be one of {ALGORITHMS} (got {self.algorithm!r})", "algorithm")
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(f"must be one of {REPORT_FORMATS} (got {self.report_format!r})",
                              "report_format")
        if not self.seeds:
            raise ConfigError("at least one seed is required", "seeds")
        if self.problem == "file" and not self.instance:
            raise ConfigError("required when problem = file", "instance")
        if self.problem in ("l1_regression", "censored"):
            for key in ("m", "n", "s"):
                val = getattr(self, key)
                if val is None:
                    raise ConfigError(f"required for problem = {self.problem}", key)
                if val < 1:
                    raise ConfigError(f"must be a positive integer (got {val})", key)
            if self.s > self.n:
                raise ConfigError(f"must not exceed n = {self.n} (got {self.s})", "s")
        for key in ("lam", "v", "lam0"):
            val = getattr(self, key)
            if val is not None and not (math.isfinite(val) and val > 0):
                raise ConfigError(f"must be positive (got {val})", key)
        if not (math.isfinite(self.noise) and self.noise >= 0):
            raise ConfigError(f"must be nonnegative (got {self.noise})", "noise")

    def build_problem(self, seed):
        if self.problem == "toy":
            return gen_toy(lam=self.lam if self.lam is not None else 1.0,
                           v=self.v if self.v is not None else 0.5)
        if self.problem == "l1_regression":
            p = gen_l1_regression(self.m, self.n, self.s, seed,
                                  lam=self.lam if self.lam is not None else 18.8,
                                  noise=self.noise)
        elif self.problem == "censored":
            p = gen_censored(self.m, self.n, self.s, seed,
                             lam0=self.lam0 if self.lam0 is not None else 0.05,
                             noise=self.noise)
        else:
            p = load_instance(self.instance)
            if self.lam is not None or self.v is not None:
                p = p.with_penalty(self.lam if self.lam is not None else p.penalty.lam,
                                   self.v if self.v is not None else p.penalty.v)
            return p
        if self.v is not None:
            p = p.with_penalty(p.penalty.lam, self.v)
        return p


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(key, raw, kind, line):
    text = raw.strip()
    try:
        if kind in ("optbool", "optfloat") and text.lower() in ("none", "auto", ""):
            return None
        if kind in (bool, "optbool"):
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError("expected true or false")
        if kind in (float, "optfloat"):
            val = float(text)
            if math.isnan(val):
                raise ValueError("NaN is not allowed")
            return val
        if kind is int:
            return int(text)
        if kind == "intlist":
            parts = [p for p in text.replace(",", " ").split() if p]
            if not parts:
                raise ValueError("empty list")
            return tuple(int(p) for p in parts)
        return text
    except ValueError as exc:
        raise ConfigError(f"cannot parse {text!r}: {exc}", key, line) from None


def parse_config(text, base_dir=None) -> RunConfig:
    """Parse a flat ``key = value`` document; ``#`` starts a comment.

    Relative ``instance`` paths are resolved against ``base_dir``.
    """
    values, seen = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError("unknown key", key, lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", key, lineno)
        seen[key] = lineno
        kind = _SOLVER_TYPES.get(key) or _RUN_TYPES[key]
        values[key] = _convert(key, val, kind, lineno)

    solver_kw = {k: values.pop(k) for k in list(values) if k in _SOLVER_TYPES}
    try:
        solver = SolverConfig(**solver_kw)
    except ValueError as exc:
        name = str(exc).split(":", 1)[0]
        raise ConfigError(str(exc), name if name in _SOLVER_TYPES else None,
                          seen.get(name)) from None
    if base_dir is not None and values.get("instance"):
        inst = Path(values["instance"])
        if not inst.is_absolute():
            values["instance"] = str(Path(base_dir) / inst)
    try:
        return RunConfig(solver=solver, **values)
    except ConfigError as exc:
        if exc.field in seen and exc.line is None:
            raise ConfigError(str(exc), None, seen[exc.field]) from None
        raise


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)


def resolve_output_dir(cli_value=None, config_value=None) -> Path:
    if cli_value:
        return Path(cli_value)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(config_value or DEFAULT_OUTPUT)


# ---------------------------------------------------------------------------
# output helpers

def _num(x):
    """Stable text for a number: shortest round-trip repr."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(c) if not isinstance(c, str) else c for c in row])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")


def write_trace(path, result, record_timing=True):
    cols = IterationRecord.CSV_COLUMNS
    rows = []
    for rec in result.trace:
        row = [getattr(rec, c) for c in cols]
        if not record_timing:
            row[cols.index("time_s")] = 0.0
        rows.append(row)
    write_csv(path, cols, rows)


FIGURE_COLUMNS = ("k", "dist_to_truth", "objective_gap")


def figure_rows(problem, x_history):
    """``||x^k - x*||`` and ``|F(x^k) - F(x*)|`` for every stored iterate."""
    x_true = problem.x_true
    f_true = problem.objective(x_true)
    return [(k, float(np.linalg.norm(x - x_true)), abs(problem.objective(x) - f_true))
            for k, x in enumerate(x_history)]


def _round_point(x, digits=4):
    return [round(float(v), digits) + 0.0 for v in x]


# ---------------------------------------------------------------------------
# solve

def _run(algorithm, problem, cfg, keep_history):
    fn = spge_solve if algorithm == "spge" else spg_solve
    return fn(problem, cfg, keep_history=keep_history)


def summarize(problem, result, algorithm, seed, record_timing=True):
    metrics = recovery_metrics(result.x_final, problem.x_true, result)
    mu = result.mu_final
    return {
        "algorithm": algorithm,
        "seed": seed,
        "termination_reason": result.termination_reason,
        "iterations": result.iterations,
        "mu_final": mu,
        "objective": problem.objective(result.x_final),
        "residual": proximal_residual(result.x_final, mu, problem.oracle,
                                      problem.penalty, problem.box),
        "nnz": int(np.count_nonzero(result.x_final)),
        "rel_err": metrics.rel_err,
        "success_rate": metrics.success_rate,
        "sparsity_rate": metrics.sparsity_rate,
        "wall_clock_s": result.wall_clock_s if record_timing else 0.0,
        "x_final": [float(v) for v in result.x_final],
    }


SUMMARY_COLUMNS = ("algorithm", "seed", "termination_reason", "iterations", "mu_final",
                   "objective", "residual", "nnz", "rel_err", "success_rate",
                   "sparsity_rate", "wall_clock_s")


def cmd_solve(config_path, out=None) -> int:
    try:
        rc = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = resolve_output_dir(out, rc.output_dir)
    seeds = rc.seeds if rc.problem not in ("toy", "file") else rc.seeds[:1]
    algorithms = ("spge", "spg") if rc.algorithm == "both" else (rc.algorithm,)
    rows = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for seed in seeds:
            try:
                problem = rc.build_problem(seed)
            except (InstanceParseError, OSError, ValueError) as exc:
                print(f"config error: cannot build problem: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            label = seed if rc.problem != "file" else (problem.seed if problem.seed is not None else 0)
            for alg in algorithms:
                res = _run(alg, problem, rc.solver, keep_history=problem.x_true is not None)
                write_trace(out_dir / f"trace_{alg}_seed{label}.csv", res, rc.record_timing)
                if problem.x_true is not None:
                    write_csv(out_dir / f"figure_{alg}_seed{label}.csv", FIGURE_COLUMNS,
                              figure_rows(problem, res.x_history))
                summ = summarize(problem, res, alg, label, rc.record_timing)
                rows.append(summ)
                print(f"{alg} seed={label}: {res.termination_reason} after {res.iterations} "
                      f"iterations, objective {summ['objective']:.6g}, "
                      f"x = {_round_point(res.x_final) if problem.n <= 10 else '...'}")
        if rc.report_format == "json":
            write_json(out_dir / "summary.json", {"runs": rows})
        else:
            write_csv(out_dir / "summary.csv", SUMMARY_COLUMNS,
                      [[r[c] for c in SUMMARY_COLUMNS] for r in rows])
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# reproduce

TOY_PAIRS = ((0.7, 0.4), (0.8, 0.5), (0.9, 0.6),
             (1.0, 0.7), (1.0, 0.5), (1.0, 0.3),
             (1.2, 0.8), (1.3, 0.9), (1.4, 1.0))
TOY_CONFIG = SolverConfig(L=math.sqrt(2.0), alpha=1.0, sigma=0.9, mu0=0.1, epsilon=1e-3,
                          maxiter=10_000, kappa=0.5, beta_schedule="fista")

L1_ROWS = ((60, 120, 12), (80, 160, 16), (100, 200, 20))
L1_LAMBDA = 18.8
L1_CONFIG = SolverConfig(L=2.0, alpha=1.0, sigma=0.9, mu0=50.0, epsilon=1e-3,
                         maxiter=10_000, kappa=0.5, beta_schedule="fista_fixed_restart",
                         restart_period=500, track_residual=False)

CENSORED_ROWS = ((500, 100, 20), (1000, 200, 40), (2000, 400, 80))
CENSORED_CONFIG = SolverConfig(L=1.5, alpha=1.0, sigma=0.9, mu0=1.0, epsilon=0.01,
                               maxiter=10_000, beta_schedule="fista_fixed_restart",
                               restart_period=500, track_residual=False)
CENSORED_LAM0_FULL = tuple(round(0.001 * i, 3) for i in range(1, 101))
CENSORED_LAM0_REDUCED = (0.001, 0.05, 0.1)


def toy_global_minimizers(lam, v, grid=1001, tol=1e-9):
    """Global minimizers of the toy objective by exhaustive grid search."""
    t = np.linspace(0.0, 1.0, grid)
    x1, x2 = np.meshgrid(t, t, indexing="ij")
    F = np.abs(x1 + x2 - 1.0) + lam * (np.minimum(1, x1 / v) + np.minimum(1, x2 / v))
    best = F.min()
    idx = np.argwhere(F <= best + tol)
    pts = sorted({(round(float(t[i]), 4), round(float(t[j]), 4)) for i, j in idx})
    return [list(p) for p in pts]


def _quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return fn(*args, **kw)


def reproduce_toy(repeats=20, record_timing=True):
    rows = []
    for lam, v in TOY_PAIRS:
        p = gen_toy(lam, v)
        row = {"lambda": lam, "v": v, "global_minimizers": toy_global_minimizers(lam, v)}
        for alg in ("spge", "spg"):
            res = _quiet(_run, alg, p, TOY_CONFIG, True)
            times = []
            for _ in range(repeats if record_timing else 0):
                times.append(_quiet(_run, alg, p, TOY_CONFIG, False).wall_clock_s)
            row[f"{alg}_point"] = _round_point(res.x_final)
            row[f"{alg}_x"] = [float(c) for c in res.x_final]
            row[f"{alg}_iter"] = settle_iteration(res.x_history, TOY_SETTLE_TOL)
            row[f"{alg}_total_iter"] = res.iterations
            row[f"{alg}_time"] = statistics.median(times) if times else 0.0
        rows.append(row)
    return rows


TOY_COLUMNS = ("lambda", "v", "global_minimizers", "spge_point", "spg_point",
               "spge_iter", "spg_iter", "spge_total_iter", "spg_total_iter",
               "spge_time", "spg_time")


def _fmt_cell(val):
    if isinstance(val, list):
        if val and isinstance(val[0], list):
            return " ".join(_fmt_cell(p) for p in val)
        return "(" + ",".join(f"{c:g}" for c in val) + ")"
    return val


def reproduce_l1(rows=L1_ROWS, seeds=20, record_timing=True, out_dir=None):
    runs, table = [], []
    for (m, n, s) in rows:
        cell = {"spge": [], "spg": []}
        for seed in range(seeds):
            p = gen_l1_regression(m, n, s, seed, lam=L1_LAMBDA)
            for alg in ("spge", "spg"):
                keep = out_dir is not None and seed == 0
                res = _quiet(_run, alg, p, L1_CONFIG, keep)
                met = recovery_metrics(res.x_final, p.x_true, res)
                rec = {"m": m, "n": n, "s": s, "seed": seed, "algorithm": alg,
                       "time": res.wall_clock_s if record_timing else 0.0,
                       "rel_err": met.rel_err, "success_rate": met.success_rate,
                       "support_size": met.support_size, "iterations": res.iterations,
                       "termination_reason": res.termination_reason,
                       "x_final": [float(c) for c in res.x_final]}
                runs.append(rec)
                cell[alg].append(rec)
                if keep:
                    write_csv(out_dir / f"figure_m{m}_n{n}_seed0_{alg}.csv", FIGURE_COLUMNS,
                              figure_rows(p, res.x_history))
        table.append(_aggregate((m, n, s), cell, ("time", "rel_err", "success_rate",
                                                  "support_size", "iterations")))
    return table, runs


def _aggregate(dims, cell, keys):
    m, n, s = dims
    row = {"m": m, "n": n, "s": s}
    for alg in ("spg", "spge"):
        for key in keys:
            vals = [r[key] for r in cell[alg]]
            row[f"{key}_{alg}_median"] = float(statistics.median(vals))
            row[f"{key}_{alg}_mean"] = float(statistics.fmean(vals))
    row["spge_faster_count"] = sum(
        a["time"] < b["time"] for a, b in zip(cell["spge"], cell["spg"]))
    row["seeds"] = len(cell["spge"])
    return row


def reproduce_censored(rows=CENSORED_ROWS, seeds=20, lam0_grid=CENSORED_LAM0_REDUCED,
                       record_timing=True):
    """Best-of-grid recovery per seed: ``lam0`` is picked by relative error to ``x*``."""
    runs, table = [], []
    for (m, n, s) in rows:
        cell = {"spge": [], "spg": []}
        for seed in range(seeds):
            for alg in ("spge", "spg"):
                best = None
                for lam0 in lam0_grid:
                    p = gen_censored(m, n, s, seed, lam0=lam0)
                    res = _quiet(_run, alg, p, CENSORED_CONFIG, False)
                    met = recovery_metrics(res.x_final, p.x_true, res)
                    if best is None or met.rel_err < best[1].rel_err:
                        best = (lam0, met, res, p)
                lam0, met, res, p = best
                rec = {"m": m, "n": n, "s": s, "seed": seed, "algorithm": alg,
                       "lam0": lam0, "lambda": p.penalty.lam, "v": p.penalty.v,
                       "time": res.wall_clock_s if record_timing else 0.0,
                       "rel_err": met.rel_err, "sparsity_rate": met.sparsity_rate,
                       "success_rate": met.success_rate, "support_size": met.support_size,
                       "iterations": res.iterations,
                       "termination_reason": res.termination_reason,
                       "x_final": [float(c) for c in res.x_final]}
                runs.append(rec)
                cell[alg].append(rec)
        table.append(_aggregate((m, n, s), cell, ("time", "rel_err", "sparsity_rate",
                                                  "success_rate", "support_size",
                                                  "iterations")))
    return table, runs


def _parse_rows(text, available):
    if not text:
        return available
    try:
        idx = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected row numbers, got {text!r}", "rows") from None
    if not idx or any(i < 1 or i > len(available) for i in idx):
        raise ConfigError(f"row numbers must lie in 1..{len(available)}", "rows")
    return tuple(available[i - 1] for i in idx)


def _print_table(header, rows):
    cells = [[str(_fmt_cell(r.get(h, ""))) if not isinstance(r.get(h), float)
              else f"{r[h]:.4g}" for h in header] for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for c in cells:
        print("  ".join(x.ljust(w) for x, w in zip(c, widths)))


def cmd_reproduce(example, seeds=None, out=None, rows=None, full_grid=False,
                  record_timing=True) -> int:
    out_dir = resolve_output_dir(out) / f"example{example}"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if seeds is not None and seeds < 1:
            raise ConfigError("must be a positive integer", "seeds")
        n_seeds = 20 if seeds is None else seeds
        if example == 1:
            table = reproduce_toy(repeats=n_seeds, record_timing=record_timing)
            flat = [{k: (_fmt_cell(v) if isinstance(v, list) else v) for k, v in r.items()}
                    for r in table]
            write_csv(out_dir / "table.csv", TOY_COLUMNS, [[r[c] for c in TOY_COLUMNS] for r in flat])
            write_json(out_dir / "summary.json", {"example": 1, "rows": table,
                                                   "timing_repeats": n_seeds})
            _print_table(TOY_COLUMNS, table)
        elif example == 2:
            table, runs = reproduce_l1(_parse_rows(rows, L1_ROWS), n_seeds, record_timing, out_dir)
            _write_bench(out_dir, 2, table, runs)
        elif example == 3:
            grid = CENSORED_LAM0_FULL if full_grid else CENSORED_LAM0_REDUCED
            table, runs = reproduce_censored(_parse_rows(rows, CENSORED_ROWS), n_seeds, grid,
                                             record_timing)
            _write_bench(out_dir, 3, table, runs, lam0_grid=list(grid))
        else:
            raise ConfigError(f"must be 1, 2 or 3 (got {example})", "example")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out_dir}")
    return EXIT_OK


def _write_bench(out_dir, example, table, runs, **extra):
    header = list(table[0].keys())
    write_csv(out_dir / "table.csv", header, [[r[h] for h in header] for r in table])
    run_cols = [k for k in runs[0] if k != "x_final"]
    write_csv(out_dir / "runs.csv", run_cols, [[r[c] for c in run_cols] for r in runs])
    write_json(out_dir / "summary.json", {"example": example, "rows": table, **extra})
    short = ["m", "n", "s"] + [h for h in header if h.endswith("_median")] + ["spge_faster_count"]
    _print_table(short, table)


# ---------------------------------------------------------------------------
# check / gen

def cmd_check(suite) -> int:
    if suite not in SUITES:
        print(f"config error: suite: must be one of {tuple(SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = _quiet(SUITES[suite])
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(result.summary())
    if not result.passed:
        print("worst cases:")
        for case in result.worst:
            print("  " + ", ".join(f"{k}={_num(v) if not isinstance(v, str) else v}"
                                   for k, v in case.items()))
        return EXIT_CHECK
    return EXIT_OK


def cmd_gen(kind, out, m=None, n=None, s=None, seed=0, lam=None, v=None, lam0=None,
            noise=0.0) -> int:
    try:
        rc = RunConfig(problem=kind, m=m, n=n, s=s, lam=lam, v=v, lam0=lam0, noise=noise,
                       seeds=(seed,))
        if kind == "file":
            raise ConfigError("gen needs a generator kind", "kind")
        problem = rc.build_problem(seed)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        save_instance(problem, out)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="spge", description=(
        "Smoothing proximal gradient with extrapolation for capped-l1 sparse regression."))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the solver(s) described by a config file")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides config and environment)")

    p = sub.add_parser("reproduce", help="rerun a benchmark table")
    p.add_argument("example", type=int, choices=(1, 2, 3))
    p.add_argument("--seeds", type=int, default=None,
                   help="random instances per row (example 1: timing repeats); default 20")
    p.add_argument("--out", help="output directory")
    p.add_argument("--rows", help="comma-separated subset of table rows, e.g. 1 or 1,2")
    p.add_argument("--full-grid", action="store_true",
                   help="example 3: sweep lam0 over 0.001:0.001:0.1")
    p.add_argument("--no-timing", action="store_true",
                   help="write zeros for timings so outputs are byte-reproducible")

    p = sub.add_parser("check", help="run a self-check suite")
    p.add_argument("suite", choices=tuple(SUITES))

    p = sub.add_parser("gen", help="write a generated instance to a file")
    p.add_argument("kind", choices=("toy", "l1_regression", "censored"))
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lam", type=float)
    p.add_argument("--v", type=float)
    p.add_argument("--lam0", type=float)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--out", required=True)
    return ap


def _one_line_warning(message, category, filename, lineno, line=None):
    return f"warning: {message}\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.formatwarning = _one_line_warning
        warnings.simplefilter("once", RuntimeWarning)
        return _dispatch(args)


def _dispatch(args) -> int:
    if args.command == "solve":
        return cmd_solve(args.config, args.out)
    if args.command == "reproduce":
        return cmd_reproduce(args.example, args.seeds, args.out, args.rows, args.full_grid,
                             not args.no_timing)
    if args.command == "check":
        return cmd_check(args.suite)
    return cmd_gen(args.kind, args.out, args.m, args.n, args.s, args.seed, args.lam,
                   args.v, args.lam0, args.noise)


if __name__ == "__main__":
    sys.exit(main())
