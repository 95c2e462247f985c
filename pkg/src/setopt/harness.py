"""Batch experiments: seeded starting points, aggregate statistics, exports.

Starting points come from NumPy's Philox4x64 counter-based generator.  Run
``r`` of a batch with seed ``s`` uses ``Philox(key=[s, r])`` and draws
``x0 = low + (high - low) * U[0, 1)^n`` from it, so each run's start depends
only on ``(s, r)`` and not on scheduling.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .cone import Cone
from .errors import UnsupportedDimension
from .instances import Instance, evaluate
from .solver import RunTrace, SolveParams, solve
from .svg import Plot


def start_point(box: np.ndarray, seed: int, run: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[seed, run]))
    box = np.asarray(box, dtype=float)
    return box[:, 0] + (box[:, 1] - box[:, 0]) * gen.random(box.shape[0])


@dataclass
class RunSummary:
    run: int
    x0: np.ndarray
    status: str
    iterations: int
    final_error: float
    x_final: np.ndarray
    cpu_seconds: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status == "StrongStationaryDeclared"


@dataclass
class BatchStats:
    instance: str
    seed: int
    runs: int
    per_run: list[RunSummary]
    traces: list[RunTrace] = field(default_factory=list, repr=False)

    @property
    def solved_runs(self) -> list[RunSummary]:
        return [r for r in self.per_run if r.solved]

    @property
    def solved(self) -> int:
        return len(self.solved_runs)

    def _iters(self):
        return [r.iterations for r in self.solved_runs]

    @property
    def iterations_min(self) -> int | None:
        its = self._iters()
        return min(its) if its else None

    @property
    def iterations_mean(self) -> float | None:
        its = self._iters()
        return float(np.mean(its)) if its else None

    @property
    def iterations_max(self) -> int | None:
        its = self._iters()
        return max(its) if its else None

    @property
    def mean_cpu_seconds(self) -> float | None:
        solved = self.solved_runs
        return float(np.mean([r.cpu_seconds for r in solved])) if solved else None

    def same_results(self, other: "BatchStats") -> bool:
        """Equality ignoring timings."""
        if (self.instance, self.seed, self.runs) != (other.instance, other.seed, other.runs):
            return False
        return all(
            a.run == b.run and a.status == b.status and a.iterations == b.iterations
            and a.final_error == b.final_error
            and np.array_equal(a.x0, b.x0) and np.array_equal(a.x_final, b.x_final)
            for a, b in zip(self.per_run, other.per_run)
        ) and len(self.per_run) == len(other.per_run)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SETOPT_THREADS", "1")))
    except ValueError:
        return 1


def run_batch(instance: Instance, cone: Cone | None = None, box=None, runs: int = 100,
              seed: int = 0, params: SolveParams | None = None,
              keep_traces: bool = False, workers: int | None = None) -> BatchStats:
    """Solve from ``runs`` seeded uniform starting points in ``box``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    cone = cone or instance.default_cone()
    box = instance.sampling_box if box is None else np.asarray(box, dtype=float)
    params = params or SolveParams()

    def one(r: int):
        x0 = start_point(box, seed, r)
        trace = solve(instance, cone, x0, params)
        summary = RunSummary(r, x0, trace.status.value, trace.iterations,
                             trace.final_error, trace.x_final.copy(), trace.elapsed)
        return summary, trace

    workers = workers or _workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(runs)))
    else:
        results = [one(r) for r in range(runs)]
    stats = BatchStats(instance.name, seed, runs, [s for s, _ in results])
    if keep_traces:
        stats.traces = [t for _, t in results]
    return stats


# --------------------------------------------------------------------------
# Statistics export

CSV_COLUMNS = [
    "record", "run", "status", "iterations", "final_error", "x0", "x_final",
    "runs", "solved", "iterations_min", "iterations_mean", "iterations_max",
    "iterations_mean_4dp",
]
TIMING_COLUMNS = ["cpu_seconds", "mean_cpu_seconds", "mean_cpu_seconds_4dp"]


def _vec(v) -> str:
    return " ".join(repr(float(x)) for x in np.ravel(v))


def _num(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def _4dp(v) -> str:
    return "" if v is None else f"{v:.4f}"


def stats_summary(stats: BatchStats, include_timing: bool = False) -> dict:
    out = {
        "instance": stats.instance,
        "seed": stats.seed,
        "runs": stats.runs,
        "solved": stats.solved,
        "iterations": [stats.iterations_min, stats.iterations_mean, stats.iterations_max],
    }
    if include_timing:
        out["mean_cpu_seconds"] = stats.mean_cpu_seconds
    return out


def export_stats(stats: BatchStats, path, fmt: str = "csv", include_timing: bool = False) -> Path:
    """Write the summary plus one row per run.

    Timings are excluded unless ``include_timing`` is set, which keeps the
    file identical across repeated runs with the same seed.
    """
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValueError(f"unsupported format {fmt!r}")
    try:
        if fmt == "json":
            doc = stats_summary(stats, include_timing)
            doc["per_run"] = [
                {"run": r.run, "x0": r.x0.tolist(), "status": r.status, "iterations": r.iterations,
                 "final_error": r.final_error, "x_final": r.x_final.tolist(),
                 **({"cpu_seconds": r.cpu_seconds} if include_timing else {})}
                for r in stats.per_run
            ]
            path.write_text(json.dumps(doc, indent=2) + "\n")
            return path
        columns = CSV_COLUMNS + (TIMING_COLUMNS if include_timing else [])
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            summary = {
                "record": "summary", "runs": stats.runs, "solved": stats.solved,
                "iterations_min": _num(stats.iterations_min),
                "iterations_mean": _num(stats.iterations_mean),
                "iterations_max": _num(stats.iterations_max),
                "iterations_mean_4dp": _4dp(stats.iterations_mean),
            }
            if include_timing:
                summary["mean_cpu_seconds"] = _num(stats.mean_cpu_seconds)
                summary["mean_cpu_seconds_4dp"] = _4dp(stats.mean_cpu_seconds)
            writer.writerow(summary)
            for r in stats.per_run:
                row = {
                    "record": "run", "run": r.run, "status": r.status,
                    "iterations": r.iterations, "final_error": repr(float(r.final_error)),
                    "x0": _vec(r.x0), "x_final": _vec(r.x_final),
                }
                if include_timing:
                    row["cpu_seconds"] = repr(r.cpu_seconds)
                writer.writerow(row)
    except OSError as exc:
        raise OSError(f"could not write statistics to {path}: {exc}") from exc
    return path


def read_stats_csv(path, instance: str = "", seed: int = 0) -> BatchStats:
    """Parse a file written by :func:`export_stats` back into :class:`BatchStats`."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    summary = rows[0]
    per_run = []
    for row in rows[1:]:
        per_run.append(RunSummary(
            run=int(row["run"]),
            x0=np.array([float(v) for v in row["x0"].split()]),
            status=row["status"],
            iterations=int(row["iterations"]),
            final_error=float(row["final_error"]),
            x_final=np.array([float(v) for v in row["x_final"].split()]),
            cpu_seconds=float(row.get("cpu_seconds") or 0.0),
        ))
    return BatchStats(instance, seed, int(summary["runs"]), per_run)


# --------------------------------------------------------------------------
# Geometry helpers


def hull_distance(points, x) -> float:
    """Smallest ``s`` with ``|x - conv(points)|_inf <= s``, by linear programming."""
    P = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    N, n = P.shape
    # variables: lambda (N), s
    c = np.zeros(N + 1)
    c[-1] = 1.0
    A_ub = np.block([[P.T, -np.ones((n, 1))], [-P.T, -np.ones((n, 1))]])
    b_ub = np.concatenate([x, -x])
    A_eq = np.concatenate([np.ones(N), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (N + 1), method="highs")
    if not res.success:
        raise RuntimeError(f"hull membership LP failed: {res.message}")
    return float(res.x[-1])


def in_hull(points, x, slack: float = 1e-6) -> bool:
    return hull_distance(points, x) <= slack


def location_hull_points(instance: Instance) -> np.ndarray:
    """Points whose convex hull is the set C containing all local solutions of test2."""
    locs = np.asarray(instance.meta["locations"])
    grid = np.asarray(instance.meta["grid"])
    return (locs[:, None, :] + grid[None, :, :]).reshape(-1, 2)


# --------------------------------------------------------------------------
# Plots


def export_trajectory_plot(trace: RunTrace, instance: Instance, path) -> Path:
    """Image-space plot of ``F(x_k)``: start black, intermediate gray, final red."""
    if instance.m != 2:
        raise UnsupportedDimension(f"trajectory plots need m = 2, instance has m = {instance.m}")
    plot = Plot(f"{instance.name}: F(x_k), {trace.iterations} iterations", "f_1", "f_2")
    if instance.n == 1:
        lo, hi = instance.sampling_box[0]
        grid = np.linspace(lo, hi, 401)
        curves = np.array([evaluate(instance, [g]) for g in grid])  # (401, p, 2)
        for i in range(instance.p):
            plot.polyline(curves[:, i, :], "curve", "#b0c4de", 0.8)
    records = trace.records
    if len(records) > 2:
        plot.points(np.vstack([r.values for r in records[1:-1]]), "iterate", "#999999", 2.0)
    plot.points(records[0].values, "initial", "black", 3.0)
    if len(records) > 1:
        plot.points(records[-1].values, "final", "red", 3.0)
    return plot.save(path)


def export_solutions_plot(stats: BatchStats, instance: Instance, path) -> Path:
    """Argument-space plot of the solved final points (red)."""
    if instance.n != 2:
        raise UnsupportedDimension(f"solution plots need n = 2, instance has n = {instance.n}")
    plot = Plot(f"{instance.name}: {stats.solved} solutions of {stats.runs} runs", "x_1", "x_2")
    if "locations" in instance.meta and "grid" in instance.meta:
        plot.points(location_hull_points(instance), "landmark-grid", "#999999", 1.5)
        plot.points(np.asarray(instance.meta["locations"]), "landmark", "black", 3.5)
    finals = [r.x_final for r in stats.solved_runs]
    if finals:
        plot.points(np.vstack(finals), "solution", "red", 2.5)
    return plot.save(path)
