"""Descent method for set optimization under the lower set less relation."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import direction
from .cone import Cone, in_cone, scalarize
from .direction import TOL_STAT, certificate_residual, stationarity_certificate
from .errors import CapExceeded, LineSearchFailed, NonConvergence
from .instances import Instance, evaluate, jacobians
from .partition import DEFAULT_CAP, decompose_values


class Status(str, Enum):
    STATIONARY = "StrongStationaryDeclared"
    MAX_ITERATIONS = "MaxIterations"
    LINE_SEARCH_FAILED = "LineSearchFailed"
    CAP_EXCEEDED = "PartitionCapExceeded"
    SUBPROBLEM_FAILURE = "SubproblemFailure"


@dataclass(frozen=True)
class SolveParams:
    beta: float = 1e-4
    nu: float = 0.5
    tol_stat: float = TOL_STAT
    max_iters: int = 200
    max_halvings: int = 60
    partition_cap: int = DEFAULT_CAP
    record_trace: bool = True

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0 < self.nu < 1:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol_stat <= 0 or self.max_halvings < 0 or self.partition_cap < 1:
            raise ValueError("tol_stat, max_halvings and partition_cap must be positive")


@dataclass
class IterationRecord:
    k: int
    x: np.ndarray
    values: np.ndarray
    omega: int
    partition_size: int
    a: tuple[int, ...] | None
    u: np.ndarray | None
    phi: float | None
    t: float | None = None
    wall_nanos: int = 0
    per_tuple_values: list = field(default_factory=list)


@dataclass
class RunTrace:
    params: SolveParams
    x0: np.ndarray
    records: list[IterationRecord] = field(default_factory=list)
    status: Status | None = None
    certificate: np.ndarray | None = None
    certificate_residual: float | None = None
    final_error: float = float("nan")
    iterations: int = 0
    elapsed: float = 0.0
    message: str = ""

    @property
    def solved(self) -> bool:
        return self.status is Status.STATIONARY

    @property
    def x_final(self) -> np.ndarray:
        return self.records[-1].x

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    def steps(self):
        """Consecutive ``(record_k, record_k+1)`` pairs for completed iterations."""
        return [(a, b) for a, b in zip(self.records, self.records[1:]) if a.t is not None]

    def same_path(self, other: "RunTrace") -> bool:
        """Bitwise equality of everything except wall-clock timings."""
        if (self.status, self.iterations, len(self.records)) != (other.status, other.iterations, len(other.records)):
            return False
        for r, s in zip(self.records, other.records):
            if not (np.array_equal(r.x, s.x) and np.array_equal(r.values, s.values)
                    and r.a == s.a and r.t == s.t and r.phi == s.phi
                    and np.array_equal(r.u, s.u)):
                return False
        return True


def armijo(instance: Instance, cone: Cone, x, a, u, params: SolveParams,
           values: np.ndarray | None = None, jac: np.ndarray | None = None) -> float:
    """Largest ``nu**q`` giving sufficient decrease for every selection in ``a``.

    The test is ``f(x + t u) - f(x) - beta t J u in -K`` for each ``f = f^{a_j}``.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    idx = np.asarray(a, dtype=int)
    if values is None:
        values = evaluate(instance, x)
    if jac is None:
        jac = jacobians(instance, x)
    base = values[idx]
    slope = jac[idx] @ u
    t = 1.0
    for _ in range(params.max_halvings + 1):
        trial = evaluate(instance, x + t * u)[idx]
        excess = trial - base - params.beta * t * slope
        if np.all(in_cone(cone, -excess)):
            return t
        t *= params.nu
    raise LineSearchFailed(f"no step nu^q with q <= {params.max_halvings} gives sufficient decrease")


def solve(instance: Instance, cone: Cone, x0, params: SolveParams | None = None) -> RunTrace:
    """Run the descent method from ``x0``; terminal conditions are reported in the trace."""
    params = params or SolveParams()
    x = np.asarray(x0, dtype=float).ravel().copy()
    trace = RunTrace(params, x.copy())
    start = time.perf_counter_ns()
    values = evaluate(instance, x)
    k = 0
    while True:
        decomp = decompose_values(values, cone)
        jac = jacobians(instance, x)
        record = IterationRecord(k, x, values, decomp.omega, decomp.partition_size, None, None, None)
        try:
            res = direction.best_direction(instance, cone, x, params.partition_cap, decomp, jac)
        except CapExceeded as exc:
            trace.status, trace.message = Status.CAP_EXCEEDED, str(exc)
        except NonConvergence as exc:
            trace.status, trace.message = Status.SUBPROBLEM_FAILURE, str(exc)
        else:
            record.a, record.u, record.phi = res.a, res.u, res.phi
            record.per_tuple_values = res.per_tuple_values
            trace.final_error = res.norm_u
            if res.norm_u < params.tol_stat:
                trace.status = Status.STATIONARY
                trace.certificate = stationarity_certificate(res, cone, params.tol_stat)
                trace.certificate_residual = certificate_residual(instance, x, res.a, trace.certificate)
            elif k >= params.max_iters:
                trace.status = Status.MAX_ITERATIONS
            else:
                try:
                    record.t = armijo(instance, cone, x, res.a, res.u, params, values, jac)
                except LineSearchFailed as exc:
                    trace.status, trace.message = Status.LINE_SEARCH_FAILED, str(exc)
        record.wall_nanos = time.perf_counter_ns() - start
        if params.record_trace or trace.status is not None:
            trace.records.append(record)
        if trace.status is not None:
            break
        x = x + record.t * record.u
        values = evaluate(instance, x)
        k += 1
    trace.iterations = k
    trace.elapsed = (time.perf_counter_ns() - start) * 1e-9
    return trace


def zeta(values, cone: Cone) -> float:
    """``inf_{y in A} psi_e(y)`` for a finite set ``A``."""
    return float(np.min(scalarize(cone, np.asarray(values))))


def descent_inequality_check(trace: RunTrace, cone: Cone, slack: float = 1e-8) -> bool:
    """Check ``zeta(F(x_{k+1})) <= zeta(F(x_k)) + beta t_k (phi_k - |u_k|^2 / 2)`` along the trace."""
    steps = trace.steps()
    if not steps:
        return True
    beta = trace.params.beta
    for cur, nxt in steps:
        bound = zeta(cur.values, cone) + beta * cur.t * (cur.phi - 0.5 * cur.u @ cur.u)
        if zeta(nxt.values, cone) > bound + slack:
            return False
    return True


# --------------------------------------------------------------------------
# JSON-lines trace export


def _floats(arr) -> list:
    return [float(v) for v in np.ravel(arr)]


def trace_records(trace: RunTrace) -> list[dict]:
    rows = []
    for r in trace.records:
        rows.append({
            "iteration": r.k,
            "x": _floats(r.x),
            "u": None if r.u is None else _floats(r.u),
            "phi": r.phi,
            "t": r.t,
            "omega": r.omega,
            "partition_size": r.partition_size,
            "tuple": None if r.a is None else list(r.a),
            "wall_nanos": r.wall_nanos,
        })
    rows.append({
        "status": trace.status.value,
        "iterations": trace.iterations,
        "final_error": trace.final_error,
        "x_final": _floats(trace.x_final),
        "partition_size": trace.final.partition_size,
        "certificate": None if trace.certificate is None else trace.certificate.tolist(),
        "certificate_residual": trace.certificate_residual,
        "message": trace.message,
    })
    return rows


def write_trace(trace: RunTrace, path) -> Path:
    path = Path(path)
    try:
        with open(path, "w") as fh:
            for row in trace_records(trace):
                fh.write(json.dumps(row) + "\n")
    except OSError as exc:
        raise OSError(f"could not write trace to {path}: {exc}") from exc
    return path
