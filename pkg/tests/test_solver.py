import json

import numpy as np
import pytest

from oracles import scalar_backtracking
from setopt import direction
from setopt.cone import make_orthant
from setopt.errors import LineSearchFailed, NonConvergence
from setopt.finite_sets import strict_lower_less
from setopt.harness import in_hull, location_hull_points
from setopt.instances import builtin, from_selections, quadratic_family
from setopt.solver import (
    SolveParams, Status, armijo, descent_inequality_check, solve, trace_records, write_trace, zeta,
)

K1 = make_orthant(1)
K2 = make_orthant(2)


def quartic():
    return from_selections("quartic", 1, 1, [lambda x: x[0] ** 4], [lambda x: [[4 * x[0] ** 3]]], [-2, 2])


def test_armijo_full_step_on_quadratic():
    inst = quadratic_family("half", [[[0.0]]])
    assert armijo(inst, K1, [1.0], (0,), [-1.0], SolveParams()) == 1.0


@pytest.mark.parametrize("x", [1.0, -0.7, 1.9])
def test_armijo_matches_scalar_backtracking(x):
    u = -4 * x ** 3
    expected = scalar_backtracking(lambda s: s ** 4, lambda s: 4 * s ** 3, x, u)
    assert armijo(quartic(), K1, [x], (0,), [u], SolveParams()) == expected


def test_armijo_failure():
    with pytest.raises(LineSearchFailed):
        armijo(quartic(), K1, [1.0], (0,), [-4.0], SolveParams(max_halvings=0))


def test_params_validation():
    for bad in ({"beta": 0.0}, {"nu": 1.0}, {"max_iters": 0}, {"tol_stat": -1.0}):
        with pytest.raises(ValueError):
            SolveParams(**bad)


def test_scalar_quadratic_converges():
    inst = quadratic_family("q", [[[3.0, -1.0]]])
    trace = solve(inst, K1, [-20.0, 40.0])
    assert trace.solved and trace.iterations <= 30
    assert np.allclose(trace.x_final, [3.0, -1.0], atol=1e-4)


def test_test2_from_corner():
    inst = builtin("test2")
    trace = solve(inst, make_orthant(3), [25.0, 25.0])
    assert trace.status is Status.STATIONARY and trace.iterations <= 5
    assert in_hull(location_hull_points(inst), trace.x_final)


def test_descent_along_test3_path():
    inst = builtin("test3")
    trace = solve(inst, K2, [8.0, -8.0])
    assert trace.steps()
    for cur, nxt in trace.steps():
        assert strict_lower_less(nxt.values, cur.values, K2)
        assert zeta(nxt.values, K2) < zeta(cur.values, K2)
    assert descent_inequality_check(trace, K2)


def test_certificate_on_stationary_run():
    trace = solve(builtin("test1"), K2, [-3.0])
    assert trace.solved
    assert trace.certificate.shape == (trace.final.omega, 2)
    assert (trace.certificate >= 0).all() and trace.certificate.sum() > 0
    assert trace.certificate_residual <= 2 * trace.params.tol_stat


def test_determinism():
    inst = builtin("test3")
    a = solve(inst, K2, [10.0, 3.0])
    b = solve(inst, K2, [10.0, 3.0])
    assert a.same_path(b)


def test_max_iterations():
    trace = solve(builtin("test3"), K2, [20.0, 20.0], SolveParams(max_iters=1))
    assert trace.status is Status.MAX_ITERATIONS and trace.iterations == 1
    assert len(trace.records) == 2 and trace.final.t is None


def test_cap_exceeded_status():
    trace = solve(builtin("test1"), K2, [0.0], SolveParams(partition_cap=4))
    assert trace.status is Status.CAP_EXCEEDED and "cap is 4" in trace.message


def test_subproblem_failure_status(monkeypatch):
    def broken(*args, **kw):
        raise NonConvergence(np.zeros(1), np.ones(1), 1.0, 1000)

    monkeypatch.setattr(direction, "solve_tuple", broken)
    trace = solve(builtin("test1"), K2, [1.0])
    assert trace.status is Status.SUBPROBLEM_FAILURE


def test_line_search_status():
    trace = solve(quartic(), K1, [1.0], SolveParams(max_halvings=0))
    assert trace.status is Status.LINE_SEARCH_FAILED


def test_record_trace_off_keeps_final_record():
    trace = solve(builtin("test1"), K2, [-3.0], SolveParams(record_trace=False))
    assert len(trace.records) == 1 and trace.solved


def test_trace_jsonl(tmp_path):
    trace = solve(builtin("test1"), K2, [-4.5])
    path = write_trace(trace, tmp_path / "t.jsonl")
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(lines) == len(trace.records) + 1
    assert set(lines[0]) >= {"iteration", "x", "u", "phi", "t", "omega", "tuple", "wall_nanos"}
    assert lines[-1]["status"] == "StrongStationaryDeclared"
    assert lines[-1]["certificate"] is not None
    assert trace_records(trace)[-1]["iterations"] == trace.iterations
