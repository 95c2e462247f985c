import json
import re

import numpy as np
import pytest

from setopt import cli
from setopt.cone import make_orthant
from setopt.errors import UnsupportedDimension
from setopt.harness import (
    export_solutions_plot, export_stats, export_trajectory_plot, hull_distance, in_hull,
    read_stats_csv, run_batch, start_point,
)
from setopt.instances import builtin, from_selections
from setopt.solver import SolveParams, solve


def circles(svg: str, css_class: str | None = None) -> int:
    if css_class is None:
        return svg.count("<circle")
    block = re.search(rf'<g class="{css_class}"[^>]*>(.*?)</g>', svg, re.S)
    return 0 if block is None else block.group(1).count("<circle")


def test_start_points_reproducible():
    box = np.array([[-1.0, 1.0], [0.0, 10.0]])
    a = start_point(box, 5, 3)
    assert np.array_equal(a, start_point(box, 5, 3))
    assert not np.array_equal(a, start_point(box, 5, 4))
    assert (a >= box[:, 0]).all() and (a < box[:, 1]).all()


def test_csv_roundtrip(tmp_path):
    stats = run_batch(builtin("test1"), runs=6, seed=2)
    path = export_stats(stats, tmp_path / "s.csv")
    back = read_stats_csv(path, "test1", 2)
    assert back.same_results(stats)
    assert back.iterations_mean == stats.iterations_mean
    header = path.read_text().splitlines()[0]
    assert "cpu_seconds" not in header
    timed = export_stats(stats, tmp_path / "t.csv", include_timing=True)
    assert "mean_cpu_seconds" in timed.read_text().splitlines()[0]


def test_json_export(tmp_path):
    stats = run_batch(builtin("test2"), runs=3, seed=1)
    doc = json.loads(export_stats(stats, tmp_path / "s.json", "json").read_text())
    assert doc["solved"] == 3 and len(doc["per_run"]) == 3


def test_no_solved_runs(tmp_path):
    quartic = from_selections("quartic", 1, 1, [lambda x: x[0] ** 4],
                              [lambda x: [[4 * x[0] ** 3]]], [1, 2])
    stats = run_batch(quartic, runs=4, params=SolveParams(max_halvings=0))
    assert stats.solved == 0 and stats.iterations_mean is None and stats.mean_cpu_seconds is None
    text = export_stats(stats, tmp_path / "e.csv").read_text()
    assert text.splitlines()[1].startswith("summary,,,,,,,4,0,,,,")


def test_threads_do_not_change_results(monkeypatch):
    inst = builtin("test1")
    serial = run_batch(inst, runs=8, seed=4)
    monkeypatch.setenv("SETOPT_THREADS", "4")
    assert run_batch(inst, runs=8, seed=4).same_results(serial)


def test_hull():
    square = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    assert in_hull(square, [0.5, 0.5])
    assert hull_distance(square, [2.0, 0.5]) == pytest.approx(1.0)


def test_trajectory_plot_point_counts(tmp_path):
    for name, x0, p in (("test1", [-4.5], 5), ("test3", [8.0, -8.0], 100)):
        inst = builtin(name)
        trace = solve(inst, make_orthant(2), x0)
        svg = export_trajectory_plot(trace, inst, tmp_path / f"{name}.svg").read_text()
        assert circles(svg) == p * (trace.iterations + 1)
        assert circles(svg, "initial") == p and circles(svg, "final") == p


def test_solution_plot(tmp_path):
    inst = builtin("test2")
    stats = run_batch(inst, runs=5)
    svg = export_solutions_plot(stats, inst, tmp_path / "s.svg").read_text()
    assert circles(svg, "solution") == 5 and circles(svg, "landmark") == 3
    with pytest.raises(UnsupportedDimension):
        export_solutions_plot(stats, builtin("test1"), tmp_path / "x.svg")
    with pytest.raises(UnsupportedDimension):
        export_trajectory_plot(solve(inst, make_orthant(3), [1.0, 1.0]), inst, tmp_path / "y.svg")


# -- command line -----------------------------------------------------------


def test_cli_solve(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    assert cli.main(["solve", "--instance", "test2", "--x0", "25,25", "--trace", str(trace)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "StrongStationaryDeclared"
    assert trace.exists()


def test_cli_batch(tmp_path, capsys):
    out = tmp_path / "stats.csv"
    plots = tmp_path / "plots"
    assert cli.main(["batch", "--instance", "test1", "--runs", "5", "--out", str(out),
                     "--plots", str(plots)]) == 0
    assert out.exists() and (plots / "test1_trajectory.svg").exists()
    assert json.loads(capsys.readouterr().out)["runs"] == 5


def test_cli_check_and_minelems(tmp_path, capsys):
    assert cli.main(["check", "--instance", "test3", "--points", "5"]) == 0
    pts = tmp_path / "p.csv"
    pts.write_text("1,2\n2,1\n3,3\n1,2\n")
    capsys.readouterr()
    assert cli.main(["minelems", "--points", str(pts), "--cone", "orthant:2"]) == 0
    assert json.loads(capsys.readouterr().out)["indices"] == [0, 1]


def test_cli_usage_errors(capsys):
    assert cli.main(["solve", "--instance", "nope", "--x0", "1"]) == 1
    assert cli.main(["solve", "--instance", "test1", "--x0", "1,2"]) == 1
    assert cli.main(["solve", "--instance", "test1", "--x0", "abc"]) == 1
    with pytest.raises(SystemExit) as info:
        cli.main(["solve"])
    assert info.value.code == 1


def test_cli_numerical_failure(capsys):
    with np.errstate(over="ignore", invalid="ignore"):
        assert cli.main(["solve", "--instance", "test3", "--x0", "2000,0"]) == 2
    assert "non-finite" in capsys.readouterr().err
