"""
Tests for the benchmark protocols
Run: pytest src/pipeline/test_benchmark.py
"""
import io

import pytest

from src.pipeline.benchmark import CSV_COLUMNS, bench_sweep, bench_worst, summarize, write_csv
from src.utils.config import reset_settings

METHODS = ["gaussian", "kutin", "dacsynth"]


def _csv(report) -> str:
    buffer = io.StringIO()
    write_csv(report, buffer)
    return buffer.getvalue()


def test_zero_samples_gives_header_only():
    report = bench_worst(2, 4, 0, METHODS)
    assert report.rows == []
    assert _csv(report) == ",".join(CSV_COLUMNS) + "\n"
    assert summarize(report).empty


def test_worst_protocol_rows():
    report = bench_worst(3, 5, 2, METHODS, seed=1, timing=False)
    assert len(report.rows) == 3 * 2 * len(METHODS)
    assert {row.gen_depth for row in report.rows} == {6, 8, 10}
    assert all(row.depth is not None and row.ms == 0.0 for row in report.rows)


def test_same_seed_same_csv():
    first = _csv(bench_worst(4, 6, 2, METHODS, seed=7, timing=False))
    second = _csv(bench_worst(4, 6, 2, METHODS, seed=7, timing=False))
    assert first == second
    assert first.splitlines()[0] == "n,method,sample,gen_depth,depth,cnots,ms"


def test_worker_count_does_not_change_rows():
    serial = bench_worst(3, 4, 2, METHODS, seed=3, jobs=1, timing=False)
    parallel = bench_worst(3, 4, 2, METHODS, seed=3, jobs=2, timing=False)
    assert _csv(serial) == _csv(parallel)


def test_sweep_from_depth_zero():
    report = bench_sweep(6, 0, 0, 3, METHODS, timing=False)
    assert all(row.depth == 0 and row.cnots == 0 for row in report.rows)


def test_summary_per_generation_depth():
    report = bench_sweep(8, 1, 3, 2, ["dacsynth"], seed=2, timing=False)
    summary = summarize(report)
    assert list(summary["gen_depth"]) == [1, 2, 3]
    assert (summary["min_depth"] <= summary["mean_depth"]).all()
    assert (summary["mean_depth"] <= summary["max_depth"]).all()
    assert (summary["failures"] == 0).all()
    assert summary["ratio"].iloc[0] == pytest.approx(summary["mean_depth"].iloc[0] / 8)


def test_failed_methods_leave_empty_depth(monkeypatch):
    monkeypatch.setenv("LINSYNTH_GREEDY_MAX_WIRES", "2")
    reset_settings()
    try:
        report = bench_sweep(3, 1, 1, 2, ["greedy:H_sum", "kutin"], timing=False)
    finally:
        monkeypatch.delenv("LINSYNTH_GREEDY_MAX_WIRES")
        reset_settings()
    greedy_rows = [row for row in report.rows if row.method == "greedy:H_sum"]
    assert all(row.depth is None and row.cnots is None for row in greedy_rows)
    assert ",greedy:H_sum,0,1,,," in _csv(report)
    summary = summarize(report, by_gen_depth=False).set_index("method")
    assert summary.loc["greedy:H_sum", "failures"] == 2
    assert summary.loc["kutin", "failures"] == 0


def test_argument_checks():
    with pytest.raises(ValueError):
        bench_worst(1, 3, 1, METHODS)
    with pytest.raises(ValueError):
        bench_sweep(1, 0, 1, 1, METHODS)
    with pytest.raises(ValueError):
        bench_worst(2, 3, 1, ["simulated-annealing"])


@pytest.mark.slow
def test_worst_case_means_at_n60():
    report = bench_worst(60, 60, 20, METHODS, seed=0, timing=False)
    assert not any(row.depth is None for row in report.rows)
    ratio = summarize(report).set_index("method")["ratio"]
    assert ratio["dacsynth"] <= 1.05
    assert 1.5 <= ratio["kutin"] <= 2.1
    assert 3.0 <= ratio["gaussian"] <= 4.0
    assert ratio["dacsynth"] < ratio["kutin"] < ratio["gaussian"]
    assert all(row.depth <= 4 * 60 for row in report.rows if row.method == "gaussian")
