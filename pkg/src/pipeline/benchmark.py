"""
Benchmark protocols

worst: operators generated by depth-2n random circuits, n over a range.
sweep: fixed n, generation depth over a range (close-to-optimal regime).

Every task draws its operator from default_rng([seed, n, gen_depth, sample]),
so results do not depend on the number of worker processes.
"""
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Tuple, Union

import pandas as pd
from loguru import logger

from src.core.circuit import random_circuit, simulate
from src.models.schemas import BenchReport, BenchRow, PortfolioSpec
from src.synthesizers.portfolio import run_portfolio

CSV_COLUMNS = ["n", "method", "sample", "gen_depth", "depth", "cnots", "ms"]

Task = Tuple[int, int, int, int, List[str], bool]


def _run_task(task: Task) -> List[BenchRow]:
    n, gen_depth, sample, seed, methods, timing = task
    operator = simulate(random_circuit(n, gen_depth, seed=[seed, n, gen_depth, sample]))
    _, outcomes = run_portfolio(operator, PortfolioSpec(methods=methods, seed=seed), timing=timing)
    return [
        BenchRow(
            n=n,
            method=o.method,
            sample=sample,
            gen_depth=gen_depth,
            depth=o.result.depth if o.ok else None,
            cnots=o.result.cnot_count if o.ok else None,
            ms=round(o.ms, 3),
        )
        for o in outcomes
    ]


def _run_tasks(tasks: Sequence[Task], jobs: int) -> List[BenchRow]:
    rows: List[BenchRow] = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_run_task, tasks):
                rows.extend(chunk)
    else:
        for task in tasks:
            rows.extend(_run_task(task))
    return rows


def bench_worst(n_min: int, n_max: int, samples: int, methods: List[str], seed: int = 0,
                jobs: int = 1, timing: bool = True) -> BenchReport:
    """
    Worst-case protocol: `samples` operators per n from depth-2n random circuits

    Failed methods appear with an empty depth.
    """
    if n_min < 2:
        raise ValueError("n_min must be at least 2")
    PortfolioSpec(methods=methods, seed=seed)
    tasks = [(n, 2 * n, s, seed, list(methods), timing)
             for n in range(n_min, n_max + 1) for s in range(samples)]
    logger.info(f"📊 Worst-case benchmark: n={n_min}..{n_max}, {samples} samples, {len(methods)} methods")
    return BenchReport(protocol="worst", seed=seed, rows=_run_tasks(tasks, jobs))


def bench_sweep(n: int, depth_min: int, depth_max: int, samples: int, methods: List[str],
                seed: int = 0, jobs: int = 1, timing: bool = True) -> BenchReport:
    """Close-to-optimal protocol: operators of n wires from circuits of every depth in the range"""
    if n < 2:
        raise ValueError("n must be at least 2")
    PortfolioSpec(methods=methods, seed=seed)
    tasks = [(n, d, s, seed, list(methods), timing)
             for d in range(depth_min, depth_max + 1) for s in range(samples)]
    logger.info(f"📊 Depth sweep: n={n}, depth {depth_min}..{depth_max}, {samples} samples")
    return BenchReport(protocol="sweep", seed=seed, rows=_run_tasks(tasks, jobs))


def report_frame(report: BenchReport) -> pd.DataFrame:
    frame = pd.DataFrame([row.model_dump() for row in report.rows], columns=CSV_COLUMNS)
    return frame.astype({"n": "Int64", "sample": "Int64", "gen_depth": "Int64",
                         "depth": "Int64", "cnots": "Int64", "ms": "float64"})


def write_csv(report: BenchReport, target: Union[str, Path, TextIO, None] = None) -> None:
    """CSV with header n,method,sample,gen_depth,depth,cnots,ms (stdout when no target)"""
    frame = report_frame(report)
    if target is None:
        target = sys.stdout
    if isinstance(target, (str, Path)):
        Path(target).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, lineterminator="\n")


def summarize(report: BenchReport, by_gen_depth: Optional[bool] = None) -> pd.DataFrame:
    """
    Mean/min/max depth per (n, method), plus per generation depth for sweeps

    ratio is mean depth / n; failed runs are left out of the statistics and
    counted in `failures`.
    """
    frame = report_frame(report)
    if frame.empty:
        return pd.DataFrame(columns=["n", "method", "mean_depth", "min_depth", "max_depth",
                                     "ratio", "failures"])
    if by_gen_depth is None:
        by_gen_depth = report.protocol == "sweep"
    keys = ["n", "gen_depth", "method"] if by_gen_depth else ["n", "method"]
    frame["failed"] = frame["depth"].isna()
    frame["depth_f"] = frame["depth"].astype("float64")
    grouped = frame.groupby(keys, sort=True)
    summary = grouped.agg(
        mean_depth=("depth_f", "mean"),
        min_depth=("depth_f", "min"),
        max_depth=("depth_f", "max"),
        failures=("failed", "sum"),
    ).reset_index()
    summary["ratio"] = summary["mean_depth"] / summary["n"].astype("float64")
    return summary
