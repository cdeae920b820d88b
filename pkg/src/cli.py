"""
linsynth command line

    linsynth synth MATRIX [--methods ...] [--out FILE]
    linsynth bench worst --n-min 2 --n-max 60 --samples 20 [--csv FILE]
    linsynth bench sweep --n 60 --depth-min 1 --depth-max 80 --samples 20 [--csv FILE]
    linsynth table2 --k 4 [--max-depth D] [--out FILE]
    linsynth resynth CIRCUIT.qc [--sidecar DIR] [--out FILE]
    linsynth ancilla --out-table FILE [--in-table FILE] [--operator FILE] [--out FILE]

Exit codes: 0 success, 1 usage, 2 input error, 3 no method succeeded.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger

from src.core.exceptions import LinSynthError, NoMethodSucceeded, VerificationError
from src.core.gf2core import read_matrix
from src.core.qcformat import circuit_to_qc, format_qc, read_qc, write_qc
from src.models.schemas import PortfolioSpec
from src.pipeline.benchmark import bench_sweep, bench_worst, summarize, write_csv
from src.pipeline.resynthesis import Resynthesizer, report_lines
from src.synthesizers.ancilla import AncillaSynthesizer, default_input_table
from src.synthesizers.bruteforce import BlockTables, bfs_depth_classes
from src.synthesizers.portfolio import Portfolio
from src.utils.config import get_settings
from src.utils.logging import configure_logging

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NO_METHOD = 3


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _spec(args) -> PortfolioSpec:
    methods = args.methods or get_settings().default_methods
    return PortfolioSpec.parse(methods, seed=args.seed)


def cmd_synth(args) -> int:
    matrix = read_matrix(args.matrix)
    portfolio = Portfolio(_spec(args), timing=not args.no_timing)
    best, outcomes = portfolio.process(matrix)
    for o in outcomes:
        if o.ok:
            line = f"{o.method:<18} depth {o.result.depth:>5}  cnots {o.result.cnot_count:>6}  {o.ms:9.1f} ms"
        else:
            line = f"{o.method:<18} failed: {o.failure}"
        print(line, file=sys.stderr)
    if best is None:
        raise NoMethodSucceeded("every method failed")
    print(f"chosen: {best.method} (depth {best.depth}, {best.cnot_count} CNOTs)", file=sys.stderr)
    out_perm = None if best.out_permutation.is_identity() else best.out_permutation.to_list()
    _emit(circuit_to_qc(best.circuit, out_permutation=out_perm), args.out)
    return EXIT_OK


def _finish_bench(report, args) -> int:
    write_csv(report, args.csv)
    if args.csv:
        print(summarize(report).to_string(index=False))
    return EXIT_OK


def cmd_bench_worst(args) -> int:
    methods = _spec(args).methods
    report = bench_worst(args.n_min, args.n_max, args.samples, methods, seed=args.seed,
                         jobs=args.jobs, timing=not args.no_timing)
    return _finish_bench(report, args)


def cmd_bench_sweep(args) -> int:
    methods = _spec(args).methods
    report = bench_sweep(args.n, args.depth_min, args.depth_max, args.samples, methods,
                         seed=args.seed, jobs=args.jobs, timing=not args.no_timing)
    return _finish_bench(report, args)


def cmd_table2(args) -> int:
    counts, table = bfs_depth_classes(args.k, max_depth=args.max_depth, jobs=args.jobs,
                                      checkpoint=args.checkpoint)
    print(f"k={args.k}: " + " ".join(f"{d}:{c}" for d, c in counts.items()))
    if args.out:
        BlockTables(args.k, shapes={(args.k, args.k): table}).save(args.out)
        logger.info(f"💾 Block table written to {args.out}")
    return EXIT_OK


def cmd_resynth(args) -> int:
    program = read_qc(args.circuit)
    resynthesizer = Resynthesizer(_spec(args), sidecar=args.sidecar, jobs=args.jobs)
    new_program, report = resynthesizer.process(program)
    if args.out:
        write_qc(new_program, args.out)
    else:
        sys.stdout.write(format_qc(new_program))
    stream = sys.stdout if args.out else sys.stderr
    for line in report_lines(report):
        print(line, file=stream)
    if args.report:
        Path(args.report).write_text(json.dumps(report.model_dump(), indent=2), encoding="utf-8")
    return EXIT_OK


def cmd_ancilla(args) -> int:
    table_out = read_matrix(args.out_table)
    if args.in_table:
        table_in = read_matrix(args.in_table)
    else:
        table_in = default_input_table(table_out.n_cols, table_out.n_rows)
    operator = read_matrix(args.operator) if args.operator else None
    portfolio = Portfolio(_spec(args), timing=False)
    synthesizer = AncillaSynthesizer(inner=portfolio.synthesize)
    result = synthesizer.process(table_in, table_out, operator)
    print(f"{result.method}: depth {result.depth}, {result.cnot_count} CNOTs", file=sys.stderr)
    out_perm = None if result.out_permutation.is_identity() else result.out_permutation.to_list()
    _emit(circuit_to_qc(result.circuit, out_permutation=out_perm), args.out)
    return EXIT_OK


def _common(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    parser.add_argument("--seed", type=int, default=settings.seed, help="RNG seed")
    parser.add_argument("--jobs", type=int, default=settings.jobs, help="worker processes")
    parser.add_argument("--methods", default=None, help="comma separated method tags")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="linsynth", description="Depth-oriented CNOT circuit synthesis")
    parser.add_argument("--log-level", default=None, help="loguru level (default from LINSYNTH_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    synth = commands.add_parser("synth", help="synthesize one operator")
    synth.add_argument("matrix", help="matrix text file")
    synth.add_argument("--out", help=".qc output (stdout when omitted)")
    synth.add_argument("--no-timing", action="store_true")
    _common(synth)
    synth.set_defaults(handler=cmd_synth)

    bench = commands.add_parser("bench", help="benchmark protocols")
    protocols = bench.add_subparsers(dest="protocol", required=True, parser_class=ArgumentParser)
    worst = protocols.add_parser("worst", help="operators from depth-2n random circuits")
    worst.add_argument("--n-min", type=int, default=2)
    worst.add_argument("--n-max", type=int, default=60)
    worst.add_argument("--samples", type=int, default=20)
    sweep = protocols.add_parser("sweep", help="operators from circuits of growing depth")
    sweep.add_argument("--n", type=int, default=60)
    sweep.add_argument("--depth-min", type=int, default=1)
    sweep.add_argument("--depth-max", type=int, default=80)
    sweep.add_argument("--samples", type=int, default=20)
    for sub, handler in ((worst, cmd_bench_worst), (sweep, cmd_bench_sweep)):
        sub.add_argument("--csv", help="CSV output (stdout when omitted)")
        sub.add_argument("--no-timing", action="store_true", help="write 0 in the ms column")
        _common(sub)
        sub.set_defaults(handler=handler)

    table2 = commands.add_parser("table2", help="count k×k classes by minimal reduction depth")
    table2.add_argument("--k", type=int, required=True)
    table2.add_argument("--max-depth", type=int, default=None)
    table2.add_argument("--out", help="write the block table (gzip JSON)")
    table2.add_argument("--checkpoint", help="resume/save the search here")
    table2.add_argument("--jobs", type=int, default=get_settings().jobs)
    table2.set_defaults(handler=cmd_table2)

    resynth = commands.add_parser("resynth", help="resynthesize the CNOT chunks of a .qc circuit")
    resynth.add_argument("circuit", help=".qc input")
    resynth.add_argument("--out", help=".qc output (stdout when omitted)")
    resynth.add_argument("--sidecar", help="directory with chunk-<i>.in / chunk-<i>.out parity tables")
    resynth.add_argument("--report", help="write the JSON report here")
    _common(resynth)
    resynth.set_defaults(handler=cmd_resynth)

    ancilla = commands.add_parser("ancilla", help="synthesize a parity-table transition with ancillas")
    ancilla.add_argument("--out-table", required=True, help="A_out matrix file (p×n)")
    ancilla.add_argument("--in-table", help="A_in matrix file (default [I; 0])")
    ancilla.add_argument("--operator", help="p×p operator for the direct method")
    ancilla.add_argument("--out", help=".qc output (stdout when omitted)")
    _common(ancilla)
    ancilla.set_defaults(handler=cmd_ancilla)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except VerificationError:
        raise
    except NoMethodSucceeded as e:
        print(f"linsynth: {e}", file=sys.stderr)
        return EXIT_NO_METHOD
    except LinSynthError as e:
        print(f"linsynth: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        print(f"linsynth: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"linsynth: {e}", file=sys.stderr)
        return EXIT_INPUT
