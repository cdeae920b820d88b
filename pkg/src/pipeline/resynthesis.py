"""
Chunk re-synthesis of Clifford+T style circuits

Every maximal CNOT run is simulated on the wires it touches and rebuilt by
the method portfolio. Non-CNOT gates are left alone, so T-count and T-depth
carry over. Residual wire permutations are not realized with gates; they are
pushed into the wire labels of everything that follows.
"""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger

from src.core.circuit import (
    depth_slices,
    linear_barrier_equivalent,
    make_result,
    metrics,
    simulate,
    split_cnot_chunks,
    t_depth,
)
from src.core.exceptions import VerificationError
from src.core.gf2core import BitMatrix, Permutation, multiply, read_matrix
from src.models.schemas import (
    ChunkOutcome,
    CnotChunk,
    CnotCircuit,
    Gate,
    PortfolioSpec,
    QcProgram,
    ResynthReport,
    Segment,
    SynthesisResult,
)
from src.synthesizers.ancilla import ancilla_synth, default_input_table
from src.synthesizers.portfolio import run_portfolio

ORIGINAL = "original"

Candidate = Tuple[str, SynthesisResult]
ChunkJob = Tuple[int, List[Gate], List[str], int, Optional[Tuple[BitMatrix, BitMatrix]]]


def load_sidecar(directory: Union[str, Path], index: int) -> Optional[Tuple[BitMatrix, BitMatrix]]:
    """(A_in, A_out) for chunk `index`; A_in defaults to fresh ancillas when only .out exists"""
    directory = Path(directory)
    out_path = directory / f"chunk-{index}.out"
    if not out_path.exists():
        return None
    table_out = read_matrix(out_path)
    in_path = directory / f"chunk-{index}.in"
    if in_path.exists():
        table_in = read_matrix(in_path)
    else:
        table_in = default_input_table(table_out.n_cols, table_out.n_rows)
    return table_in, table_out


def _chunk_candidates(job: ChunkJob) -> Tuple[List[int], List[Candidate]]:
    """Support wires of a chunk and every verified local circuit for it"""
    index, gates, methods, seed, tables = job
    support = sorted({w for g in gates for w in g.wires})
    local = {w: a for a, w in enumerate(support)}
    circuit = CnotCircuit(n_wires=len(support), gates=[g.relabel(local) for g in gates])
    operator = simulate(circuit)
    candidates: List[Candidate] = [
        (ORIGINAL, make_result(circuit, Permutation.identity(len(support)), ORIGINAL))
    ]
    _, outcomes = run_portfolio(operator, PortfolioSpec(methods=methods, seed=seed), timing=False)
    candidates += [(o.method, o.result) for o in outcomes if o.ok]
    if tables is not None:
        table_in, table_out = tables
        if table_in.n_rows != len(support) or multiply(operator, table_in) != table_out:
            logger.warning(f"chunk {index}: parity tables do not match the chunk, ignoring them")
        else:
            candidates.append(("ancilla-block", ancilla_synth(table_in, table_out)))
    return support, candidates


def _physical(segments: Sequence[Segment], mapping: Sequence[int]) -> List[Gate]:
    gates = []
    for segment in segments:
        inner = segment.circuit.gates if isinstance(segment, CnotChunk) else [segment.gate]
        gates.extend(g.relabel(mapping) for g in inner)
    return gates


def resynthesize(circuit: CnotCircuit, spec: PortfolioSpec,
                 sidecar: Optional[Union[str, Path]] = None,
                 jobs: int = 1) -> Tuple[CnotCircuit, ResynthReport]:
    """
    Rebuild every CNOT chunk of a circuit

    A replacement is kept only when the whole circuit gets no deeper, uses
    no more CNOTs and keeps its T-depth; the original chunk always passes.

    Returns:
        (new circuit, report); report.out_permutation[w] is the wire that
        carries original wire w at the end

    Raises:
        VerificationError: the rewritten circuit differs from the input
    """
    n = circuit.n_wires
    segments = split_cnot_chunks(circuit)
    chunk_positions = [i for i, s in enumerate(segments) if isinstance(s, CnotChunk)]
    jobs_list: List[ChunkJob] = []
    for ordinal, position in enumerate(chunk_positions):
        tables = load_sidecar(sidecar, ordinal) if sidecar is not None else None
        jobs_list.append((ordinal, segments[position].circuit.gates, list(spec.methods), spec.seed, tables))

    logger.info(f"🔧 Resynthesizing {len(jobs_list)} CNOT chunks on {n} wires")
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            prepared = list(pool.map(_chunk_candidates, jobs_list))
    else:
        prepared = [_chunk_candidates(job) for job in jobs_list]

    before = metrics(circuit)
    order = [ORIGINAL] + list(spec.methods) + ["ancilla-block"]
    mapping = list(range(n))
    emitted: List[Gate] = []
    current_depth, current_cnots = before.depth, before.cnot_count
    chunks: List[ChunkOutcome] = []
    wins: Dict[str, int] = {}
    only_wins: Dict[str, int] = {}
    tables_used = False
    next_chunk = 0

    for position, segment in enumerate(segments):
        if not isinstance(segment, CnotChunk):
            emitted.append(segment.gate.relabel(mapping))
            continue
        support, candidates = prepared[next_chunk]
        original = candidates[0][1]
        rest = segments[position + 1:]
        ranked = sorted(candidates, key=lambda c: (c[1].depth, c[1].cnot_count, order.index(c[0])))
        chosen = candidates[0]
        for method, result in ranked:
            wires = [mapping[w] for w in support]
            chunk_gates = [g.relabel(wires) for g in result.circuit.gates]
            updated = list(mapping)
            for a, x in enumerate(result.out_permutation.image):
                updated[support[a]] = mapping[support[x]]
            trial = CnotCircuit(n_wires=n, gates=emitted + chunk_gates + _physical(rest, updated))
            trial_depth = depth_slices(trial)
            if (trial_depth <= current_depth and trial.cnot_count <= current_cnots
                    and t_depth(trial) == before.t_depth):
                emitted.extend(chunk_gates)
                mapping = updated
                current_depth, current_cnots = trial_depth, trial.cnot_count
                tables_used = tables_used or method == "ancilla-block"
                chosen = (method, result)
                break

        methods_only = [(m, r) for m, r in candidates if m != ORIGINAL]
        best_methods: List[str] = []
        if methods_only:
            best_depth = min(r.depth for _, r in methods_only)
            best_methods = [m for m, r in methods_only if r.depth == best_depth]
            for m in best_methods:
                wins[m] = wins.get(m, 0) + 1
            if len(best_methods) == 1:
                only_wins[best_methods[0]] = only_wins.get(best_methods[0], 0) + 1
        chunks.append(ChunkOutcome(
            index=next_chunk,
            n_wires=len(support),
            original_depth=original.depth,
            original_cnots=original.cnot_count,
            depth=chosen[1].depth,
            cnots=chosen[1].cnot_count,
            chosen_method=chosen[0],
            best_methods=best_methods,
        ))
        next_chunk += 1

    rewritten = CnotCircuit(n_wires=n, gates=emitted)
    if not tables_used and not linear_barrier_equivalent(circuit, rewritten, mapping):
        raise VerificationError("rewritten circuit is not equivalent to the input")
    report = ResynthReport(
        before=before,
        after=metrics(rewritten),
        chunks=chunks,
        wins=wins,
        only_wins=only_wins,
        out_permutation=mapping,
        equivalence_checked=not tables_used,
    )
    logger.info(f"✅ Depth {before.depth} -> {report.after.depth}, "
                f"CNOTs {before.cnot_count} -> {report.after.cnot_count}")
    return rewritten, report


def resynthesize_program(program: QcProgram, spec: PortfolioSpec,
                         sidecar: Optional[Union[str, Path]] = None,
                         jobs: int = 1) -> Tuple[QcProgram, ResynthReport]:
    """Resynthesize a parsed .qc program, composing any out-permutation it already had"""
    rewritten, report = resynthesize(program.circuit, spec, sidecar=sidecar, jobs=jobs)
    mapping = report.out_permutation
    previous = program.out_permutation or list(range(program.circuit.n_wires))
    out = [mapping[previous[w]] for w in range(len(previous))]
    new_program = program.model_copy(update={
        "circuit": rewritten,
        "out_permutation": None if out == list(range(len(out))) else out,
    })
    return new_program, report


def report_lines(report: ResynthReport) -> List[str]:
    """Human-readable summary of a resynthesis run"""
    b, a = report.before, report.after
    lines = [
        f"T-count   {b.t_count} -> {a.t_count}",
        f"T-depth   {b.t_depth} -> {a.t_depth}",
        f"CNOTs     {b.cnot_count} -> {a.cnot_count} ({report.cnot_saving:+.1%} saved)",
        f"Depth     {b.depth} -> {a.depth} ({report.depth_saving:+.1%} saved)",
        f"Chunks    {len(report.chunks)}",
    ]
    for method in sorted(set(report.wins) | set(report.only_wins)):
        lines.append(f"  {method:<18} best {report.wins.get(method, 0):>4}   only best {report.only_wins.get(method, 0):>4}")
    return lines


class Resynthesizer:
    """
    Circuit resynthesis pipeline

    Responsibilities:
    - Split a circuit into CNOT chunks and non-CNOT barriers
    - Rebuild each chunk with the method portfolio
    - Keep T-count and T-depth, never increase depth or CNOT count
    """

    def __init__(self, spec: PortfolioSpec, sidecar: Optional[Union[str, Path]] = None, jobs: int = 1):
        self.spec = spec
        self.sidecar = sidecar
        self.jobs = jobs
        self.programs = 0
        self.depth_before = 0
        self.depth_after = 0

    def process(self, program: QcProgram) -> Tuple[QcProgram, ResynthReport]:
        new_program, report = resynthesize_program(program, self.spec, self.sidecar, self.jobs)
        self.programs += 1
        self.depth_before += report.before.depth
        self.depth_after += report.after.depth
        return new_program, report

    def get_stats(self) -> dict:
        saving = 0.0 if self.depth_before == 0 else 1 - self.depth_after / self.depth_before
        return {
            "programs": self.programs,
            "depth_before": self.depth_before,
            "depth_after": self.depth_after,
            "depth_saving": saving,
        }
