"""
Method portfolio

Runs an ordered list of synthesis methods on one operator, verifies every
circuit by simulation and keeps the shallowest (fewer CNOTs, then list order
on ties).
"""
import time
from typing import Dict, List, Optional, Tuple, Union

from loguru import logger

from src.core.circuit import verify_result
from src.core.exceptions import NoMethodSucceeded, VerificationError
from src.core.gf2core import BitMatrix
from src.models.schemas import MethodOutcome, PortfolioSpec, SynthesisFailure, SynthesisResult
from src.synthesizers.ancilla import ancilla_direct, ancilla_synth
from src.synthesizers.baselines import gaussian_synth, kutin_synth
from src.synthesizers.dacsynth import DaCSynthesizer
from src.synthesizers.greedy import config_from_tag, greedy_synth, lu_greedy_synth
from src.utils.config import get_settings


def run_method(tag: str, matrix: BitMatrix, seed: int = 0,
               greedy_max_wires: Optional[int] = None) -> Union[SynthesisResult, SynthesisFailure]:
    """
    Run one method by tag

    Greedy methods report a failure instead of running on operators wider
    than `greedy_max_wires`.
    """
    if tag == "gaussian":
        return gaussian_synth(matrix)
    if tag == "kutin":
        return kutin_synth(matrix)
    if tag.startswith("dacsynth"):
        return DaCSynthesizer.from_tag(tag).process(matrix)
    if tag == "ancilla-block":
        return ancilla_synth(BitMatrix.identity(matrix.n_rows), matrix)
    if tag == "ancilla-direct":
        identity = BitMatrix.identity(matrix.n_rows)
        return ancilla_direct(matrix, identity, matrix)
    if "greedy:" in tag:
        limit = greedy_max_wires if greedy_max_wires is not None else get_settings().greedy_max_wires
        if matrix.n_rows > limit:
            return SynthesisFailure(method=tag, reason=f"skipped: {matrix.n_rows} wires exceed {limit}")
        config = config_from_tag(tag, seed)
        return lu_greedy_synth(matrix, config) if config.use_lu else greedy_synth(matrix, config)
    raise ValueError(f"unknown method tag: {tag}")


def pick_best(outcomes: List[MethodOutcome], order: List[str]) -> Optional[SynthesisResult]:
    """Minimum depth, then fewer CNOTs, then earlier in `order`"""
    ranked = [
        (o.result.depth, o.result.cnot_count, order.index(o.method), o.result)
        for o in outcomes if o.ok
    ]
    if not ranked:
        return None
    return min(ranked, key=lambda item: item[:3])[3]


def run_portfolio(matrix: BitMatrix, spec: PortfolioSpec, timing: bool = True,
                  greedy_max_wires: Optional[int] = None) -> Tuple[Optional[SynthesisResult], List[MethodOutcome]]:
    """
    Run every method of the portfolio on `matrix`

    Returns:
        (best result or None when every method failed, per-method outcomes)

    Raises:
        VerificationError: a method returned a circuit that does not implement `matrix`
    """
    outcomes = []
    for tag in spec.methods:
        started = time.perf_counter()
        outcome = run_method(tag, matrix, spec.seed, greedy_max_wires)
        ms = (time.perf_counter() - started) * 1000 if timing else 0.0
        if isinstance(outcome, SynthesisFailure):
            logger.warning(f"{tag} failed: {outcome.reason}")
            outcomes.append(MethodOutcome(method=tag, failure=outcome.reason, ms=ms))
            continue
        if not verify_result(outcome, matrix):
            raise VerificationError(f"{tag} produced a circuit that does not implement the operator")
        outcomes.append(MethodOutcome(method=tag, result=outcome, ms=ms))
    return pick_best(outcomes, spec.methods), outcomes


class Portfolio:
    """
    Best-of portfolio over several synthesis methods

    Responsibilities:
    - Run and verify every configured method
    - Select the shallowest circuit
    - Count wins and failures per method
    """

    def __init__(self, spec: Optional[PortfolioSpec] = None, timing: bool = True,
                 greedy_max_wires: Optional[int] = None):
        settings = get_settings()
        self.spec = spec or PortfolioSpec(methods=settings.method_list, seed=settings.seed)
        self.timing = timing
        self.greedy_max_wires = greedy_max_wires
        self.runs = 0
        self.wins: Dict[str, int] = {m: 0 for m in self.spec.methods}
        self.failures: Dict[str, int] = {m: 0 for m in self.spec.methods}

    def process(self, matrix: BitMatrix) -> Tuple[Optional[SynthesisResult], List[MethodOutcome]]:
        best, outcomes = run_portfolio(matrix, self.spec, self.timing, self.greedy_max_wires)
        self.runs += 1
        for outcome in outcomes:
            if not outcome.ok:
                self.failures[outcome.method] += 1
        if best is not None:
            self.wins[best.method] += 1
        return best, outcomes

    def synthesize(self, matrix: BitMatrix) -> SynthesisResult:
        """Best result, raising when no method succeeded"""
        best, outcomes = self.process(matrix)
        if best is None:
            reasons = "; ".join(f"{o.method}: {o.failure}" for o in outcomes)
            raise NoMethodSucceeded(f"every method failed ({reasons})")
        return best

    def get_stats(self) -> dict:
        return {
            "runs": self.runs,
            "methods": list(self.spec.methods),
            "wins": dict(self.wins),
            "failures": dict(self.failures),
        }
