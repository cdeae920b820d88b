"""
Data Models for the CNOT synthesis toolkit
"""
import re
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.gf2core import Permutation


class CostKind(str, Enum):
    """Cost functions guiding the greedy synthesizers"""
    ONES = "h_sum"  # number of ones
    ONES_WITH_INVERSE = "H_sum"  # ones of A plus ones of A^-1
    LOG_ROWS = "h_prod"  # sum of log2 row weights, favours almost-done rows
    LOG_ROWS_WITH_INVERSE = "H_prod"  # h_prod of A plus h_prod of A^-1

    @property
    def uses_inverse(self) -> bool:
        return self in (CostKind.ONES_WITH_INVERSE, CostKind.LOG_ROWS_WITH_INVERSE)

    @property
    def is_product(self) -> bool:
        return self in (CostKind.LOG_ROWS, CostKind.LOG_ROWS_WITH_INVERSE)


class LuStrategy(str, Enum):
    """Pivot rule for the PLU factorisation"""
    PLAIN = "plain"
    SPARSE = "sparse"


class OpKind(str, Enum):
    """Elementary moves on the matrix being zeroed"""
    ROW = "row"  # row b ^= row a
    COL = "col"  # col b ^= col a
    FLIP = "flip"  # toggle entry (a, b)


CNOT = "cnot"
T_GATES = frozenset({"T", "T*"})


class Gate(BaseModel):
    """A CNOT (name 'cnot', wires=(control, target)) or an opaque pass-through gate"""
    model_config = ConfigDict(frozen=True)

    name: str
    wires: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_wires(self) -> "Gate":
        if not self.wires:
            raise ValueError("a gate acts on at least one wire")
        if any(w < 0 for w in self.wires):
            raise ValueError(f"negative wire index in {self.wires}")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"repeated wire in {self.name} {self.wires}")
        if self.name == CNOT and len(self.wires) != 2:
            raise ValueError("CNOT needs exactly a control and a target")
        return self

    @classmethod
    def cnot(cls, control: int, target: int) -> "Gate":
        return cls(name=CNOT, wires=(control, target))

    @classmethod
    def other(cls, name: str, *wires: int) -> "Gate":
        return cls(name=name, wires=tuple(wires))

    @property
    def is_cnot(self) -> bool:
        return self.name == CNOT

    @property
    def is_t(self) -> bool:
        return self.name in T_GATES

    @property
    def control(self) -> int:
        return self.wires[0]

    @property
    def target(self) -> int:
        return self.wires[1]

    def relabel(self, mapping: Tuple[int, ...]) -> "Gate":
        return Gate(name=self.name, wires=tuple(mapping[w] for w in self.wires))

    def __str__(self) -> str:
        return f"{self.name}({', '.join(map(str, self.wires))})"


class CnotCircuit(BaseModel):
    """Ordered gate list over n_wires wires"""
    n_wires: int = Field(ge=1)
    gates: List[Gate] = []

    @model_validator(mode="after")
    def _check_footprint(self) -> "CnotCircuit":
        for gate in self.gates:
            if max(gate.wires) >= self.n_wires:
                raise ValueError(f"{gate} touches a wire outside 0..{self.n_wires - 1}")
        return self

    def add_cnot(self, control: int, target: int) -> None:
        if max(control, target) >= self.n_wires:
            raise ValueError(f"CNOT({control}, {target}) outside {self.n_wires} wires")
        self.gates.append(Gate.cnot(control, target))

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if g.is_cnot)

    @property
    def is_linear(self) -> bool:
        return all(g.is_cnot for g in self.gates)

    def __add__(self, other: "CnotCircuit") -> "CnotCircuit":
        if other.n_wires != self.n_wires:
            raise ValueError("cannot concatenate circuits of different widths")
        return CnotCircuit(n_wires=self.n_wires, gates=self.gates + other.gates)


class CnotChunk(BaseModel):
    """Maximal run of consecutive CNOTs"""
    circuit: CnotCircuit


class Barrier(BaseModel):
    """A single non-CNOT gate separating chunks"""
    gate: Gate


Segment = Union[CnotChunk, Barrier]


class SynthesisResult(BaseModel):
    """CNOT circuit followed by a symbolic wire permutation"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    circuit: CnotCircuit
    out_permutation: Permutation
    method: str
    depth: int = Field(ge=0)
    cnot_count: int = Field(ge=0)
    stats: Dict[str, Any] = {}

    @model_validator(mode="after")
    def _check_permutation(self) -> "SynthesisResult":
        if self.out_permutation.n != self.circuit.n_wires:
            raise ValueError("permutation size differs from circuit width")
        return self


class SynthesisFailure(BaseModel):
    """Best-effort statistics of a synthesis run that gave up"""
    method: str
    reason: str
    resets: int = 0
    operations: int = 0
    cost_trace: List[float] = []

    @property
    def final_cost(self) -> Optional[float]:
        return self.cost_trace[-1] if self.cost_trace else None


class OpRecord(BaseModel):
    """One elementary reduction step on the matrix being zeroed"""
    model_config = ConfigDict(frozen=True)

    kind: OpKind
    a: int = Field(ge=0)
    b: int = Field(ge=0)

    @model_validator(mode="after")
    def _distinct(self) -> "OpRecord":
        if self.kind is not OpKind.FLIP and self.a == self.b:
            raise ValueError(f"{self.kind.value} operation needs two distinct indices")
        return self

    @classmethod
    def row(cls, src: int, tgt: int) -> "OpRecord":
        return cls(kind=OpKind.ROW, a=src, b=tgt)

    @classmethod
    def col(cls, src: int, tgt: int) -> "OpRecord":
        return cls(kind=OpKind.COL, a=src, b=tgt)

    @classmethod
    def flip(cls, row: int, col: int) -> "OpRecord":
        return cls(kind=OpKind.FLIP, a=row, b=col)


class Layer(BaseModel):
    """Operations that run in one time step"""
    ops: List[OpRecord] = []

    @model_validator(mode="after")
    def _disjoint(self) -> "Layer":
        rows, cols = set(), set()
        for op in self.ops:
            if op.kind is OpKind.ROW:
                touched_rows, touched_cols = (op.a, op.b), ()
            elif op.kind is OpKind.COL:
                touched_rows, touched_cols = (), (op.a, op.b)
            else:
                touched_rows, touched_cols = (op.a,), (op.b,)
            for r in touched_rows:
                if r in rows:
                    raise ValueError(f"row {r} used twice in one layer")
                rows.add(r)
            for c in touched_cols:
                if c in cols:
                    raise ValueError(f"column {c} used twice in one layer")
                cols.add(c)
        return self

    def __len__(self) -> int:
        return len(self.ops)


class GreedyConfig(BaseModel):
    """Settings of one greedy synthesis run"""
    cost: CostKind = CostKind.ONES_WITH_INVERSE
    seed: int = 0
    max_resets: Optional[int] = Field(default=None, ge=1, description="None means 20 resets per wire")
    use_lu: bool = False
    lu_strategy: LuStrategy = LuStrategy.SPARSE


_METHOD_TAG = re.compile(
    r"^(gaussian|kutin|dacsynth|dacsynth:tiled[1-4]|ancilla-block|ancilla-direct"
    r"|(lu\+)?greedy:(h_sum|H_sum|h_prod|H_prod))$"
)


def is_method_tag(tag: str) -> bool:
    return bool(_METHOD_TAG.match(tag))


class PortfolioSpec(BaseModel):
    """Ordered list of synthesis methods to try"""
    methods: List[str] = Field(..., min_length=1)
    seed: int = 0

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, methods: List[str]) -> List[str]:
        bad = [m for m in methods if not is_method_tag(m)]
        if bad:
            raise ValueError(f"unknown method tag(s): {', '.join(bad)}")
        return methods

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "PortfolioSpec":
        return cls(methods=[m.strip() for m in text.split(",") if m.strip()], seed=seed)

    class Config:
        json_schema_extra = {
            "example": {
                "methods": ["gaussian", "kutin", "dacsynth", "greedy:H_sum", "lu+greedy:h_prod"],
                "seed": 42
            }
        }


class BenchRow(BaseModel):
    """One (method, sample) measurement"""
    n: int
    method: str
    sample: int
    gen_depth: Optional[int] = None
    depth: Optional[int] = None  # None when the method failed
    cnots: Optional[int] = None
    ms: float = 0.0


class BenchReport(BaseModel):
    """All measurements of one benchmark run"""
    protocol: str
    seed: int
    rows: List[BenchRow] = []


class ChunkOutcome(BaseModel):
    """What happened to one CNOT chunk during resynthesis"""
    index: int
    n_wires: int
    original_depth: int
    original_cnots: int
    depth: int
    cnots: int
    chosen_method: str
    best_methods: List[str] = []  # methods reaching the minimal chunk depth


class CircuitMetrics(BaseModel):
    """Headline numbers of a circuit"""
    depth: int
    cnot_count: int
    t_count: int
    t_depth: int


class ResynthReport(BaseModel):
    """Before/after statistics of a resynthesis run"""
    before: CircuitMetrics
    after: CircuitMetrics
    chunks: List[ChunkOutcome] = []
    wins: Dict[str, int] = {}
    only_wins: Dict[str, int] = {}
    out_permutation: List[int] = []
    equivalence_checked: bool = True  # False when parity-table chunks were replaced

    @property
    def depth_saving(self) -> float:
        return 0.0 if self.before.depth == 0 else 1.0 - self.after.depth / self.before.depth

    @property
    def cnot_saving(self) -> float:
        return 0.0 if self.before.cnot_count == 0 else 1.0 - self.after.cnot_count / self.before.cnot_count


class QcProgram(BaseModel):
    """A parsed .qc file"""
    wire_names: List[str]
    inputs: Optional[List[str]] = None
    outputs: Optional[List[str]] = None
    circuit: CnotCircuit
    out_permutation: Optional[List[int]] = None


class MethodOutcome(BaseModel):
    """Result of one portfolio member on one operator"""
    method: str
    result: Optional[SynthesisResult] = None
    failure: Optional[str] = None  # reason when the method produced nothing
    ms: float = 0.0

    @property
    def ok(self) -> bool:
        return self.result is not None
