"""
Reader and writer for the .qc circuit subset

    .v a b c
    .i a b c
    .o a b c
    BEGIN
    tof a b      # CNOT, control a, target b
    T c
    END

A comment line `# out-perm: c a b` records a residual wire permutation: entry w
names the wire that carries original wire w.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from src.core.exceptions import QcParseError
from src.models.schemas import CnotCircuit, Gate, QcProgram

PASS_THROUGH = ("H", "X", "Y", "Z", "S", "S*", "T", "T*")
OUT_PERM_TAG = "# out-perm:"


def _resolve(names: Sequence[str], index: Dict[str, int], lineno: int) -> List[int]:
    wires = []
    for name in names:
        if name not in index:
            raise QcParseError(f"undeclared wire {name!r}", line=lineno)
        wires.append(index[name])
    if len(set(wires)) != len(wires):
        raise QcParseError("a gate uses the same wire twice", line=lineno)
    return wires


def _parse_gate(tokens: List[str], index: Dict[str, int], lineno: int) -> Gate:
    head, args = tokens[0], tokens[1:]
    lowered = head.lower()
    if lowered in ("tof", "cnot"):
        if len(args) == 2:
            control, target = _resolve(args, index, lineno)
            return Gate.cnot(control, target)
        if len(args) == 1 and lowered == "tof":
            return Gate.other("X", *_resolve(args, index, lineno))
        raise QcParseError(f"{head} with {len(args)} wires is not supported", line=lineno)
    if lowered == "x" and len(args) == 1:
        return Gate.other("X", *_resolve(args, index, lineno))
    if head in PASS_THROUGH:
        if len(args) != 1:
            raise QcParseError(f"{head} takes exactly one wire", line=lineno)
        return Gate.other(head, *_resolve(args, index, lineno))
    raise QcParseError(f"unknown gate {head!r}", line=lineno)


def parse_qc(text: str) -> QcProgram:
    """
    Parse .qc text

    Raises:
        QcParseError: with the 1-based line number of the problem
    """
    wire_names: Optional[List[str]] = None
    index: Dict[str, int] = {}
    inputs = outputs = None
    gates: List[Gate] = []
    out_perm_names: Optional[List[str]] = None
    out_perm_line = 0
    in_body = finished = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith(OUT_PERM_TAG):
            out_perm_names = line[len(OUT_PERM_TAG):].split()
            out_perm_line = lineno
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if finished:
            raise QcParseError("content after END", line=lineno)
        if not in_body:
            if tokens[0] == ".v":
                if wire_names is not None:
                    raise QcParseError("duplicate .v line", line=lineno)
                wire_names = tokens[1:]
                if not wire_names:
                    raise QcParseError(".v declares no wires", line=lineno)
                if len(set(wire_names)) != len(wire_names):
                    raise QcParseError("duplicate wire name in .v", line=lineno)
                index = {name: i for i, name in enumerate(wire_names)}
            elif tokens[0] in (".i", ".o"):
                if wire_names is None:
                    raise QcParseError(f"{tokens[0]} before .v", line=lineno)
                _resolve(tokens[1:], index, lineno)
                if tokens[0] == ".i":
                    inputs = tokens[1:]
                else:
                    outputs = tokens[1:]
            elif tokens[0] == "BEGIN":
                if wire_names is None:
                    raise QcParseError("BEGIN before .v", line=lineno)
                in_body = True
            else:
                raise QcParseError(f"unexpected header line {line!r}", line=lineno)
            continue
        if tokens[0] == "END":
            in_body, finished = False, True
            continue
        gates.append(_parse_gate(tokens, index, lineno))

    if wire_names is None:
        raise QcParseError("missing .v line")
    if not finished:
        raise QcParseError("missing END")

    out_permutation = None
    if out_perm_names is not None:
        wires = _resolve(out_perm_names, index, out_perm_line)
        if len(wires) != len(wire_names):
            raise QcParseError("out-perm must list every wire", line=out_perm_line)
        out_permutation = wires

    return QcProgram(
        wire_names=wire_names,
        inputs=inputs,
        outputs=outputs,
        circuit=CnotCircuit(n_wires=len(wire_names), gates=gates),
        out_permutation=out_permutation,
    )


def format_qc(program: QcProgram) -> str:
    names = program.wire_names
    lines = [".v " + " ".join(names)]
    if program.inputs is not None:
        lines.append(".i " + " ".join(program.inputs))
    if program.outputs is not None:
        lines.append(".o " + " ".join(program.outputs))
    if program.out_permutation is not None:
        lines.append(f"{OUT_PERM_TAG} " + " ".join(names[w] for w in program.out_permutation))
    lines.append("")
    lines.append("BEGIN")
    for gate in program.circuit.gates:
        token = "tof" if gate.is_cnot else gate.name
        lines.append(token + " " + " ".join(names[w] for w in gate.wires))
    lines.append("END")
    return "\n".join(lines) + "\n"


def default_wire_names(n: int) -> List[str]:
    return [f"q{i}" for i in range(n)]


def circuit_to_qc(circuit: CnotCircuit, wire_names: Optional[List[str]] = None,
                  out_permutation: Optional[Sequence[int]] = None) -> str:
    program = QcProgram(
        wire_names=wire_names or default_wire_names(circuit.n_wires),
        circuit=circuit,
        out_permutation=list(out_permutation) if out_permutation is not None else None,
    )
    return format_qc(program)


def read_qc(path: Union[str, Path]) -> QcProgram:
    return parse_qc(Path(path).read_text(encoding="utf-8"))


def write_qc(program: QcProgram, path: Union[str, Path]) -> None:
    Path(path).write_text(format_qc(program), encoding="utf-8")
