"""
Data models for the system
"""

from .schemas import (
    CNOT,
    Barrier,
    BenchReport,
    BenchRow,
    ChunkOutcome,
    CircuitMetrics,
    CnotChunk,
    CnotCircuit,
    CostKind,
    Gate,
    GreedyConfig,
    Layer,
    LuStrategy,
    MethodOutcome,
    OpKind,
    OpRecord,
    PortfolioSpec,
    QcProgram,
    ResynthReport,
    Segment,
    SynthesisFailure,
    SynthesisResult,
    is_method_tag
)

__all__ = [
    'CNOT',
    'Barrier',
    'BenchReport',
    'BenchRow',
    'ChunkOutcome',
    'CircuitMetrics',
    'CnotChunk',
    'CnotCircuit',
    'CostKind',
    'Gate',
    'GreedyConfig',
    'Layer',
    'LuStrategy',
    'MethodOutcome',
    'OpKind',
    'OpRecord',
    'PortfolioSpec',
    'QcProgram',
    'ResynthReport',
    'Segment',
    'SynthesisFailure',
    'SynthesisResult',
    'is_method_tag'
]
