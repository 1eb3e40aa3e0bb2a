from .protocol import Decision, DedupMode, ProverTag, VerifyParams, VerifyReport
from .reports import (
    BiasRecord,
    EntropyExperimentRecord,
    EntropyRecord,
    GenRecord,
    ProveRecord,
    RecordModel,
    ReduceRecord,
    SimulateRecord,
)

__all__ = [
    "Decision",
    "DedupMode",
    "ProverTag",
    "VerifyParams",
    "VerifyReport",
    "RecordModel",
    "GenRecord",
    "ProveRecord",
    "SimulateRecord",
    "BiasRecord",
    "EntropyRecord",
    "ReduceRecord",
    "EntropyExperimentRecord",
]
