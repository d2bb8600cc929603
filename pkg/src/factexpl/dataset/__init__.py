from .records import ClaimRecord, DatasetSplit, EvidenceBundle
from .splits import split_dataset, subset
from .verdicts import NominalVerdict, VerdictMapping, normalize_verdict

__all__ = [
    "ClaimRecord",
    "DatasetSplit",
    "EvidenceBundle",
    "split_dataset",
    "subset",
    "NominalVerdict",
    "VerdictMapping",
    "normalize_verdict",
]
