from .agreement import (
    AgreementProfile,
    FilterResult,
    compute_agreement,
    filter_annotators,
    perfect_partial_agreement,
)
from .aggregate import AggregatedLabel, aggregate, export_metric_dataset
from .judgments import BINARY_DIMENSIONS, OBJECTIVE_DIMENSIONS, JudgmentRecord

__all__ = [
    "AgreementProfile",
    "FilterResult",
    "compute_agreement",
    "filter_annotators",
    "perfect_partial_agreement",
    "AggregatedLabel",
    "aggregate",
    "export_metric_dataset",
    "BINARY_DIMENSIONS",
    "OBJECTIVE_DIMENSIONS",
    "JudgmentRecord",
]
