"""Extract-match-score evaluation of long-form answers against a reference answer."""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (  # noqa: E402
    UNMATCHED,
    AlignmentVector,
    EmsMetrics,
    EvalTriplet,
    MatchAssignment,
    SaliencyPoints,
    aggregate_reports,
    compute_metrics,
    ems_f1,
    ems_precision,
    ems_recall,
    map_scores_to_answer,
)

__all__ = [
    "UNMATCHED",
    "AlignmentVector",
    "EmsMetrics",
    "EvalTriplet",
    "MatchAssignment",
    "SaliencyPoints",
    "aggregate_reports",
    "compute_metrics",
    "ems_f1",
    "ems_precision",
    "ems_recall",
    "map_scores_to_answer",
    "__version__",
]
