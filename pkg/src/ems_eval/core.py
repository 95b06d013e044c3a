"""Value types and the recall / precision / F1 arithmetic of the EMS pipeline.

Indices are 0-based throughout, with ``UNMATCHED = -1``.  A worked example
that reads ``[4, 2, 3, -1]`` in 1-based notation is ``[3, 1, 2, -1]`` here.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from typing import Literal, overload

from .errors import ContractError, EmptyReferenceError

UNMATCHED = -1

Side = Literal["reference", "answer"]


@dataclass(frozen=True)
class EvalTriplet:
    id: str
    company: str
    question_id: int
    question: str
    reference: str
    candidate: str

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id.strip():
            raise ContractError("triplet id must be a non-empty string")
        if not self.reference.strip():
            raise ContractError(f"triplet {self.id!r}: reference is empty")
        if not self.candidate.strip():
            raise ContractError(f"triplet {self.id!r}: candidate is empty")


@dataclass(frozen=True)
class SaliencyPoints(Sequence[str]):
    """Ordered claim list extracted from one text. Duplicates are kept on purpose."""

    points: tuple[str, ...] = ()

    def __init__(self, points: Iterable[str] = ()) -> None:
        pts = tuple(points)
        for i, p in enumerate(pts):
            if not isinstance(p, str) or not p.strip():
                raise ContractError(f"saliency point {i} is empty")
        object.__setattr__(self, "points", pts)

    @overload
    def __getitem__(self, i: int) -> str: ...
    @overload
    def __getitem__(self, i: slice) -> SaliencyPoints: ...

    def __getitem__(self, i):
        if isinstance(i, slice):
            return SaliencyPoints(self.points[i])
        return self.points[i]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[str]:
        return iter(self.points)

    def __repr__(self) -> str:
        return f"SaliencyPoints({list(self.points)!r})"


@dataclass(frozen=True)
class MatchAssignment:
    assignments: tuple[int, ...]
    answer_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", tuple(int(a) for a in self.assignments))
        if self.answer_count < 0:
            raise ContractError("answer_count must be >= 0")
        for i, a in enumerate(self.assignments):
            if a != UNMATCHED and not 0 <= a < self.answer_count:
                raise ContractError(
                    f"assignment[{i}] = {a} outside [0, {self.answer_count}) and not UNMATCHED"
                )

    def __len__(self) -> int:
        return len(self.assignments)

    @property
    def matched_count(self) -> int:
        return sum(1 for a in self.assignments if a != UNMATCHED)

    @classmethod
    def unmatched(cls, n: int, answer_count: int = 0) -> MatchAssignment:
        return cls((UNMATCHED,) * n, answer_count)


@dataclass(frozen=True)
class AlignmentVector:
    scores: tuple[float, ...]
    side: Side = "reference"

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if self.side not in ("reference", "answer"):
            raise ContractError(f"unknown side {self.side!r}")
        for i, s in enumerate(self.scores):
            if not 0.0 <= s <= 1.0:
                raise ContractError(f"score[{i}] = {s} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class EmsMetrics:
    precision: float
    recall: float
    f1: float
    n_ref: int
    n_ans: int

    def as_dict(self, prefix: str = "ems") -> dict[str, float]:
        return {
            f"{prefix}_precision": self.precision,
            f"{prefix}_recall": self.recall,
            f"{prefix}_f1": self.f1,
        }


def map_scores_to_answer(assignment: MatchAssignment, ref_scores: AlignmentVector) -> AlignmentVector:
    """Project reference-side scores onto answer points, keeping the max per answer point."""
    if ref_scores.side != "reference":
        raise ContractError("map_scores_to_answer expects a reference-side vector")
    if len(ref_scores) != len(assignment):
        raise ContractError(
            f"length mismatch: {len(ref_scores)} scores vs {len(assignment)} assignments"
        )
    out = [0.0] * assignment.answer_count
    for a, s in zip(assignment.assignments, ref_scores.scores):
        if a != UNMATCHED and s > out[a]:
            out[a] = s
    return AlignmentVector(tuple(out), side="answer")


def ems_recall(ref_scores: AlignmentVector) -> float:
    n = len(ref_scores)
    if n == 0:
        raise EmptyReferenceError("EMS recall is undefined for an empty reference point list")
    return math.fsum(ref_scores.scores) / n


def ems_precision(ans_scores: AlignmentVector) -> float:
    m = len(ans_scores)
    if m == 0:
        return 0.0
    return math.fsum(ans_scores.scores) / m


def ems_f1(precision: float, recall: float) -> float:
    for name, v in (("precision", precision), ("recall", recall)):
        if not 0.0 <= v <= 1.0:
            raise ContractError(f"{name} = {v} outside [0, 1]")
    if precision + recall == 0:
        return 0.0
    if precision == recall:
        return precision
    f1 = 2 * precision * recall / (precision + recall)
    # rounding must not push the harmonic mean outside [min, max]
    return min(max(f1, min(precision, recall)), max(precision, recall))


def compute_metrics(assignment: MatchAssignment, ref_scores: AlignmentVector) -> EmsMetrics:
    """All three EMS metrics for one triplet."""
    ans_scores = map_scores_to_answer(assignment, ref_scores)
    recall = ems_recall(ref_scores)
    precision = ems_precision(ans_scores)
    return EmsMetrics(
        precision=precision,
        recall=recall,
        f1=ems_f1(precision, recall),
        n_ref=len(ref_scores),
        n_ans=assignment.answer_count,
    )


def aggregate_reports(per_triplet: Sequence[Mapping[str, float]]) -> dict[str, float]:
    """Macro average: unweighted mean of every metric over triplets.

    Keys missing from some rows are averaged over the rows that carry them.
    """
    if not per_triplet:
        raise ContractError("cannot aggregate an empty set of triplet results")
    values: dict[str, list[float]] = {}
    for row in per_triplet:
        for key, v in row.items():
            values.setdefault(key, []).append(float(v))
    return {key: math.fsum(vs) / len(vs) for key, vs in values.items()}
