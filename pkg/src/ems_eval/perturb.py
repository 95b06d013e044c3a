"""Seeded degradations of an answer's saliency points.

Used to check that a metric tracks answer quality: drop claims, repeat
claims, falsify numbers, or reorder.
"""

from __future__ import annotations

import math
import random
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import ContractError

PERTURBATION_KINDS = ("delete-points", "duplicate-points", "corrupt-numbers", "shuffle-points")
DIGITS = "0123456789"


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    intensity: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in PERTURBATION_KINDS:
            raise ContractError(f"unknown perturbation {self.kind!r}; expected one of {PERTURBATION_KINDS}")
        if not 0 < self.intensity <= 1:
            raise ContractError(f"intensity {self.intensity} outside (0, 1]")


def affected_count(intensity: float, n: int) -> int:
    """ceil(intensity * n), at least 1 for n > 0 and intensity > 0."""
    if n <= 0 or intensity <= 0:
        return 0
    # tolerate k/n * n landing a hair above k
    return max(1, math.ceil(intensity * n - 1e-9))


def digit_derangement(rng: random.Random) -> dict[int, int]:
    """A translate table permuting 0-9 with no fixed digit, so every number changes."""
    digits = list(DIGITS)
    while True:
        rng.shuffle(digits)
        if all(a != b for a, b in zip(DIGITS, digits)):
            return str.maketrans(DIGITS, "".join(digits))


def has_number(text: str) -> bool:
    return any(ch in DIGITS for ch in text)


def perturb_points(points: Sequence[str], spec: PerturbationSpec) -> list[str]:
    pts = list(points)
    n = len(pts)
    if n == 0:
        raise ContractError("cannot perturb an empty point list")
    rng = random.Random(spec.seed)
    k = affected_count(spec.intensity, n)

    if spec.kind == "delete-points":
        doomed = set(rng.sample(range(n), min(k, n - 1)))  # always keep one point
        return [p for i, p in enumerate(pts) if i not in doomed]

    if spec.kind == "duplicate-points":
        chosen = sorted(rng.sample(range(n), min(k, n)))
        return pts + [pts[i] for i in chosen]

    if spec.kind == "corrupt-numbers":
        table = digit_derangement(rng)
        numeric = [i for i, p in enumerate(pts) if has_number(p)]
        for i in rng.sample(numeric, min(k, len(numeric))):
            pts[i] = pts[i].translate(table)
        return pts

    # shuffle-points: permute the points sitting at k randomly chosen positions
    positions = sorted(rng.sample(range(n), min(max(k, 2), n)))
    moved = [pts[i] for i in positions]
    rng.shuffle(moved)
    for i, p in zip(positions, moved):
        pts[i] = p
    return pts


def join_points(points: Sequence[str]) -> str:
    return "\n\n".join(points)


def perturb_answer(points: Sequence[str], spec: PerturbationSpec) -> str:
    """Degraded long-form text: surviving points separated by blank lines."""
    return join_points(perturb_points(points, spec))


def quality_ladder(
    points: Sequence[str],
    intensities: Sequence[float] = (0.0, 0.25, 0.5, 0.75),
    seed: int = 0,
    delete_share: float = 0.5,
    corrupt_share: float = 0.5,
) -> list[list[str]]:
    """Point lists of increasing damage, one per intensity.

    Rung ``i`` deletes ``ceil(i*delete_share*N)`` points and corrupts numbers
    in ``ceil(i*corrupt_share*N)`` of the survivors.  Rungs are nested:
    whatever is deleted or corrupted at one rung stays so at every later rung.
    """
    if list(intensities) != sorted(intensities) or any(not 0 <= i <= 1 for i in intensities):
        raise ContractError("ladder intensities must be sorted and lie in [0, 1]")
    pts = list(points)
    n = len(pts)
    if n == 0:
        raise ContractError("cannot build a ladder from an empty point list")
    rng = random.Random(seed)
    table = digit_derangement(rng)
    delete_order = rng.sample(range(n), n)
    corrupt_order = rng.sample(range(n), n)

    rungs = []
    for intensity in intensities:
        doomed = set(delete_order[: min(affected_count(intensity * delete_share, n), n - 1)])
        survivors = [i for i in corrupt_order if i not in doomed and has_number(pts[i])]
        corrupted = set(survivors[: affected_count(intensity * corrupt_share, n)])
        rungs.append(
            [p.translate(table) if i in corrupted else p for i, p in enumerate(pts) if i not in doomed]
        )
    return rungs
