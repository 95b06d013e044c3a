"""Whole-answer baselines: BLEU, ROUGE-1/2/L and embedding cosine."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, NamedTuple

from .errors import BaselineError, ContractError, GatewayError
from .text import lcs_length, ngram_counts, tokenize

if TYPE_CHECKING:
    from .gateway import Gateway

ROUGE_VARIANTS = ("rouge-1", "rouge-2", "rouge-l")
BLEU_EPSILON = 1e-9


class PrfScore(NamedTuple):
    precision: float
    recall: float
    f1: float


def prf(precision: float, recall: float) -> PrfScore:
    if precision + recall == 0:
        return PrfScore(precision, recall, 0.0)
    return PrfScore(precision, recall, 2 * precision * recall / (precision + recall))


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """Sentence-level BLEU with epsilon smoothing.

    Orders longer than either side are dropped from the geometric mean, so
    identical short texts still score 1.
    """
    if max_n < 1:
        raise ContractError("max_n must be >= 1")
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    orders = min(max_n, len(cand), len(ref))
    log_sum = 0.0
    for n in range(1, orders + 1):
        c_counts = ngram_counts(cand, n)
        r_counts = ngram_counts(ref, n)
        clipped = sum(min(c, r_counts[g]) for g, c in c_counts.items())
        total = sum(c_counts.values())
        p = clipped / total if clipped else BLEU_EPSILON
        log_sum += math.log(p)
    bp = min(1.0, math.exp(1 - len(ref) / len(cand)))
    return bp * math.exp(log_sum / orders)


def rouge_tokens(cand: list[str], ref: list[str], variant: str = "rouge-l") -> PrfScore:
    if variant == "rouge-l":
        overlap = lcs_length(cand, ref)
        c_total, r_total = len(cand), len(ref)
    elif variant in ("rouge-1", "rouge-2"):
        n = int(variant[-1])
        c_counts = ngram_counts(cand, n)
        r_counts = ngram_counts(ref, n)
        overlap = sum((c_counts & r_counts).values())
        c_total, r_total = sum(c_counts.values()), sum(r_counts.values())
    else:
        raise ContractError(f"unknown ROUGE variant {variant!r}; expected one of {ROUGE_VARIANTS}")
    precision = overlap / c_total if c_total else 0.0
    recall = overlap / r_total if r_total else 0.0
    return prf(precision, recall)


def rouge(candidate: str, reference: str, variant: str = "rouge-l") -> PrfScore:
    return rouge_tokens(tokenize(candidate), tokenize(reference), variant)


def cosine_to_unit(u: list[float], v: list[float]) -> float:
    """Map cosine similarity from [-1, 1] onto [0, 1]. Zero vectors count as orthogonal."""
    if len(u) != len(v):
        raise GatewayError(f"embedding dimensions differ: {len(u)} vs {len(v)}")
    if u == v and any(u):
        return 1.0
    nu = math.sqrt(math.fsum(x * x for x in u))
    nv = math.sqrt(math.fsum(x * x for x in v))
    if nu == 0 or nv == 0:
        return 0.5
    cos = math.fsum(x * y for x, y in zip(u, v)) / (nu * nv)
    cos = max(-1.0, min(1.0, cos))
    return (cos + 1) / 2


def embed_similarity(candidate: str, reference: str, session: Gateway) -> float:
    try:
        e_cand, e_ref = session.embed([candidate, reference])
        return cosine_to_unit(e_cand, e_ref)
    except GatewayError as exc:
        raise BaselineError(f"embedding baseline failed: {exc}") from exc
