"""Soft alignment scores for matched point pairs."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import Executor
from dataclasses import dataclass

from .baselines import ROUGE_VARIANTS, cosine_to_unit, rouge
from .core import UNMATCHED, AlignmentVector, MatchAssignment
from .errors import ContractError, EmsError, GatewayError, ReplyParseError, ScoringError
from .gateway import Gateway, ask_parsed, parse_integer_reply
from .prompts import SCORE, load_template, render_score
from .text import tokenize

Scorer = Callable[[str, str], float]

SCORER_MODES = ("llm", "rouge", "embedding", "exact")


@dataclass
class ScorerConfig:
    mode: str = "rouge"
    max_score: int = 10
    rouge_variant: str = "rouge-l"
    prompt_template: str | None = None
    max_reprompts: int = 2

    def __post_init__(self) -> None:
        if self.mode not in SCORER_MODES:
            raise ContractError(f"unknown scorer mode {self.mode!r}")
        if self.max_score < 1:
            raise ContractError("max_score must be >= 1")
        if self.rouge_variant not in ROUGE_VARIANTS:
            raise ContractError(f"unknown ROUGE variant {self.rouge_variant!r}")

    @property
    def template(self) -> str:
        return self.prompt_template or load_template(SCORE)

    @property
    def name(self) -> str:
        """Metric prefix used in reports, e.g. ``ems_rouge``."""
        return f"ems_{self.mode}"


def reprompt_score(max_score: int) -> str:
    return f"Reply with a single integer from 0 to {max_score} and nothing else."


def score_pair_llm(kp1: str, kp2: str, config: ScorerConfig, session: Gateway) -> float:
    """LLM judgement mapped to ``raw / max_score``.

    An out-of-range integer earns one re-prompt; a second out-of-range answer is clamped.
    """
    top = config.max_score
    prompt = render_score(kp1, kp2, top, config.template)
    follow_up = reprompt_score(top)
    try:
        raw, history = ask_parsed(
            session, prompt, parse_integer_reply, reprompt=follow_up, max_reprompts=config.max_reprompts
        )
        if not 0 <= raw <= top:
            raw, _ = ask_parsed(
                session, follow_up, parse_integer_reply,
                reprompt=follow_up, max_reprompts=config.max_reprompts, history=history,
            )
    except ReplyParseError as exc:
        raise ScoringError(f"could not read a score: {exc}", raw_reply=exc.reply) from exc
    except GatewayError as exc:
        raise ScoringError(f"scoring call failed: {exc}") from exc
    return min(max(raw, 0), top) / top


def score_pair_rouge(kp1: str, kp2: str, variant: str = "rouge-l") -> float:
    return rouge(kp2, kp1, variant).f1


def score_pair_embedding(kp1: str, kp2: str, session: Gateway) -> float:
    try:
        e1, e2 = session.embed([kp1, kp2])
        return cosine_to_unit(e1, e2)
    except GatewayError as exc:
        raise ScoringError(f"embedding scorer failed: {exc}") from exc


def score_pair_exact(kp1: str, kp2: str) -> float:
    return 1.0 if tokenize(kp1) == tokenize(kp2) else 0.0


def build_scorer(config: ScorerConfig, session: Gateway | None = None) -> Scorer:
    if config.mode in ("llm", "embedding") and session is None:
        raise ContractError(f"{config.mode} scoring needs a gateway session")
    if config.mode == "llm":
        return lambda a, b: score_pair_llm(a, b, config, session)
    if config.mode == "embedding":
        return lambda a, b: score_pair_embedding(a, b, session)
    if config.mode == "exact":
        return score_pair_exact
    return lambda a, b: score_pair_rouge(a, b, config.rouge_variant)


def score_assignment(
    refs: Sequence[str],
    candidates: Sequence[str],
    assignment: MatchAssignment,
    scorer: Scorer,
    executor: Executor | None = None,
) -> AlignmentVector:
    """Reference-side scores: scorer output for matched points, exactly 0 otherwise."""
    if len(assignment) != len(refs) or assignment.answer_count != len(candidates):
        raise ContractError(
            f"assignment shape ({len(assignment)}, {assignment.answer_count}) does not fit "
            f"{len(refs)} references and {len(candidates)} candidates"
        )

    def run(i: int) -> float:
        a = assignment.assignments[i]
        if a == UNMATCHED:
            return 0.0
        try:
            return scorer(refs[i], candidates[a])
        except EmsError as exc:
            raise ScoringError(
                f"reference point {i}: {exc}", raw_reply=getattr(exc, "raw_reply", None), ref_index=i
            ) from exc

    idx = range(len(refs))
    scores = list(executor.map(run, idx)) if executor is not None else [run(i) for i in idx]
    return AlignmentVector(tuple(scores), side="reference")
