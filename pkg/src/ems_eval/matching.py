"""Best-match search from each reference point into the candidate point list."""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Sequence
from concurrent.futures import Executor
from dataclasses import dataclass

from .core import UNMATCHED, MatchAssignment
from .errors import ContractError, EmsError, GatewayError, MatchingError, ReplyParseError
from .gateway import Gateway, ask_parsed, parse_integer_reply
from .prompts import MATCH, load_template, render_match
from .text import is_numeric_token, tokenize

Matcher = Callable[[str, Sequence[str]], int]

REPROMPT_INDEX = (
    "Your previous reply was not a valid index. Reply with a single integer: the index "
    "of the best-matched candidate keypoint, or -1 if none matches."
)


@dataclass
class MatcherConfig:
    mode: str = "lexical"
    lexical_threshold: float = 0.5
    numeric_boost: float = 0.1
    prompt_template: str | None = None
    max_reprompts: int = 2

    def __post_init__(self) -> None:
        if self.mode not in ("lexical", "llm"):
            raise ContractError(f"unknown matcher mode {self.mode!r}")
        if not 0 < self.lexical_threshold <= 1:
            raise ContractError("lexical_threshold must be in (0, 1]")
        if self.numeric_boost < 0:
            raise ContractError("numeric_boost must be >= 0")

    @property
    def template(self) -> str:
        return self.prompt_template or load_template(MATCH)


def lexical_score(ref_tokens: Sequence[str], cand_tokens: Sequence[str], numeric_boost: float = 0.0) -> float:
    """Token-multiset F1 plus ``numeric_boost`` per shared number token."""
    if not ref_tokens or not cand_tokens:
        return 0.0
    shared = Counter(ref_tokens) & Counter(cand_tokens)
    overlap = sum(shared.values())
    f1 = 2 * overlap / (len(ref_tokens) + len(cand_tokens))
    numbers = sum(c for tok, c in shared.items() if is_numeric_token(tok))
    return f1 + numeric_boost * numbers


def match_point_lexical(ref_point: str, candidates: Sequence[str], config: MatcherConfig | None = None) -> int:
    if not candidates:
        raise ContractError("lexical matching needs at least one candidate")
    config = config or MatcherConfig()
    ref_tokens = tokenize(ref_point)
    best, best_score = UNMATCHED, 0.0
    for j, cand in enumerate(candidates):
        score = lexical_score(ref_tokens, tokenize(cand), config.numeric_boost)
        if score > best_score:  # strict: ties keep the lower index
            best, best_score = j, score
    return best if best != UNMATCHED and best_score >= config.lexical_threshold else UNMATCHED


def match_point_llm(
    ref_point: str,
    candidates: Sequence[str],
    session: Gateway,
    config: MatcherConfig | None = None,
) -> int:
    if not candidates:
        raise ContractError("matching needs at least one candidate")
    config = config or MatcherConfig(mode="llm")
    m = len(candidates)

    def parse(reply: str) -> int:
        idx = parse_integer_reply(reply)
        if idx != UNMATCHED and not 0 <= idx < m:
            raise ReplyParseError(f"index {idx} outside [0, {m})", reply)
        return idx

    prompt = render_match(ref_point, candidates, config.template)
    try:
        idx, _ = ask_parsed(session, prompt, parse, reprompt=REPROMPT_INDEX, max_reprompts=config.max_reprompts)
    except ReplyParseError as exc:
        raise MatchingError(f"could not read a match index: {exc}", raw_reply=exc.reply) from exc
    except GatewayError as exc:
        raise MatchingError(f"matching call failed: {exc}") from exc
    return idx


def build_matcher(config: MatcherConfig, session: Gateway | None = None) -> Matcher:
    if config.mode == "llm":
        if session is None:
            raise ContractError("LLM matching needs a gateway session")
        return lambda ref, cands: match_point_llm(ref, cands, session, config)
    return lambda ref, cands: match_point_lexical(ref, cands, config)


def match_all(
    refs: Sequence[str],
    candidates: Sequence[str],
    matcher: Matcher,
    executor: Executor | None = None,
) -> MatchAssignment:
    """One matcher call per reference point, assembled in reference order."""
    if not refs:
        raise ContractError("match_all needs at least one reference point")
    if not candidates:
        return MatchAssignment.unmatched(len(refs), 0)
    cands = list(candidates)

    def run(i: int) -> int:
        try:
            return matcher(refs[i], cands)
        except EmsError as exc:
            raise MatchingError(
                f"reference point {i}: {exc}", raw_reply=getattr(exc, "raw_reply", None), ref_index=i
            ) from exc

    if executor is None:
        result = [run(i) for i in range(len(refs))]
    else:
        result = list(executor.map(run, range(len(refs))))
    return MatchAssignment(tuple(result), len(cands))
