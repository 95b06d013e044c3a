"""Prompt assets and placeholder substitution.

Templates are stored verbatim under ``prompts/``.  Rendering is a single pass
over the placeholders, so text substituted into one slot is never re-scanned
for another slot's marker.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping, Sequence
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import ConfigError, ContractError

EXTRACT = "extract.txt"
MATCH = "match.txt"
SCORE = "score.txt"
ANSWER = "answer.txt"
CONSOLIDATE = "consolidate.txt"

SLOTS = {
    EXTRACT: ("<ans>",),
    MATCH: ("<ref>", "<candid>"),
    SCORE: ("<kp1>", "<kp2>", "{max_score}"),
    ANSWER: ("<Question>",),
    CONSOLIDATE: ("<Question>", "<Attached pdf file>", "<Answer_Version_1>", "<Answer_Version_2>"),
}


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Read a packaged prompt asset byte-for-byte."""
    return resources.files("ems_eval").joinpath("prompts", name).read_bytes().decode("utf-8")


def read_template(path: str | Path, required: Sequence[str]) -> str:
    """Load a user-supplied template and check that it exposes the required slots."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read prompt template {path}: {exc}") from exc
    missing = [s for s in required if s not in text]
    if missing:
        raise ConfigError(f"prompt template {path} lacks placeholder(s) {missing}")
    return text


def render(template: str, values: Mapping[str, str]) -> str:
    for slot in values:
        if slot not in template:
            raise ContractError(f"template has no {slot} placeholder")
    pattern = re.compile("|".join(re.escape(k) for k in sorted(values, key=len, reverse=True)))
    return pattern.sub(lambda m: values[m.group(0)], template)


def format_candidate_list(points: Sequence[str]) -> str:
    """Serialise candidates as ``index: "text"`` lines inside brackets."""
    lines = [f"{i}: {json.dumps(p, ensure_ascii=False)}" for i, p in enumerate(points)]
    return "[\n" + ",\n".join(lines) + "\n]"


def render_extract(answer: str, template: str | None = None) -> str:
    return render(template or load_template(EXTRACT), {"<ans>": answer})


def render_match(ref_point: str, candidates: Sequence[str], template: str | None = None) -> str:
    return render(
        template or load_template(MATCH),
        {"<ref>": json.dumps(ref_point, ensure_ascii=False), "<candid>": format_candidate_list(candidates)},
    )


def render_score(kp1: str, kp2: str, max_score: int = 10, template: str | None = None) -> str:
    return render(
        template or load_template(SCORE),
        {"<kp1>": kp1, "<kp2>": kp2, "{max_score}": str(max_score)},
    )


def render_answer(question: str, template: str | None = None) -> str:
    return render(template or load_template(ANSWER), {"<Question>": question})


def render_consolidate(
    question: str,
    answer_versions: Sequence[str],
    transcript: str,
    template: str | None = None,
) -> str:
    if len(answer_versions) < 2:
        raise ContractError("consolidation needs at least two answer versions")
    text = template or load_template(CONSOLIDATE)
    values = {
        "<Question>": question,
        "<Attached pdf file>": transcript,
        "<Answer_Version_1>": answer_versions[0],
        "<Answer_Version_2>": answer_versions[1],
    }
    if len(answer_versions) > 2:
        # the asset has two version slots; further versions continue the same pattern
        extra = "".join(
            f"\nAnswer Version {i}: <Answer_Version_{i}>" for i in range(3, len(answer_versions) + 1)
        )
        text = text.replace("<Answer_Version_2>", "<Answer_Version_2>" + extra, 1)
        values.update({f"<Answer_Version_{i}>": v for i, v in enumerate(answer_versions[2:], 3)})
    return render(text, values)
