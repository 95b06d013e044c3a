"""Reference-answer tooling: per-model answers and their consolidation."""

from __future__ import annotations

from collections.abc import Sequence

from .errors import ContractError
from .gateway import Gateway
from .prompts import render_answer, render_consolidate


def generate_answer(question: str, session: Gateway, template: str | None = None) -> str:
    """One model's answer to a question, using the answer-writing prompt."""
    if not question.strip():
        raise ContractError("question is empty")
    return session.complete(render_answer(question, template))


def generate_reference(
    question: str,
    answer_versions: Sequence[str],
    transcript: str,
    session: Gateway,
    template: str | None = None,
) -> str:
    """Consolidate several answer versions into one reference; the reply is returned verbatim."""
    if len(answer_versions) < 2:
        raise ContractError(f"need at least 2 answer versions, got {len(answer_versions)}")
    return session.complete(render_consolidate(question, answer_versions, transcript, template))
