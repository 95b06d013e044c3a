"""Turn a long-form answer into saliency points.

Two extractors share the same summary-stripping pre-pass: a deterministic
sentence/bullet splitter and an LLM prompted with the packaged extraction
template.  Neither merges or deduplicates repeated claims.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from .core import SaliencyPoints
from .errors import ContractError, EmptyExtractionError, ExtractionError, GatewayError, ReplyParseError
from .gateway import Gateway, ask_parsed
from .prompts import EXTRACT, load_template, render_extract
from .text import normalize_space, split_sentences

logger = logging.getLogger(__name__)

DEFAULT_SUMMARY_CUES = ("in summary", "in conclusion", "overall", "to conclude", "to summarize")
REPROMPT_POINTS = (
    "Your previous reply could not be read. Reply with only the bullet points as a "
    'JSON list of strings, for example ["first point", "second point"].'
)

_PARAGRAPH_BREAK = re.compile(r"\n[ \t]*\n\s*")
_BULLET = re.compile(r"^\s*(?:[-*•‣▪]|\d{1,3}[.)])\s+")
_HEADING = re.compile(r"^\s{0,3}#{1,6}\s+")
_CUE_LEAD = " \t#*_>-•"


@dataclass
class ExtractorConfig:
    mode: str = "heuristic"
    summary_cues: tuple[str, ...] = DEFAULT_SUMMARY_CUES
    max_sentences_per_point: int = 2
    prompt_template: str | None = None
    max_reprompts: int = 2
    strip_summary_first: bool = True

    def __post_init__(self) -> None:
        self.summary_cues = tuple(c.lower().strip() for c in self.summary_cues)
        if self.mode not in ("heuristic", "llm"):
            raise ContractError(f"unknown extractor mode {self.mode!r}")
        if self.max_sentences_per_point < 1:
            raise ContractError("max_sentences_per_point must be >= 1")
        if self.mode == "heuristic" and not self.summary_cues:
            raise ContractError("heuristic extraction needs at least one summary cue")

    @property
    def template(self) -> str:
        return self.prompt_template or load_template(EXTRACT)


def _paragraphs(text: str) -> list[str]:
    return [p.strip() for p in _PARAGRAPH_BREAK.split(text) if p.strip()]


def _starts_with_cue(paragraph: str, cues: tuple[str, ...]) -> bool:
    head = paragraph.lstrip(_CUE_LEAD).lower()
    for cue in cues:
        if head.startswith(cue) and (len(head) == len(cue) or not head[len(cue)].isalnum()):
            return True
    return False


def strip_summary(text: str, cues: tuple[str, ...] = DEFAULT_SUMMARY_CUES) -> str:
    """Drop a leading and/or trailing paragraph that opens with a summary cue.

    Interior paragraphs are never touched, and if stripping would leave
    nothing the input comes back unchanged.
    """
    cues = tuple(c.lower() for c in cues)
    paragraphs = _paragraphs(text)
    if len(paragraphs) < 2:
        return text
    keep = list(paragraphs)
    if _starts_with_cue(keep[-1], cues):
        keep.pop()
    if keep and _starts_with_cue(keep[0], cues):
        keep.pop(0)
    if not keep or len(keep) == len(paragraphs):
        return text
    return "\n\n".join(keep)


def _blocks(paragraph: str) -> list[str]:
    """Group a paragraph's lines into bullet items, headings and prose runs."""
    blocks: list[str] = []
    current: list[str] = []
    in_bullet = False

    def flush() -> None:
        if current:
            blocks.append(" ".join(current))
            current.clear()

    for line in paragraph.splitlines():
        if not line.strip():
            continue
        if _HEADING.match(line):
            flush()
            blocks.append(_HEADING.sub("", line))
            in_bullet = False
        elif _BULLET.match(line):
            flush()
            current.append(_BULLET.sub("", line, count=1))
            in_bullet = True
        elif in_bullet and line[:1].isspace():
            current.append(line)
        else:
            if in_bullet:
                flush()
                in_bullet = False
            current.append(line)
    flush()
    return [normalize_space(b) for b in blocks if b.strip()]


def split_points(text: str, max_sentences_per_point: int = 2) -> SaliencyPoints:
    """Split text into points of at most ``max_sentences_per_point`` sentences.

    Bullet items start a new point each; prose is chunked in order.  No point
    spans two paragraphs, and repeated sentences are all kept.
    """
    if max_sentences_per_point < 1:
        raise ContractError("max_sentences_per_point must be >= 1")
    points: list[str] = []
    for paragraph in _paragraphs(text):
        for block in _blocks(paragraph):
            sentences = split_sentences(block)
            for i in range(0, len(sentences), max_sentences_per_point):
                points.append(" ".join(sentences[i : i + max_sentences_per_point]))
    return SaliencyPoints(points)


def extract_heuristic(text: str, config: ExtractorConfig | None = None) -> SaliencyPoints:
    config = config or ExtractorConfig()
    return split_points(strip_summary(text, config.summary_cues), config.max_sentences_per_point)


_FENCE = re.compile(r"^```[a-zA-Z]*\s*$", re.M)
_QUOTED = re.compile(r'^(["\'“])(.*)(["\'”])$')


def parse_points_reply(reply: str) -> list[str]:
    """Read a list of strings from a model reply.

    Tries a JSON list first, then falls back to one point per bulleted or
    quoted line (which tolerates unescaped quotes such as ``5'8"``).
    """
    text = _FENCE.sub("", reply).strip()
    start, end = text.find("["), text.rfind("]")
    if 0 <= start < end:
        try:
            value = json.loads(text[start : end + 1])
        except json.JSONDecodeError:
            value = None
        if isinstance(value, list) and all(isinstance(v, str) for v in value):
            return [v.strip() for v in value if v.strip()]

    points = []
    for raw in text.splitlines():
        line = raw.strip()
        if line in ("", "[", "]", "],"):
            continue
        line = line.removeprefix("[").removesuffix("]").strip().removesuffix(",").strip()
        bullet = _BULLET.match(line)
        if bullet:
            line = line[bullet.end() :].strip()
        quoted = _QUOTED.match(line)
        if quoted:
            try:
                line = json.loads(line) if line.startswith('"') else quoted.group(2)
            except json.JSONDecodeError:
                line = quoted.group(2)
        elif not bullet:
            continue
        if line.strip():
            points.append(line.strip())
    if not points:
        raise ReplyParseError("reply holds neither a JSON list nor bulleted lines", reply)
    return points


def extract_llm(text: str, config: ExtractorConfig, session: Gateway) -> SaliencyPoints:
    source = strip_summary(text, config.summary_cues) if config.strip_summary_first else text
    prompt = render_extract(source, config.template)
    try:
        points, _ = ask_parsed(
            session, prompt, parse_points_reply,
            reprompt=REPROMPT_POINTS, max_reprompts=config.max_reprompts,
        )
    except ReplyParseError as exc:
        raise ExtractionError(f"could not parse extraction reply: {exc}", raw_reply=exc.reply) from exc
    except GatewayError as exc:
        raise ExtractionError(f"extraction call failed: {exc}") from exc
    if not points:
        raise EmptyExtractionError("model returned an empty point list")
    for p in points:
        n = len(split_sentences(p))
        if n > config.max_sentences_per_point:
            logger.warning("extracted point has %d sentences (limit %d): %.80s", n, config.max_sentences_per_point, p)
    return SaliencyPoints(points)


def extract(text: str, config: ExtractorConfig, session: Gateway | None = None) -> SaliencyPoints:
    if config.mode == "llm":
        if session is None:
            raise ContractError("LLM extraction needs a gateway session")
        return extract_llm(text, config, session)
    return extract_heuristic(text, config)
