"""Text normalisation shared by the extractor, lexical matcher and n-gram metrics."""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Sequence

TokenSequence = list[str]

# digit runs keep their decimal/thousands separators: "$11.4" -> "11.4", "35%" -> "35"
_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)*[^\W_]*|[^\W_]+")

ABBREVIATIONS = frozenset(
    {
        "inc.", "corp.", "co.", "ltd.", "llc.", "plc.", "bros.",
        "vs.", "v.", "e.g.", "i.e.", "cf.", "approx.", "est.", "fig.", "no.", "nos.",
        "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.",
        "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.",
        "oct.", "nov.", "dec.",
    }
)
_DOTTED_ACRONYM = re.compile(r"^(?:[A-Za-z]\.){2,}$")  # U.S., U.K., e.g.
_INITIAL = re.compile(r"^[A-Z]\.$")  # J. Smith

# sentence terminator, optional closing quotes/brackets, whitespace, then an
# uppercase letter or digit (optionally behind an opening quote/bracket or "$")
_BOUNDARY = re.compile(r"([.!?][\"'”’)\]]*)(\s+)(?=[\"'“‘(\[$]?[A-Z0-9])")
_WS = re.compile(r"\s+")


def tokenize(text: str) -> TokenSequence:
    """Lowercase, split on non-alphanumeric runs, keep numbers whole. May return []."""
    return _TOKEN_RE.findall(text.lower())


def is_numeric_token(token: str) -> bool:
    return any(ch.isdigit() for ch in token)


def normalize_space(text: str) -> str:
    return _WS.sub(" ", text).strip()


def _guarded(prefix: str) -> bool:
    """True when the period ending ``prefix`` belongs to an abbreviation."""
    m = re.search(r"(\S+)$", prefix)
    if not m:
        return False
    word = m.group(1).lstrip("\"'(“‘[")
    return word.lower() in ABBREVIATIONS or bool(_DOTTED_ACRONYM.match(word) or _INITIAL.match(word))


def split_sentences(text: str) -> list[str]:
    """Split prose into sentences; whitespace inside each sentence is collapsed."""
    text = normalize_space(text)
    if not text:
        return []
    sentences = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        end = m.end(1)
        if m.group(1)[0] == "." and _guarded(text[start:end]):
            continue
        sentences.append(text[start:end])
        start = m.end(2)
    sentences.append(text[start:])
    return [s for s in sentences if s]


def ngram_counts(tokens: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence, O(len(a)*len(b)) time, O(len(b)) memory."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]
