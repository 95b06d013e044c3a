"""Newline-delimited JSON datasets of (reference, candidate) answer pairs."""

from __future__ import annotations

import json
from collections.abc import Iterable
from importlib import resources
from pathlib import Path

from .core import EvalTriplet
from .errors import ContractError, DatasetError

FIELDS = ("id", "company", "question_id", "question", "reference", "candidate")
_TEXT_FIELDS = ("company", "question", "reference", "candidate")


def parse_record(record: object, lineno: int) -> EvalTriplet:
    where = f"line {lineno}"
    if not isinstance(record, dict):
        raise DatasetError(f"{where}: expected a JSON object, got {type(record).__name__}")
    missing = [f for f in FIELDS if f not in record]
    if missing:
        raise DatasetError(f"{where}: missing field(s) {', '.join(repr(f) for f in missing)}")
    rid = record["id"]
    if isinstance(rid, int) and not isinstance(rid, bool):
        rid = str(rid)
    if not isinstance(rid, str) or not rid.strip():
        raise DatasetError(f"{where}: field 'id' must be a non-empty string")
    qid = record["question_id"]
    if isinstance(qid, bool) or not isinstance(qid, int) or qid < 1:
        raise DatasetError(f"{where}: field 'question_id' must be a positive integer")
    for f in _TEXT_FIELDS:
        if not isinstance(record[f], str):
            raise DatasetError(f"{where}: field {f!r} must be a string")
    for f in ("reference", "candidate"):
        if not record[f].strip():
            raise DatasetError(f"{where}: field {f!r} is empty")
    try:
        return EvalTriplet(
            id=rid,
            company=record["company"],
            question_id=qid,
            question=record["question"],
            reference=record["reference"],
            candidate=record["candidate"],
        )
    except ContractError as exc:
        raise DatasetError(f"{where}: {exc}") from exc


def parse_lines(lines: Iterable[str], source: str = "<dataset>") -> list[EvalTriplet]:
    triplets: list[EvalTriplet] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{source}: line {lineno}: malformed JSON ({exc.msg})") from exc
        try:
            triplet = parse_record(record, lineno)
        except DatasetError as exc:
            raise DatasetError(f"{source}: {exc}") from exc
        if triplet.id in seen:
            raise DatasetError(
                f"{source}: duplicate id {triplet.id!r} on lines {seen[triplet.id]} and {lineno}"
            )
        seen[triplet.id] = lineno
        triplets.append(triplet)
    if not triplets:
        raise DatasetError(f"{source}: dataset is empty")
    return triplets


def load_dataset(path: str | Path) -> list[EvalTriplet]:
    """Read and validate a jsonl dataset; triplets come back in file order."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc.strerror or exc}") from exc
    return parse_lines(text.splitlines(), str(path))


def triplet_record(t: EvalTriplet) -> dict:
    return {f: getattr(t, f) for f in FIELDS}


def write_dataset(triplets: Iterable[EvalTriplet], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for t in triplets:
            fh.write(json.dumps(triplet_record(t), ensure_ascii=False) + "\n")
    return path


def load_questions() -> dict[int, str]:
    """The five packaged earnings-call questions keyed by question id."""
    raw = resources.files("ems_eval").joinpath("data/questions.json").read_text(encoding="utf-8")
    return {int(q["question_id"]): q["text"] for q in json.loads(raw)}


def fixture_path() -> Path:
    """Location of the small synthetic dataset shipped with the package."""
    return Path(str(resources.files("ems_eval").joinpath("data/fixture.jsonl")))
