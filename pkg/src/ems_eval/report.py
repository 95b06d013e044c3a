"""Write run reports as json, csv, or a metric-by-run markdown table."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

from .errors import ContractError, EmsError
from .pipeline import EmsReport

FORMATS = ("json", "csv", "markdown")
FILE_NAMES = {"json": "report.json", "csv": "report.csv", "markdown": "report.md"}

_PRF = ("precision", "recall", "f1")
_PRF_LABEL = {"precision": "Precision", "recall": "Recall", "f1": "F1"}


def fmt2(value: float) -> str:
    """Two decimals with round-half-even on the value's shortest decimal form."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def _require_rows(report: EmsReport) -> None:
    if not report.ok_rows:
        raise ContractError(
            f"report {report.label!r} has no successful per-triplet rows; the aggregate is undefined"
        )


def report_json(report: EmsReport) -> str:
    _require_rows(report)
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def report_csv(report: EmsReport) -> str:
    """One line per (triplet, metric) plus the aggregate under id ``aggregate``."""
    _require_rows(report)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "triplet_id", "company", "question_id", "metric", "value"])
    for row in report.ok_rows:
        counts = {"n_ref": row.n_ref, "n_ans": row.n_ans, "matched": row.matched}
        for name, value in row.metrics.items():
            writer.writerow([report.label, row.id, row.company, row.question_id, name, fmt2(value)])
        for name, value in counts.items():
            writer.writerow([report.label, row.id, row.company, row.question_id, name, value])
    for name, value in report.aggregate.items():
        writer.writerow([report.label, "aggregate", "", "", name, fmt2(value)])
    return buf.getvalue()


def _table_rows(metric_names: Sequence[str]) -> list[tuple[str, str, str]]:
    """(group, sub-row, metric key) for every metric present, in table order."""
    present = set(metric_names)
    rows: list[tuple[str, str, str]] = []
    if "bleu" in present:
        rows.append(("BLEU", "", "bleu"))
    prf_groups: list[tuple[str, str]] = []
    rouge_prefixes = sorted(
        n[: -len("_precision")] for n in metric_names if n.startswith("rouge") and n.endswith("_precision")
    )
    prf_groups.extend((prefix.replace("_", "-").upper(), prefix) for prefix in rouge_prefixes)
    if "embed_sim" in present:
        prf_groups.append(("Embedding", "embed_sim"))
    for name in metric_names:
        if name.startswith("ems_") and name.endswith("_precision"):
            prefix = name[: -len("_precision")]
            prf_groups.append((f"EMS ({prefix[4:].replace('_', '-')})", prefix))
    for group, prefix in prf_groups:
        if prefix == "embed_sim":
            rows.append((group, "", "embed_sim"))
            continue
        for part in _PRF:
            if f"{prefix}_{part}" in present:
                rows.append((group, _PRF_LABEL[part], f"{prefix}_{part}"))
    return rows


def merge_markdown(reports: Sequence[EmsReport]) -> str:
    """Metric rows by run columns; each run contributes its aggregate row."""
    if not reports:
        raise ContractError("nothing to merge: no reports")
    for r in reports:
        _require_rows(r)
    labels = [r.label for r in reports]
    if len(set(labels)) != len(labels):
        raise ContractError(f"run labels must be unique to merge: {labels}")
    names: dict[str, None] = {}
    for r in reports:
        names.update(dict.fromkeys(r.aggregate))
    lines = [
        "| Metric/LLM | | " + " | ".join(labels) + " |",
        "|---|---|" + "---|" * len(labels),
    ]
    previous = None
    for group, sub, key in _table_rows(list(names)):
        cells = [fmt2(r.aggregate[key]) if key in r.aggregate else "" for r in reports]
        shown = group if group != previous else ""
        previous = group
        lines.append(f"| {shown} | {sub} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render(report: EmsReport, fmt: str) -> str:
    if fmt == "json":
        return report_json(report)
    if fmt == "csv":
        return report_csv(report)
    if fmt == "markdown":
        return merge_markdown([report])
    raise ContractError(f"unknown report format {fmt!r}; expected one of {FORMATS}")


def write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise EmsError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_report(report: EmsReport, fmt: str, out_dir: str | Path) -> Path:
    """Render ``report`` in ``fmt`` and write it under ``out_dir``."""
    text = render(report, fmt)
    return write_text(Path(out_dir) / FILE_NAMES[fmt], text)


def load_report(path: str | Path) -> EmsReport:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ContractError(f"cannot read report {path}: {exc}") from exc
    return EmsReport.from_dict(data)
