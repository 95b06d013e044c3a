"""Command-line entry point: ``ems <subcommand> ...``.

Exit codes: 0 success, 1 run error, 2 config or dataset error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from .config import load_config
from .dataset import load_dataset, load_questions, triplet_record
from .errors import ConfigError, ContractError, DatasetError, EmsError
from .extraction import extract
from .gateway import Gateway
from .mock import offline_transport
from .perturb import PERTURBATION_KINDS, PerturbationSpec, perturb_answer
from .pipeline import RunConfig, run_baselines, run_evaluation, utc_now
from .prompts import render_answer, render_consolidate
from .reference import generate_answer, generate_reference
from .report import FORMATS, emit_report, load_report, merge_markdown, render, write_text

logger = logging.getLogger("ems_eval")

EXIT_OK, EXIT_RUN, EXIT_CONFIG = 0, 1, 2
STATS_FILE = "gateway_stats.json"


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--dataset", help="jsonl dataset of evaluation triplets")
    p.add_argument("--out", help="output directory (or file, where noted)")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument(
        "--offline", action="store_true",
        help="answer model calls in-process and from the cache; never touch the network",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="ems", description="Extract-match-score evaluation of long-form answers.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", parents=[common], help="run EMS and baselines over a dataset")
    ev.add_argument("--label", help="run label used as the report column name")
    ev.add_argument("--format", action="append", choices=FORMATS, help="report format(s); default all")
    ev.add_argument("--strict", action="store_true", help="abort on the first failing triplet")

    ex = sub.add_parser("extract", parents=[common], help="print saliency points as jsonl")
    ex.add_argument("--side", choices=("reference", "candidate", "both"), default="both")
    ex.add_argument("--text-file", help="extract from a plain text file instead of a dataset")

    pt = sub.add_parser("perturb", parents=[common], help="write a dataset with degraded candidates")
    pt.add_argument("--kind", choices=PERTURBATION_KINDS, required=True)
    pt.add_argument("--intensity", type=float, required=True)

    bl = sub.add_parser("baselines", parents=[common], help="whole-answer BLEU/ROUGE/embedding only")
    bl.add_argument("--label")
    bl.add_argument("--format", action="append", choices=FORMATS)

    gr = sub.add_parser("gen-reference", parents=[common], help="consolidate answer versions into a reference")
    q = gr.add_mutually_exclusive_group(required=True)
    q.add_argument("--question", help="question text")
    q.add_argument("--question-id", type=int, help="one of the packaged questions (1-5)")
    gr.add_argument("--answers", nargs="+", default=[], help="answer version files (two or more)")
    gr.add_argument("--transcript", help="transcript text file")
    gr.add_argument("--answer-only", action="store_true", help="produce a single model answer instead")
    gr.add_argument("--print-prompt", action="store_true", help="show the rendered prompt, make no call")

    rp = sub.add_parser("report", parents=[common], help="re-render or merge saved json reports")
    rp.add_argument("inputs", nargs="+", help="report.json files")
    rp.add_argument("--format", choices=FORMATS, default="markdown")
    return parser


def _load_run_config(args: argparse.Namespace) -> tuple[RunConfig, str | None]:
    if args.config:
        config, dataset = load_config(args.config)
    else:
        config, dataset = RunConfig(), None
    if args.seed is not None:
        config.seed = args.seed
        config.gateway.seed = args.seed
    if getattr(args, "label", None):
        config.label = args.label
    if getattr(args, "strict", False):
        config.strict = True
    return config, args.dataset or dataset


def _session(config: RunConfig, offline: bool, needed: bool) -> Gateway | None:
    if offline:
        return Gateway(config.gateway, transport=offline_transport())
    return Gateway(config.gateway) if needed else None


def _require_dataset(path: str | None) -> str:
    if not path:
        raise DatasetError("no dataset given: pass --dataset or set 'dataset' in the config")
    return path


def _write_reports(report, formats: Sequence[str] | None, out: Path) -> list[Path]:
    return [emit_report(report, fmt, out) for fmt in (formats or FORMATS)]


def cmd_evaluate(args: argparse.Namespace) -> int:
    config, dataset = _load_run_config(args)
    triplets = load_dataset(_require_dataset(dataset))
    out = Path(args.out or config.output_dir)
    session = _session(config, args.offline, config.needs_gateway)
    try:
        report = run_evaluation(config, triplets, session, clock=None if args.offline else utc_now)
        written = _write_reports(report, args.format, out)
        if session is not None:
            stats = json.dumps(session.stats.as_dict(), indent=2, sort_keys=True) + "\n"
            written.append(write_text(out / STATS_FILE, stats))
    finally:
        if session is not None:
            session.close()
    sys.stdout.write(merge_markdown([report]))
    failed = report.metadata.get("n_failed", 0)
    if failed:
        print(f"warning: {failed} of {len(report.rows)} triplets failed; see flagged rows", file=sys.stderr)
    for path in written:
        logger.info("wrote %s", path)
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    config, dataset = _load_run_config(args)
    session = _session(config, args.offline, config.extractor.mode == "llm")
    lines = []
    try:
        if args.text_file:
            text = Path(args.text_file).read_text(encoding="utf-8")
            points = extract(text, config.extractor, session)
            lines.append({"source": args.text_file, "points": list(points)})
        else:
            sides = ("reference", "candidate") if args.side == "both" else (args.side,)
            for t in load_dataset(_require_dataset(dataset)):
                for side in sides:
                    points = extract(getattr(t, side), config.extractor, session)
                    lines.append({"id": t.id, "side": side, "points": list(points)})
    finally:
        if session is not None:
            session.close()
    text = "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in lines)
    _emit_text(text, args.out)
    return EXIT_OK


def _emit_text(text: str, out: str | None) -> None:
    if out:
        write_text(Path(out), text)
    else:
        sys.stdout.write(text)


def cmd_perturb(args: argparse.Namespace) -> int:
    config, dataset = _load_run_config(args)
    spec = PerturbationSpec(args.kind, args.intensity, config.seed)
    session = _session(config, args.offline, config.extractor.mode == "llm")
    rows = []
    try:
        for t in load_dataset(_require_dataset(dataset)):
            record = triplet_record(t)
            record["candidate"] = perturb_answer(extract(t.candidate, config.extractor, session), spec)
            rows.append(record)
    finally:
        if session is not None:
            session.close()
    _emit_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), args.out)
    return EXIT_OK


def cmd_baselines(args: argparse.Namespace) -> int:
    config, dataset = _load_run_config(args)
    triplets = load_dataset(_require_dataset(dataset))
    session = _session(config, args.offline, config.baselines.embedding)
    try:
        report = run_baselines(config, triplets, session, clock=None if args.offline else utc_now)
    finally:
        if session is not None:
            session.close()
    _write_reports(report, args.format, Path(args.out or config.output_dir))
    sys.stdout.write(merge_markdown([report]))
    return EXIT_OK


def _read(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {what} {path}: {exc.strerror or exc}") from exc


def cmd_gen_reference(args: argparse.Namespace) -> int:
    config, _ = _load_run_config(args)
    if args.question_id is not None:
        questions = load_questions()
        if args.question_id not in questions:
            raise DatasetError(f"no packaged question {args.question_id}; choose from {sorted(questions)}")
        question = questions[args.question_id]
    else:
        question = args.question
    answers = [_read(p, "answer version") for p in args.answers]
    transcript = _read(args.transcript, "transcript") if args.transcript else ""
    if not args.answer_only and len(answers) < 2:
        raise ContractError("gen-reference needs --answers with at least two files (or --answer-only)")

    if args.print_prompt:
        prompt = render_answer(question) if args.answer_only else render_consolidate(question, answers, transcript)
        _emit_text(prompt, args.out)
        return EXIT_OK
    with _session(config, args.offline, True) as session:
        if args.answer_only:
            text = generate_answer(question, session)
        else:
            text = generate_reference(question, answers, transcript, session)
    _emit_text(text if text.endswith("\n") else text + "\n", args.out)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    reports = [load_report(p) for p in args.inputs]
    if args.format == "markdown":
        text = merge_markdown(reports)
    elif len(reports) == 1:
        text = render(reports[0], args.format)
    else:
        raise ContractError(f"{args.format} output takes a single report; use markdown to merge")
    if args.out:
        name = {"markdown": "report.md", "csv": "report.csv", "json": "report.json"}[args.format]
        write_text(Path(args.out) / name, text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "evaluate": cmd_evaluate,
    "extract": cmd_extract,
    "perturb": cmd_perturb,
    "baselines": cmd_baselines,
    "gen-reference": cmd_gen_reference,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DatasetError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
