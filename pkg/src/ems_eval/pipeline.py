"""Run orchestration: extract, match, score and baseline every triplet of a dataset."""

from __future__ import annotations

import hashlib
import json
import logging
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any

from . import __version__
from .baselines import ROUGE_VARIANTS, bleu, embed_similarity, rouge
from .core import EvalTriplet, MatchAssignment, aggregate_reports, compute_metrics
from .errors import ContractError, EmptyExtractionError, EmsError, RunError
from .extraction import ExtractorConfig, extract
from .gateway import Gateway, GatewayConfig
from .matching import MatcherConfig, build_matcher, match_all
from .scoring import ScorerConfig, build_scorer, score_assignment

logger = logging.getLogger(__name__)


@dataclass
class BaselineConfig:
    bleu: bool = True
    bleu_max_n: int = 4
    rouge_variants: tuple[str, ...] = ("rouge-l",)
    embedding: bool = False

    def __post_init__(self) -> None:
        self.rouge_variants = tuple(self.rouge_variants)
        bad = [v for v in self.rouge_variants if v not in ROUGE_VARIANTS]
        if bad:
            raise ContractError(f"unknown ROUGE variant(s) {bad}")
        if self.bleu_max_n < 1:
            raise ContractError("bleu_max_n must be >= 1")


def metric_prefix(scorer: ScorerConfig) -> str:
    if scorer.mode == "rouge" and scorer.rouge_variant != "rouge-l":
        return f"ems_rouge_{scorer.rouge_variant.split('-')[1]}"
    return scorer.name


def rouge_prefix(variant: str) -> str:
    return variant.replace("-", "_")


def _stage_settings(stage_config: Any) -> dict[str, Any]:
    """Stage config as a dict, with a custom prompt replaced by its hash."""
    out = asdict(stage_config)
    if out.get("prompt_template") is not None:
        out["prompt_template"] = "sha256:" + hashlib.sha256(out["prompt_template"].encode("utf-8")).hexdigest()
    return out


@dataclass
class RunConfig:
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    scorers: list[ScorerConfig] = field(default_factory=lambda: [ScorerConfig()])
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    concurrency: int = 4
    output_dir: str = "runs"
    seed: int = 0
    strict: bool = False
    label: str = "run"

    def __post_init__(self) -> None:
        if self.concurrency < 1:
            raise ContractError("concurrency must be >= 1")
        names = [metric_prefix(s) for s in self.scorers]
        if len(set(names)) != len(names):
            raise ContractError(f"scorer metric names collide: {names}")

    @property
    def needs_gateway(self) -> bool:
        return (
            self.extractor.mode == "llm"
            or self.matcher.mode == "llm"
            or any(s.mode in ("llm", "embedding") for s in self.scorers)
            or self.baselines.embedding
        )

    def settings(self) -> dict[str, Any]:
        """Everything that can change a metric value; excludes paths and labels."""
        gw = asdict(self.gateway)
        for key in ("cache_dir", "concurrency", "timeout", "retry_max", "backoff_base", "backoff_cap"):
            gw.pop(key)
        return {
            "extractor": _stage_settings(self.extractor),
            "matcher": _stage_settings(self.matcher),
            "scorers": [_stage_settings(s) for s in self.scorers],
            "baselines": asdict(self.baselines),
            "gateway": gw,
            "seed": self.seed,
        }

    def digest(self) -> str:
        blob = json.dumps(self.settings(), sort_keys=True, separators=(",", ":"), default=list)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class TripletResult:
    id: str
    company: str
    question_id: int
    n_ref: int = 0
    n_ans: int = 0
    matched: int = 0
    assignment: list[int] = field(default_factory=list)
    metrics: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TripletResult:
        return cls(**data)


@dataclass
class EmsReport:
    label: str
    rows: list[TripletResult]
    aggregate: dict[str, float]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def ok_rows(self) -> list[TripletResult]:
        return [r for r in self.rows if r.ok]

    def metric_names(self) -> list[str]:
        names: dict[str, None] = {}
        for r in self.ok_rows:
            names.update(dict.fromkeys(r.metrics))
        return list(names)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "metadata": self.metadata,
            "aggregate": self.aggregate,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EmsReport:
        try:
            return cls(
                label=data["label"],
                rows=[TripletResult.from_dict(r) for r in data["rows"]],
                aggregate=dict(data["aggregate"]),
                metadata=dict(data.get("metadata", {})),
            )
        except (KeyError, TypeError) as exc:
            raise ContractError(f"not a report document: {exc}") from exc


def baseline_metrics(
    triplet: EvalTriplet, config: BaselineConfig, session: Gateway | None = None
) -> dict[str, float]:
    out: dict[str, float] = {}
    if config.bleu:
        out["bleu"] = bleu(triplet.candidate, triplet.reference, config.bleu_max_n)
    for variant in config.rouge_variants:
        score = rouge(triplet.candidate, triplet.reference, variant)
        prefix = rouge_prefix(variant)
        out[f"{prefix}_precision"] = score.precision
        out[f"{prefix}_recall"] = score.recall
        out[f"{prefix}_f1"] = score.f1
    if config.embedding:
        if session is None:
            raise ContractError("the embedding baseline needs a gateway session")
        out["embed_sim"] = embed_similarity(triplet.candidate, triplet.reference, session)
    return out


def evaluate_triplet(
    triplet: EvalTriplet,
    config: RunConfig,
    session: Gateway | None = None,
    executor: Executor | None = None,
) -> TripletResult:
    """EMS metrics for every configured scorer plus baselines for one triplet.

    Extraction and matching run once and are shared by all scorers.
    """
    result = TripletResult(triplet.id, triplet.company, triplet.question_id)
    refs = extract(triplet.reference, config.extractor, session)
    if not refs:
        raise EmptyExtractionError("reference extraction produced no points")
    try:
        cands = extract(triplet.candidate, config.extractor, session)
    except EmptyExtractionError:
        cands = []
    if not cands:
        result.flags.append("empty_candidate")

    assignment = (
        match_all(refs, cands, build_matcher(config.matcher, session), executor)
        if cands
        else MatchAssignment.unmatched(len(refs), 0)
    )
    result.n_ref, result.n_ans = len(refs), len(cands)
    result.assignment = list(assignment.assignments)
    result.matched = assignment.matched_count

    for scorer_cfg in config.scorers:
        scorer = build_scorer(scorer_cfg, session)
        ref_scores = score_assignment(refs, cands, assignment, scorer, executor)
        result.metrics.update(compute_metrics(assignment, ref_scores).as_dict(metric_prefix(scorer_cfg)))
    result.metrics.update(baseline_metrics(triplet, config.baselines, session))
    return result


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_evaluation(
    config: RunConfig,
    triplets: Sequence[EvalTriplet],
    session: Gateway | None = None,
    *,
    clock: Callable[[], str | None] | None = utc_now,
) -> EmsReport:
    """Evaluate every triplet; a failing triplet becomes a flagged row unless ``config.strict``.

    ``clock=None`` leaves timestamps out so offline reports are byte-stable.
    """
    if not triplets:
        raise ContractError("nothing to evaluate: no triplets")
    if config.needs_gateway and session is None:
        raise ContractError("this configuration calls a model; pass a gateway session")
    digest = config.digest()
    if session is not None and session.cache is not None:
        session.cache.check_config_digest(digest)
    started = clock() if clock else None

    def one(t: EvalTriplet, inner: Executor | None) -> TripletResult:
        try:
            return evaluate_triplet(t, config, session, inner)
        except EmsError as exc:
            if config.strict:
                raise
            logger.warning("triplet %s failed: %s", t.id, exc)
            flag = f"failed:{type(exc).__name__}"
            return TripletResult(t.id, t.company, t.question_id, flags=[flag], error=str(exc))

    if session is None or config.concurrency == 1:
        rows = [one(t, None) for t in triplets]
    else:
        # separate pools so triplet workers never starve their own fan-out calls
        with ThreadPoolExecutor(config.concurrency, thread_name_prefix="ems-triplet") as outer, \
                ThreadPoolExecutor(config.concurrency, thread_name_prefix="ems-call") as inner:
            rows = list(outer.map(lambda t: one(t, inner), triplets))
    rows.sort(key=lambda r: r.id)

    ok = [r for r in rows if r.ok]
    if not ok:
        raise RunError(f"all {len(rows)} triplets failed; first error: {rows[0].error}")

    metadata: dict[str, Any] = {
        "config_digest": digest,
        "seed": config.seed,
        "package_version": __version__,
        "n_triplets": len(rows),
        "n_failed": len(rows) - len(ok),
        "config": config.settings(),
    }
    if clock:
        metadata["started_at"] = started
        metadata["finished_at"] = clock()
    return EmsReport(config.label, rows, aggregate_reports([r.metrics for r in ok]), metadata)


def run_baselines(
    config: RunConfig,
    triplets: Sequence[EvalTriplet],
    session: Gateway | None = None,
    *,
    clock: Callable[[], str | None] | None = utc_now,
) -> EmsReport:
    """Whole-answer baselines only, no extraction or matching."""
    if not triplets:
        raise ContractError("nothing to evaluate: no triplets")
    started = clock() if clock else None
    rows = []
    for t in triplets:
        row = TripletResult(t.id, t.company, t.question_id)
        try:
            row.metrics = baseline_metrics(t, config.baselines, session)
        except EmsError as exc:
            if config.strict:
                raise
            row.error, row.flags = str(exc), [f"failed:{type(exc).__name__}"]
        rows.append(row)
    rows.sort(key=lambda r: r.id)
    ok = [r for r in rows if r.ok]
    if not ok:
        raise RunError(f"all {len(rows)} triplets failed; first error: {rows[0].error}")
    metadata: dict[str, Any] = {
        "config_digest": config.digest(),
        "seed": config.seed,
        "package_version": __version__,
        "n_triplets": len(rows),
        "n_failed": len(rows) - len(ok),
        "config": {"baselines": asdict(config.baselines)},
    }
    if clock:
        metadata["started_at"] = started
        metadata["finished_at"] = clock()
    return EmsReport(config.label, rows, aggregate_reports([r.metrics for r in ok]), metadata)
