from __future__ import annotations

import pytest

from ems_eval.core import EvalTriplet
from ems_eval.errors import ContractError, MatchingError, RunError
from ems_eval.extraction import ExtractorConfig
from ems_eval.matching import MatcherConfig
from ems_eval.pipeline import BaselineConfig, RunConfig, TripletResult, EmsReport, run_baselines, run_evaluation
from ems_eval.scoring import ScorerConfig
from ems_eval.synthetic import synthetic_triplet

from .prompt_examples import task_section

EXACT = RunConfig(scorers=[ScorerConfig(mode="exact")])
ANSWER = "Revenue rose 12% to $4.1 billion.\n\nMargins widened to 31%.\n\nDebt fell by $2 billion."


def triplet(tid="t1", reference=ANSWER, candidate=ANSWER):
    return EvalTriplet(tid, "Contoso", 1, "Q?", reference, candidate)


def test_identity_gives_perfect_scores():
    report = run_evaluation(EXACT, [triplet()])
    m = report.rows[0].metrics
    assert m["ems_exact_precision"] == m["ems_exact_recall"] == m["ems_exact_f1"] == 1.0
    assert m["bleu"] == 1.0 and m["rouge_l_f1"] == 1.0
    assert report.rows[0].assignment == [0, 1, 2]


def test_default_config_runs_without_gateway():
    report = run_evaluation(RunConfig(), [synthetic_triplet(1)])
    assert set(report.aggregate) >= {"ems_rouge_f1", "bleu", "rouge_l_precision"}
    assert all(0 <= v <= 1 for v in report.aggregate.values())


def test_worked_example_end_to_end(mock_server, make_gateway):
    refs = ["ref alpha.", "ref beta.", "ref gamma.", "ref delta."]
    cands = ["cand w.", "cand x.", "cand y.", "cand z."]
    ref_text, cand_text = "\n".join(f"- {r}" for r in refs), "\n".join(f"- {c}" for c in cands)
    mock_server.add_rule(task_section("Your Task:", "Candidate Answer:\n- ref alpha"), '["' + '", "'.join(refs) + '"]')
    mock_server.add_rule(task_section("Your Task:", "Candidate Answer:\n- cand w"), '["' + '", "'.join(cands) + '"]')
    for r, idx in zip(refs, (3, 1, 2, -1)):
        mock_server.add_rule(task_section("Your Task:", f'Reference Keypoint:\n"{r}"'), str(idx))
    for r, c, raw in (("ref alpha.", "cand z.", 8), ("ref beta.", "cand x.", 10), ("ref gamma.", "cand y.", 5)):
        mock_server.add_rule(lambda t, r=r, c=c: f"Keypoint 1:\n{r}\n\nKeypoint 2:\n{c}" in t, str(raw))
    config = RunConfig(
        extractor=ExtractorConfig(mode="llm"),
        matcher=MatcherConfig(mode="llm"),
        scorers=[ScorerConfig(mode="llm")],
    )
    report = run_evaluation(config, [triplet(reference=ref_text, candidate=cand_text)], make_gateway())
    row = report.rows[0]
    assert row.assignment == [3, 1, 2, -1]
    assert row.metrics["ems_llm_recall"] == (0.8 + 1.0 + 0.5 + 0.0) / 4
    assert row.metrics["ems_llm_precision"] == (0.0 + 1.0 + 0.5 + 0.8) / 4
    assert (row.n_ref, row.n_ans, row.matched) == (4, 4, 3)


def test_empty_candidate_extraction_flagged(mock_server, make_gateway):
    mock_server.add_rule(task_section("Your Task:", "useless"), "[]")
    config = RunConfig(extractor=ExtractorConfig(mode="llm"))
    report = run_evaluation(config, [triplet(candidate="useless filler")], make_gateway())
    row = report.rows[0]
    assert "empty_candidate" in row.flags
    assert row.metrics["ems_rouge_precision"] == row.metrics["ems_rouge_recall"] == row.metrics["ems_rouge_f1"] == 0.0
    assert row.n_ans == 0 and row.assignment == [-1, -1, -1]


def test_failed_triplet_recorded_not_fatal(mock_server, make_gateway):
    mock_server.add_rule(lambda t: "Matched Index:" in t and "bad candidate" in t, "nonsense")
    config = RunConfig(matcher=MatcherConfig(mode="llm", max_reprompts=0))
    good = triplet("a")
    bad = triplet("b", candidate="bad candidate text.")
    report = run_evaluation(config, [bad, good], make_gateway())
    rows = {r.id: r for r in report.rows}
    assert rows["a"].ok and not rows["b"].ok
    assert rows["b"].flags == ["failed:MatchingError"]
    assert report.metadata["n_failed"] == 1
    assert report.aggregate == rows["a"].metrics


def test_strict_mode_raises(mock_server, make_gateway):
    mock_server.add_rule(lambda t: True, "nonsense")
    config = RunConfig(matcher=MatcherConfig(mode="llm", max_reprompts=0), strict=True)
    with pytest.raises(MatchingError):
        run_evaluation(config, [triplet()], make_gateway())


def test_all_failed_is_run_error(mock_server, make_gateway):
    mock_server.add_rule(lambda t: True, "nonsense")
    config = RunConfig(matcher=MatcherConfig(mode="llm", max_reprompts=0))
    with pytest.raises(RunError):
        run_evaluation(config, [triplet()], make_gateway())


def test_gateway_required_for_llm_stages():
    with pytest.raises(ContractError):
        run_evaluation(RunConfig(matcher=MatcherConfig(mode="llm")), [triplet()])


def test_aggregate_is_macro_mean_and_rows_sorted():
    ts = [synthetic_triplet(s) for s in (5, 2, 9)]
    report = run_evaluation(RunConfig(), ts)
    assert [r.id for r in report.rows] == sorted(t.id for t in ts)
    for key, value in report.aggregate.items():
        assert value == pytest.approx(sum(r.metrics[key] for r in report.rows) / 3, abs=1e-12)


def test_multiple_scorers_share_matching():
    config = RunConfig(scorers=[ScorerConfig(mode="exact"), ScorerConfig(mode="rouge"),
                                ScorerConfig(mode="rouge", rouge_variant="rouge-1")])
    row = run_evaluation(config, [synthetic_triplet(3)]).rows[0]
    assert {"ems_exact_f1", "ems_rouge_f1", "ems_rouge_1_f1"} <= set(row.metrics)


def test_scorer_names_must_be_unique():
    with pytest.raises(ContractError):
        RunConfig(scorers=[ScorerConfig(), ScorerConfig()])


def test_metadata_and_clock():
    report = run_evaluation(RunConfig(seed=11), [triplet()], clock=lambda: "T")
    md = report.metadata
    assert md["seed"] == 11 and md["started_at"] == "T" and len(md["config_digest"]) == 64
    frozen = run_evaluation(RunConfig(seed=11), [triplet()], clock=None)
    assert "started_at" not in frozen.metadata
    assert frozen.metadata["config_digest"] == md["config_digest"]


def test_digest_tracks_settings_not_paths():
    a, b = RunConfig(), RunConfig(output_dir="elsewhere", label="x")
    assert a.digest() == b.digest()
    assert a.digest() != RunConfig(seed=1).digest()


def test_concurrent_run_matches_sequential(mock_server, make_gateway):
    ts = [synthetic_triplet(s, n_facts=4) for s in range(6)]
    config = RunConfig(matcher=MatcherConfig(mode="llm"), scorers=[ScorerConfig(mode="llm")], concurrency=4)
    mock_server.delay = 0.005
    parallel = run_evaluation(config, ts, make_gateway(cache=False, concurrency=4), clock=None)
    sequential = run_evaluation(RunConfig(matcher=MatcherConfig(mode="llm"), scorers=[ScorerConfig(mode="llm")],
                                          concurrency=1), ts, make_gateway(cache=False), clock=None)
    assert [r.to_dict() for r in parallel.rows] == [r.to_dict() for r in sequential.rows]
    assert mock_server.max_inflight <= 4


def test_embedding_baseline(make_gateway):
    config = RunConfig(baselines=BaselineConfig(embedding=True, rouge_variants=("rouge-1", "rouge-2", "rouge-l")))
    row = run_evaluation(config, [triplet()], make_gateway()).rows[0]
    assert row.metrics["embed_sim"] == 1.0
    assert row.metrics["rouge_2_f1"] == 1.0


def test_baselines_only():
    report = run_baselines(RunConfig(), [triplet(), triplet("t2", candidate="Something else entirely.")])
    assert report.rows[0].metrics["bleu"] == 1.0
    assert not any(k.startswith("ems_") for k in report.aggregate)


def test_report_round_trip():
    report = run_evaluation(RunConfig(), [triplet()], clock=None)
    again = EmsReport.from_dict(report.to_dict())
    assert again.to_dict() == report.to_dict()
    assert isinstance(again.rows[0], TripletResult)
