"""Acceptance gate: one test per top-level criterion, in order.

Each test prints a single [acceptance N] PASS line with the measured
numbers once its assertions hold, so a verbose run reads as a checklist.
Criterion 9 (live backend smoke) is network-gated and skipped unless
QEVA_LIVE_BASE_URL is set.
"""

import json
import os
import random
import socket
import time
from fractions import Fraction

import pytest

from conftest import MINI_DATASET, RECORDINGS
from helpers import AnswerBackend, CountingBackend, hash_answerer, random_qa_set
from oracles import (
    check_chronology_gold,
    oracle_alpha,
    oracle_bleu,
    oracle_clipped_precision,
    oracle_lcs,
    oracle_spearman_rho,
    oracle_tau_b,
    oracle_tau_c,
)
from qeva.baselines import bleu_n, lcs_length, rouge_l
from qeva.cli import main as cli_main
from qeva.core import (
    Dimension,
    DimensionScore,
    FilterStatus,
    MediaRef,
    Summary,
    canonical_dumps,
)
from qeva.errors import DegenerateSample
from qeva.filtering import FilterConfig, filter_pipeline
from qeva.qagen import EventTimeline, TimelineEvent, generate_chronology_qa
from qeva.scoring import GradedAnswer, GradeRule, qeva_score, score_dimension
from qeva.stats import (
    AgreementMetric,
    alpha_from_units,
    kendall_exact_p,
    kendall_tau_b,
    kendall_tau_c,
    spearman_rho,
)


def report(n: int, message: str) -> None:
    print(f"[acceptance {n}] PASS — {message}")


# --- 1: statistics oracle equivalence ------------------------------------------


def test_acceptance_1_statistics_match_enumeration_oracle():
    rng = random.Random(1001)
    start = time.monotonic()
    checked = degenerate = 0
    worst_rho = 0.0
    while checked < 1000:
        n = rng.randint(2, 8)
        if rng.random() < 0.5:  # heavy ties
            x = [rng.randint(1, 4) for _ in range(n)]
            y = [rng.randint(1, 4) for _ in range(n)]
        else:
            x = [round(rng.uniform(0, 10), 3) for _ in range(n)]
            y = [round(rng.uniform(0, 10), 3) for _ in range(n)]
        if len(set(x)) < 2 or len(set(y)) < 2:
            with pytest.raises(DegenerateSample):
                kendall_tau_b(x, y)
            degenerate += 1
            continue
        assert kendall_tau_b(x, y).statistic == oracle_tau_b(x, y)
        assert kendall_tau_c(x, y).statistic == oracle_tau_c(x, y)
        gap = abs(spearman_rho(x, y).statistic - oracle_spearman_rho(x, y))
        worst_rho = max(worst_rho, gap)
        assert gap <= 1e-12
        checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report(
        1,
        f"tau_b/tau_c exact and rho within 1e-12 (worst {worst_rho:.2e}) on "
        f"1000 samples, {degenerate} degenerate draws consistent, {elapsed:.1f}s",
    )


# --- 2: exact vs asymptotic p-values --------------------------------------------


def test_acceptance_2_exact_vs_asymptotic_p():
    rng = random.Random(2026)
    outside = []
    trials = 0
    for trial in range(400):
        n = 8
        if trial % 4 == 3:  # 1 in 4 draws is heavily tied
            x = [rng.randrange(1, 5) for _ in range(n)]
            y = [rng.randrange(1, 5) for _ in range(n)]
        else:
            x = [rng.random() for _ in range(n)]
            y = [rng.random() for _ in range(n)]
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        trials += 1
        p_exact = kendall_exact_p(x, y)
        p_approx = kendall_tau_b(x, y).p_value
        if abs(p_exact - p_approx) > 0.05:
            outside.append((trial, p_exact, p_approx))
    within = 1 - len(outside) / trials
    # documented failures: the tie-corrected normal approximation is weakest
    # on heavily tied n=8 draws, where S takes few distinct values
    for trial, p_exact, p_approx in outside:
        print(
            f"  band failure at trial {trial}: exact {p_exact:.4f} vs "
            f"approx {p_approx:.4f} (tied draw)"
        )
    assert within >= 0.95
    report(
        2,
        f"|p_exact - p_approx| <= 0.05 in {within:.1%} of {trials} n=8 trials "
        f"({len(outside)} documented failures, all tied draws)",
    )


# --- 3: Krippendorff's alpha ------------------------------------------------------


def test_acceptance_3_alpha_oracle_and_synthetic_regime():
    start = time.monotonic()

    perfect = [[3, 3], [1, 1], [5, 5, 5], [2, 2]]
    assert alpha_from_units(perfect, AgreementMetric.ORDINAL).value == 1.0

    rng = random.Random(33)
    compared = 0
    worst = 0.0
    while compared < 200:
        n_annotators = rng.randint(2, 5)
        n_items = rng.randint(2, 20)
        units = []
        for _ in range(n_items):
            unit = [
                rng.randint(1, 5)
                for _ in range(n_annotators)
                if rng.random() > 0.2  # missing ratings
            ]
            units.append(unit)
        usable = [u for u in units if len(u) >= 2]
        if len(usable) < 2 or len({v for u in usable for v in u}) < 2:
            continue
        try:
            ours = alpha_from_units(units, AgreementMetric.ORDINAL).value
        except DegenerateSample:
            continue
        gap = abs(ours - oracle_alpha(units, "ordinal"))
        worst = max(worst, gap)
        assert gap <= 1e-12
        compared += 1

    # the corpus-shaped synthetic: 800 summaries, 2 annotators, 5-point
    # Likert, noise mixing +-1 slips (40%) with uniform redraws (10%)
    synth_rng = random.Random(5)
    units = []
    for _ in range(800):
        true = synth_rng.randint(1, 5)
        pair = []
        for _ in range(2):
            r = synth_rng.random()
            if r < 0.10:
                pair.append(synth_rng.randint(1, 5))
            elif r < 0.50:
                pair.append(max(1, min(5, true + synth_rng.choice((-1, 1)))))
            else:
                pair.append(true)
        units.append(pair)
    synthetic = alpha_from_units(units, AgreementMetric.ORDINAL)
    assert synthetic.n_units == 800
    assert 0.63 <= synthetic.value <= 0.73

    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    report(
        3,
        f"perfect agreement exact 1.0; 200 random ordinal datasets within "
        f"1e-12 (worst {worst:.2e}); synthetic 800x2 Likert alpha = "
        f"{synthetic.value:.4f} in [0.63, 0.73]; {elapsed:.1f}s",
    )


# --- 4: score algebra --------------------------------------------------------------


def test_acceptance_4_score_algebra_10000_cases():
    rng = random.Random(44)
    start = time.monotonic()
    dims = (Dimension.COVERAGE, Dimension.FACTUALITY, Dimension.CHRONOLOGY)
    for _ in range(10_000):
        parts = []
        for dim in dims:
            total = rng.randint(1, 30)
            correct = rng.randint(0, total)
            parts.append((dim, correct, total))
        scores = [
            DimensionScore(dimension=d, correct=c, total=t) for d, c, t in parts
        ]
        # range and exact ratio
        for (d, c, t), score in zip(parts, scores):
            assert score.value == c / t
            assert 0.0 <= score.value <= 1.0
        # mean identity
        overall = qeva_score("s", *scores).overall
        exact = sum(Fraction(c, t) for _, c, t in parts) / 3
        assert abs(overall - exact) <= 1e-12
        assert 0.0 <= overall <= 1.0
        # monotonicity under one answer flip
        d0, c0, t0 = parts[0]
        if c0 < t0:
            bumped = qeva_score(
                "s",
                DimensionScore(dimension=d0, correct=c0 + 1, total=t0),
                scores[1],
                scores[2],
            ).overall
            assert bumped > overall
        # permutation invariance of the per-dimension proportion
        flags = [rng.random() < 0.5 for _ in range(rng.randint(1, 12))]
        graded = [
            GradedAnswer(f"q{i}", "x", "A", ok, GradeRule.INDEX_MATCH)
            for i, ok in enumerate(flags)
        ]
        shuffled = list(graded)
        rng.shuffle(shuffled)
        assert score_dimension(graded, dims[0]) == score_dimension(
            shuffled, dims[0]
        )
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    report(4, f"range/ratio/mean/monotonicity/permutation over 10,000 cases, {elapsed:.1f}s")


# --- 5: filtering partition ---------------------------------------------------------


def test_acceptance_5_filter_partition_and_fixed_point():
    video = MediaRef(id="v1", frame_dir="/frames/v1")
    summary = Summary(id="s1", system="sys", video_id="v1", text="events happen")
    checked_sets = checked_items = 0
    for seed in range(120):
        rng = random.Random(seed)
        qas = random_qa_set(rng)
        model = AnswerBackend(hash_answerer)
        cfg = FilterConfig(
            trivial_model=model,
            quality_model=model,
            generator_id="mock-video",
            max_concurrency=2,
        )
        first = filter_pipeline(qas, video, summary, cfg)

        input_ids = sorted(qa.id for qa in qas)
        bucket_ids = sorted(
            qa.id
            for bucket in (
                first.kept,
                first.removed_trivial,
                first.removed_low_quality,
                first.pending,
            )
            for qa in bucket
        )
        assert bucket_ids == input_ids  # statuses partition the input
        assert set(qa.id for qa in first.kept) <= set(input_ids)

        counting = CountingBackend(AnswerBackend(hash_answerer))
        cfg2 = FilterConfig(
            trivial_model=counting,
            quality_model=counting,
            generator_id="mock-video",
            max_concurrency=2,
        )
        second = filter_pipeline(first.items, video, summary, cfg2)
        assert [qa.filtered for qa in second.items] == [
            qa.filtered for qa in first.items
        ]
        assert counting.calls == 0  # fixed point, no re-probing
        checked_sets += 1
        checked_items += len(qas)

    verified = 0
    for seed in range(40):
        rng = random.Random(1000 + seed)
        qas = random_qa_set(rng)
        if len(qas) < 3:
            continue
        state = {"calls": 0}

        def flaky(request):
            state["calls"] += 1
            if state["calls"] % 3 == 0:
                raise RuntimeError("transient outage")
            return hash_answerer(request)

        model = AnswerBackend(flaky)
        cfg = FilterConfig(
            trivial_model=model, quality_model=model,
            generator_id="mock-video", max_concurrency=1,
        )
        result = filter_pipeline(qas, video, summary, cfg)
        counts = result.counts()
        assert sum(counts.values()) == len(qas)
        errored_ids = {qa_id for qa_id, _ in result.errors}
        pending_ids = {qa.id for qa in result.pending}
        assert pending_ids <= errored_ids  # pending only ever means "probe failed"
        verified += 1
    assert verified >= 30
    report(
        5,
        f"partition + kept-subset + double-filter fixed point over "
        f"{checked_sets} random QA sets ({checked_items} questions); "
        f"{verified} error-injection runs stay partitioned",
    )


# --- 6: chronology gold consistency ---------------------------------------------------


def test_acceptance_6_chronology_gold_brute_force_and_determinism():
    rng = random.Random(66)
    start = time.monotonic()
    questions = 0
    for trial in range(1000):
        n_events = rng.randint(2, 10)
        descriptions = [
            f"event {i} {rng.choice('abcdefg')}{rng.randint(0, 99)}"
            for i in range(n_events)
        ]
        timeline = EventTimeline(
            video_id=f"v{trial}",
            events=tuple(
                TimelineEvent(index=i, description=d)
                for i, d in enumerate(descriptions)
            ),
        )
        n = rng.randint(3, 12)
        seed = rng.randrange(2**32)
        qas = generate_chronology_qa(timeline, n, seed)
        assert len(qas) == n
        for qa in qas:
            assert check_chronology_gold(descriptions, qa)
        questions += len(qas)

        rerun = generate_chronology_qa(timeline, n, seed)
        first_bytes = canonical_dumps([qa.to_dict() for qa in qas])
        assert canonical_dumps([qa.to_dict() for qa in rerun]) == first_bytes
    elapsed = time.monotonic() - start
    report(
        6,
        f"{questions} gold answers over 1000 random timelines match brute-force "
        f"index order; regeneration byte-identical; {elapsed:.1f}s",
    )


# --- 7: baselines -----------------------------------------------------------------


def test_acceptance_7_baseline_worked_examples_and_oracles():
    # worked examples, 1e-4 tolerance
    assert bleu_n(["w1", "w2", "w3", "w4"], ["w1", "w2", "w3", "w4"], 4) == 1.0
    brevity = bleu_n(["the", "cat", "sat"], ["the", "cat", "sat", "on", "the", "mat"], 1)
    assert abs(brevity - 0.3679) <= 1e-4
    f1 = rouge_l(["the", "cat", "sat"], ["the", "cat", "sat", "on", "the", "mat"]).f
    assert abs(f1 - 0.6667) <= 1e-4
    assert rouge_l(["a", "b"], ["c", "d"]).f == 0.0
    assert lcs_length(["a", "b", "c"], ["c", "b", "a"]) == 1

    # count clipping: repeating a matched token cannot raise precision past
    # its reference count ("w" appears twice in the reference)
    assert bleu_n(["w"] * 4, ["w", "w", "x"], 1) == 0.5
    assert bleu_n(["w"] * 8, ["w", "w", "x"], 1) == 0.25
    assert oracle_clipped_precision(["w"] * 8, ["w", "w", "x"], 1) == Fraction(2, 8)

    rng = random.Random(77)
    vocabulary = ["the", "cat", "sat", "on", "mat", "dog", "ran", "far"]
    checked = 0
    for _ in range(400):
        cand = [rng.choice(vocabulary) for _ in range(rng.randint(1, 12))]
        ref = [rng.choice(vocabulary) for _ in range(rng.randint(1, 12))]
        max_n = rng.randint(1, 4)
        assert abs(bleu_n(cand, ref, max_n) - oracle_bleu(cand, ref, max_n)) <= 1e-12
        assert lcs_length(cand, ref) == oracle_lcs(cand, ref)
        if len(cand) >= max_n and cand == ref:
            assert bleu_n(cand, ref, max_n) == 1.0
        checked += 1
    # identity family
    for k in (1, 2, 3, 4):
        sample = vocabulary[: 4 + k]
        assert bleu_n(sample, sample, k) == 1.0
    report(7, f"worked examples within 1e-4; {checked} random inputs match the n-gram/LCS oracles")


# --- 8: end-to-end offline replication --------------------------------------------


def test_acceptance_8_offline_replication_bytes_and_shape(tmp_path, monkeypatch):
    assert MINI_DATASET.is_dir(), "bundled fixtures/mini is missing"
    assert any(RECORDINGS.glob("*.json")), "bundled fixtures/recordings is missing"

    def no_network(*args, **kwargs):
        raise AssertionError("network use attempted during offline replication")

    monkeypatch.setattr(socket.socket, "connect", no_network)
    monkeypatch.setattr(socket, "create_connection", no_network)

    start = time.monotonic()
    trees = {}
    for attempt in ("first", "second"):
        base = tmp_path / attempt
        rc = cli_main(
            [
                "evaluate",
                "--dataset", str(MINI_DATASET),
                "--backend", "replay",
                "--fixture-store", str(RECORDINGS),
                "--seed", "7",
                "--out-dir", str(base / "qeva"),
            ]
        )
        assert rc == 0
        rc = cli_main(
            [
                "baseline",
                "--dataset", str(MINI_DATASET),
                "--metric", "rougel",
                "--out", str(base / "rougel.json"),
            ]
        )
        assert rc == 0
        rc = cli_main(
            [
                "correlate",
                "--dataset", str(MINI_DATASET),
                "--runs", str(base / "qeva/qeva_run.json"), str(base / "rougel.json"),
                "--criterion",
                "--out-dir", str(base / "report"),
            ]
        )
        assert rc == 0
        trees[attempt] = {
            p.relative_to(base).as_posix(): p.read_bytes()
            for p in sorted(base.rglob("*"))
            if p.is_file()
        }
    elapsed = time.monotonic() - start
    assert trees["first"] == trees["second"]
    assert elapsed < 30.0

    files = trees["first"]
    table = files["report/report.txt"].decode("utf-8")
    header, *_ = [l for l in table.splitlines() if l.startswith("metric")]
    assert header.split() == ["metric", "n", "tau_b", "(p)", "tau_c", "(p)", "rho", "(p)"]
    assert any(line.startswith("qeva") for line in table.splitlines())
    assert any(line.startswith("rougel") for line in table.splitlines())

    criterion = files["report/criterion_report.txt"].decode("utf-8")
    for dim in ("coverage", "factuality", "chronology"):
        assert any(line.startswith(dim) for line in criterion.splitlines())

    run = json.loads(files["qeva/qeva_run.json"].decode("utf-8"))
    assert len(run["per_summary"]) == 6 and not run["excluded"]
    figures = [name for name in files if name.endswith(".png")]
    assert len(figures) >= 3  # bar chart + per-run scatters + criterion bars
    report(
        8,
        f"evaluate+correlate on fixtures/mini byte-identical across runs, "
        f"Table-1/Table-3 shaped reports + {len(figures)} figures, "
        f"network blocked, {elapsed:.1f}s",
    )


# --- 9: live backend smoke (optional) ------------------------------------------------

LIVE_URL = os.environ.get("QEVA_LIVE_BASE_URL")

# 1x1 red pixel; enough for a vision endpoint to accept the frames
_PNG = bytes.fromhex(
    "89504e470d0a1a0a0000000d49484452000000010000000108020000009077"
    "53de0000000c4944415408d763f8cfc000000301010018dd8db00000000049"
    "454e44ae426082"
)


@pytest.mark.skipif(
    not LIVE_URL,
    reason="live smoke is network-gated; set QEVA_LIVE_BASE_URL "
    "(and optionally QEVA_LIVE_MODEL / QEVA_LIVE_API_KEY_ENV) to run it",
)
def test_acceptance_9_live_backend_smoke(tmp_path):
    from qeva.backends.http import HttpBackend
    from qeva.harness import load_dataset, load_metric_run, run_qeva
    from qeva.harness.pipeline import PipelineConfig
    from helpers import write_dataset

    frames = tmp_path / "frames" / "v1"
    frames.mkdir(parents=True)
    for i in range(2):
        (frames / f"{i:03d}.png").write_bytes(_PNG)
    root = write_dataset(
        tmp_path / "ds",
        videos=[{"id": "v1", "frame_dir": str(frames)}],
        references=[],
        candidates=[
            {
                "id": "s1",
                "video_id": "v1",
                "system": "live",
                "text": "A single red frame is shown.",
            }
        ],
        annotations=[],
    )
    model_name = os.environ.get("QEVA_LIVE_MODEL", "gpt-4o-mini")
    key_env = os.environ.get("QEVA_LIVE_API_KEY_ENV")
    generator = HttpBackend(
        LIVE_URL, model_name, api_key_env=key_env, supports_video=True
    )
    alt = HttpBackend(
        LIVE_URL,
        model_name,
        api_key_env=key_env,
        backend_id=f"{model_name}-filter",
        supports_video=True,
    )
    cfg = PipelineConfig(
        video_model=generator,
        text_model=generator,
        filter_trivial_model=alt,
        filter_quality_model=alt,
        n_coverage=3,
        n_factuality=3,
        n_chronology=3,
        seed=7,
        max_concurrency=2,
    )
    ds = load_dataset(root)
    out = tmp_path / "live_run.json"
    run = run_qeva(ds, cfg, out, artifacts_out=tmp_path / "live_artifacts.jsonl")
    loaded = load_metric_run(out)  # all outputs re-validate on load
    assert set(loaded.per_summary) | set(loaded.excluded) == {"s1"}
    for line in (tmp_path / "live_artifacts.jsonl").read_text("utf-8").splitlines():
        record = json.loads(line)
        assert record["summary_id"] == "s1"
        for qa in record["questions"]:
            assert FilterStatus(qa["filtered"])
    report(9, f"live evaluate completed against {LIVE_URL} and outputs validate")
