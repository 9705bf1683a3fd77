"""Command-line entry point.

Subcommands cover the pipeline end to end: generate-qa, filter, score,
evaluate (one-shot over a dataset), baseline, agreement, correlate, and
record-fixtures. Every subcommand honors --config (TOML); explicit
flags override config values. Logs go to standard error, data to files
or standard output. Exit codes: 0 success, 1 validation/config error,
2 backend failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .backends import (
    Backend,
    mock_suite,
    replay_suite,
    suite_from_config,
    wrap_recording,
)
from .backends.config import load_toml
from .core import (
    AnnotationRecord,
    Dimension,
    FilterStatus,
    QAPair,
    canonical_dumps,
    read_jsonl,
    write_jsonl,
)
from .errors import BackendError, ConfigError, EmptyDimension, ValidationError
from .filtering import FilterConfig, filter_pipeline
from .harness import (
    OVERALL,
    PipelineConfig,
    aggregate_human,
    chronology_seed,
    correlation_report,
    criterion_report,
    load_dataset,
    load_metric_run,
    render_figures,
    render_text,
    render_tsv,
    report_bar_figure,
    run_baseline,
    run_qeva,
)
from .qagen import (
    extract_event_timeline,
    extract_salient_elements,
    generate_chronology_qa,
    generate_coverage_qa,
    generate_factuality_qa,
)
from .scoring import answer_questions, grade_answer, qeva_score, score_dimension
from .stats import AgreementMetric, krippendorff_alpha

log = logging.getLogger("qeva")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file; flags override its values")
    p.add_argument(
        "--backend",
        choices=("mock", "replay"),
        help="backend shorthand: deterministic offline mock, or fixture replay",
    )
    p.add_argument(
        "--fixture-store",
        help="fixture directory (for --backend replay and record-fixtures)",
    )
    p.add_argument("--seed", type=int, help="sampling seed (default 0)")
    p.add_argument("--max-concurrency", type=int, help="parallel model calls")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def _run_value(args, config: dict, key: str, default):
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    return config.get("run", {}).get(key, default)


def _load_config(args) -> dict:
    return load_toml(args.config) if args.config else {}


def _make_suite(args, config: dict) -> dict[str, Backend]:
    choice = args.backend or config.get("run", {}).get("backend")
    if choice == "mock":
        return mock_suite()
    if choice == "replay":
        store = args.fixture_store or config.get("run", {}).get("fixture_store")
        if not store:
            raise ConfigError("--backend replay needs --fixture-store DIR")
        return replay_suite(store)
    if choice is not None:
        raise ConfigError(f"unknown backend shorthand {choice!r}")
    if "backends" in config:
        return suite_from_config(config)
    raise ConfigError(
        "no backends configured: pass --backend mock, --backend replay "
        "with --fixture-store, or --config with a [backends] section"
    )


def _pipeline_config(args, config: dict, suite: dict[str, Backend]) -> PipelineConfig:
    return PipelineConfig(
        video_model=suite["video"],
        text_model=suite["text"],
        filter_trivial_model=suite["filter_trivial"],
        filter_quality_model=suite["filter_quality"],
        n_coverage=_run_value(args, config, "n_coverage", 10),
        n_factuality=_run_value(args, config, "n_factuality", 10),
        n_chronology=_run_value(args, config, "n_chronology", 10),
        seed=_run_value(args, config, "seed", 0),
        max_concurrency=_run_value(args, config, "max_concurrency", 4),
    )


def _write_qa(qas: list[QAPair], out: str | None) -> None:
    if out:
        write_jsonl(out, qas)
    else:
        for qa in qas:
            sys.stdout.write(canonical_dumps(qa.to_dict()) + "\n")


# --- subcommands ------------------------------------------------------------


def cmd_generate_qa(args) -> int:
    config = _load_config(args)
    if args.backend_config:
        config = {**config, **load_toml(args.backend_config)}
    suite = _make_suite(args, config)
    cfg = _pipeline_config(args, config, suite)
    ds = load_dataset(args.dataset)
    n = args.n if args.n is not None else 10

    qas: list[QAPair] = []
    want = args.dimension
    if want in ("factuality", "all"):
        if not args.summary_id:
            raise ConfigError("factuality generation needs --summary-id")
        summary = ds.candidate_by_id(args.summary_id)
    if want in ("coverage", "chronology", "all"):
        video_id = args.video_id
        if video_id is None and args.summary_id:
            video_id = ds.candidate_by_id(args.summary_id).video_id
        if video_id is None:
            raise ConfigError("coverage/chronology generation needs --video-id")
        video = ds.video_by_id(video_id)

    if want in ("coverage", "all"):
        qas += generate_coverage_qa(video, n, suite["video"], cfg.decode)
    if want in ("chronology", "all"):
        timeline = extract_event_timeline(video, suite["video"], cfg.decode)
        qas += generate_chronology_qa(timeline, n, chronology_seed(cfg.seed, video.id))
    if want in ("factuality", "all"):
        elements = extract_salient_elements(summary, suite["text"], n, cfg.decode)
        qas += generate_factuality_qa(summary, elements, n, suite["text"], cfg.decode)

    _write_qa(qas, args.out)
    log.info("generated %d questions", len(qas))
    return 0


def cmd_filter(args) -> int:
    config = _load_config(args)
    if args.alt_backend_config:
        config = {**config, **load_toml(args.alt_backend_config)}
    suite = _make_suite(args, config)
    ds = load_dataset(args.dataset)
    video = ds.video_by_id(args.video_id)
    summary = ds.candidate_by_id(args.summary_id) if args.summary_id else None

    qas = list(read_jsonl(args.qa, QAPair))
    generator_id = args.generator_id or suite["video"].backend_id
    fcfg = FilterConfig(
        trivial_model=suite["filter_trivial"],
        quality_model=suite["filter_quality"],
        generator_id=generator_id,
        max_concurrency=_run_value(args, config, "max_concurrency", 4),
    )
    report = filter_pipeline(qas, video, summary, fcfg)

    out = Path(args.out) if args.out else Path(args.qa)
    write_jsonl(out, report.items)
    report_path = out.with_name(out.stem + ".report.json")
    report_path.write_text(canonical_dumps(report.to_dict()) + "\n", "utf-8")
    counts = report.counts()
    log.info(
        "filtered %d questions: %d kept, %d trivial, %d low-quality, %d pending",
        len(qas), counts["kept"], counts["removed_trivial"],
        counts["removed_low_quality"], counts["pending"],
    )
    return 0


def cmd_score(args) -> int:
    config = _load_config(args)
    suite = _make_suite(args, config)
    ds = load_dataset(args.dataset)
    summary = ds.candidate_by_id(args.summary_id)
    video = ds.video_by_id(summary.video_id)
    concurrency = _run_value(args, config, "max_concurrency", 4)

    qas = list(read_jsonl(args.qa, QAPair))
    kept = [qa for qa in qas if qa.filtered is FilterStatus.KEPT]
    index = {qa.id: qa for qa in kept}
    by_dim = {dim: [qa for qa in kept if qa.dimension is dim] for dim in Dimension}

    answers = answer_questions(
        by_dim[Dimension.COVERAGE] + by_dim[Dimension.CHRONOLOGY],
        summary,
        suite["text"],
        max_concurrency=concurrency,
    )
    answers += answer_questions(
        by_dim[Dimension.FACTUALITY], video, suite["video"],
        max_concurrency=concurrency,
    )
    graded = [grade_answer(index[qa_id], raw) for qa_id, raw in answers]
    graded_by_dim = {dim: [] for dim in Dimension}
    for g in graded:
        graded_by_dim[index[g.qa_id].dimension].append(g)

    empty = [d.value for d in Dimension if not graded_by_dim[d]]
    if empty:
        raise EmptyDimension(
            f"summary {summary.id} has no kept questions for: {', '.join(empty)}"
        )
    score = qeva_score(
        summary.id,
        *(score_dimension(graded_by_dim[d], d) for d in Dimension),
    )
    record = {
        "summary_id": summary.id,
        "graded": [g.to_dict() for g in graded],
        "score": score.to_dict(),
    }
    line = canonical_dumps(record) + "\n"
    if args.out:
        Path(args.out).write_text(line, "utf-8")
    else:
        sys.stdout.write(line)
    log.info("QEVA overall for %s: %.4f", summary.id, score.overall)
    return 0


def _evaluate(args, record_store: str | None = None) -> int:
    config = _load_config(args)
    suite = _make_suite(args, config)
    if record_store:
        suite = wrap_recording(suite, record_store)
    cfg = _pipeline_config(args, config, suite)
    ds = load_dataset(args.dataset)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run = run_qeva(
        ds, cfg, out_dir / "qeva_run.json", artifacts_out=out_dir / "artifacts.jsonl"
    )
    log.info(
        "scored %d summaries (%d excluded) -> %s",
        len(run.per_summary), len(run.excluded), out_dir / "qeva_run.json",
    )
    return 0


def cmd_evaluate(args) -> int:
    return _evaluate(args)


def cmd_record_fixtures(args) -> int:
    store = args.fixture_store or args.store
    if not store:
        raise ConfigError("record-fixtures needs --store DIR")
    return _evaluate(args, record_store=store)


def cmd_baseline(args) -> int:
    ds = load_dataset(args.dataset)
    out = args.out or f"{args.metric}_run.json"
    run = run_baseline(ds, args.metric, out)
    log.info(
        "%s over %d summaries (%d excluded) -> %s",
        args.metric, len(run.per_summary), len(run.excluded), out,
    )
    return 0


def cmd_agreement(args) -> int:
    if args.annotations:
        records = list(read_jsonl(args.annotations, AnnotationRecord))
    elif args.dataset:
        records = load_dataset(args.dataset).annotations
    else:
        raise ConfigError("agreement needs --dataset or --annotations")
    result = krippendorff_alpha(records, metric=AgreementMetric(args.metric))
    sys.stdout.write(f"alpha = {result.value:.4f}\n")
    log.info(
        "%s alpha over %d units (%d excluded, %d values)",
        result.metric.value, result.n_units, result.n_excluded, result.n_values,
    )
    if result.zero_expected_disagreement:
        log.warning("all annotations identical; alpha is 1.0 by convention")
    return 0


def cmd_correlate(args) -> int:
    ds = load_dataset(args.dataset)
    runs = [load_metric_run(path) for path in args.runs]
    target = args.target
    human = aggregate_human(ds, target)
    system_of = {c.id: c.system for c in ds.candidates}
    report = correlation_report(
        runs,
        human,
        target=target,
        system_of=system_of,
        per_system=args.per_system,
        system_filter=args.system,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json(), "utf-8")
    (out_dir / "report.txt").write_text(render_text(report), "utf-8")
    (out_dir / "report.tsv").write_text(render_tsv(report), "utf-8")
    render_figures(report, runs, human, out_dir, stem="report")
    sys.stdout.write(render_text(report))

    if args.criterion:
        qeva_runs = [r for r in runs if r.components]
        if not qeva_runs:
            raise ConfigError(
                "--criterion needs a run with per-dimension components (qeva)"
            )
        human_by_criterion = {
            dim.value: aggregate_human(ds, dim) for dim in Dimension
        }
        crit = criterion_report(
            qeva_runs[0].components,
            human_by_criterion,
            meta={"config_hash": qeva_runs[0].config_hash},
        )
        (out_dir / "criterion_report.json").write_text(crit.to_json(), "utf-8")
        (out_dir / "criterion_report.txt").write_text(render_text(crit), "utf-8")
        (out_dir / "criterion_report.tsv").write_text(render_tsv(crit), "utf-8")
        report_bar_figure(crit, out_dir / "criterion_report_correlations.png")
        sys.stdout.write("\n" + render_text(crit))
    log.info("reports written to %s", out_dir)
    return 0


# --- wiring -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qeva", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-qa", help="generate QA pairs for one item")
    _add_common(p)
    p.add_argument("--dataset", required=True, help="dataset root directory")
    p.add_argument(
        "--dimension",
        choices=("coverage", "factuality", "chronology", "all"),
        default="all",
    )
    p.add_argument("--n", type=int, help="questions per dimension (default 10)")
    p.add_argument("--video-id", help="video to generate from")
    p.add_argument("--summary-id", help="candidate summary (factuality)")
    p.add_argument("--backend-config", help="TOML overriding the [backends] section")
    p.add_argument("--out", help="output QA JSONL (default: stdout)")
    p.set_defaults(func=cmd_generate_qa)

    p = sub.add_parser("filter", help="two-stage QA filtering")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--qa", required=True, help="QA JSONL to filter")
    p.add_argument("--video-id", required=True, help="source video of the questions")
    p.add_argument("--summary-id", help="candidate summary the claims came from")
    p.add_argument("--generator-id", help="backend id that generated the questions")
    p.add_argument(
        "--alt-backend-config", help="TOML overriding [backends] for filter models"
    )
    p.add_argument("--out", help="output path (default: rewrite --qa in place)")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("score", help="answer kept questions and compute the score")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--qa", required=True, help="filtered QA JSONL")
    p.add_argument("--summary-id", required=True)
    p.add_argument("--out", help="output JSONL (default: stdout)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="generate, filter, and score a whole dataset")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", default="qeva-out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="reference-based baseline metric run")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--metric",
        required=True,
        choices=("bleu1", "bleu2", "bleu3", "bleu4", "rougel"),
    )
    p.add_argument("--out", help="output MetricRun JSON")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("agreement", help="inter-annotator Krippendorff's alpha")
    _add_common(p)
    p.add_argument("--dataset", help="dataset root (uses its annotations.jsonl)")
    p.add_argument("--annotations", help="bare AnnotationRecord JSONL")
    p.add_argument(
        "--metric",
        choices=("nominal", "ordinal", "interval"),
        default="ordinal",
        help="distance metric (default: ordinal)",
    )
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("correlate", help="correlate metric runs with human scores")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--runs", nargs="+", required=True, help="MetricRun JSON files")
    p.add_argument(
        "--target",
        choices=("overall", "coverage", "factuality", "chronology"),
        default=OVERALL,
        help="human aggregate to correlate against",
    )
    p.add_argument("--per-system", action="store_true", help="per-system sections")
    p.add_argument("--system", help="restrict to one system's summaries")
    p.add_argument(
        "--criterion",
        action="store_true",
        help="also emit the per-criterion report from qeva components",
    )
    p.add_argument("--out-dir", default="qeva-report")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser(
        "record-fixtures", help="run evaluate while recording all model calls"
    )
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--store", help="fixture directory to write")
    p.add_argument("--out-dir", default="qeva-out")
    p.set_defaults(func=cmd_record_fixtures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.DEBUG if args.verbose else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args) or 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
