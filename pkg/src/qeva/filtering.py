"""Two-stage QA filtering with a model distinct from the generator.

Stage 1 (trivial): pose each gold-bearing question with no context; if
the alternative model still answers correctly, the question tests world
knowledge rather than the video, and is removed. ClaimCheck items skip
this stage because a claim about one specific summary has no meaningful
no-context gold. Stage 2 (low quality): pose each survivor with the
source video; questions the model cannot answer even then are ambiguous
or unanswerable and are removed. Removed items keep their status in the
run record rather than being deleted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .backends.base import Backend, DecodeParams, parallel_map
from .core import ClaimCheck, FilterStatus, MediaRef, QAPair, Summary
from .errors import ConfigError
from .scoring import ask_one, grade_answer, pose_request

log = logging.getLogger(__name__)

# Decisions are cached by the posed request's content hash, which covers
# both the question material and the context identity, so repeated runs
# over a shared video never repeat a model call within one process.
FilterCache = dict


@dataclass
class FilterConfig:
    """Names the alternative model(s) and the generator they must differ from.

    One model may serve both stages (the default wiring); they are held
    separately because nothing in the method requires them to coincide.
    """

    trivial_model: Backend
    quality_model: Backend
    generator_id: str
    decode: DecodeParams = field(default_factory=DecodeParams)
    max_concurrency: int = 4


@dataclass
class FilterReport:
    """Input-ordered items with final statuses, plus per-item failures."""

    items: list[QAPair]
    errors: list[tuple[str, str]] = field(default_factory=list)

    def _with(self, status: FilterStatus) -> list[QAPair]:
        return [qa for qa in self.items if qa.filtered is status]

    @property
    def kept(self) -> list[QAPair]:
        return self._with(FilterStatus.KEPT)

    @property
    def removed_trivial(self) -> list[QAPair]:
        return self._with(FilterStatus.REMOVED_TRIVIAL)

    @property
    def removed_low_quality(self) -> list[QAPair]:
        return self._with(FilterStatus.REMOVED_LOW_QUALITY)

    @property
    def pending(self) -> list[QAPair]:
        return self._with(FilterStatus.PENDING)

    def counts(self) -> dict[str, int]:
        return {
            "kept": len(self.kept),
            "removed_trivial": len(self.removed_trivial),
            "removed_low_quality": len(self.removed_low_quality),
            "pending": len(self.pending),
        }

    def to_dict(self) -> dict:
        return {
            "counts": self.counts(),
            "statuses": {qa.id: qa.filtered.value for qa in self.items},
            "errors": [{"qa_id": qa_id, "error": msg} for qa_id, msg in self.errors],
        }


def _probe(
    qas: list[QAPair],
    eligible,
    context: Summary | MediaRef | None,
    model: Backend,
    decode: DecodeParams,
    cache: FilterCache | None,
    max_concurrency: int,
):
    """Answer each eligible question once, via cache where possible.

    Yields (index, correct_or_None, error_message_or_None); questions not
    eligible are not touched and produce nothing.
    """
    targets = [(i, qa) for i, qa in enumerate(qas) if eligible(qa)]
    keys = [pose_request(qa, context, decode).content_hash() for _, qa in targets]
    misses = [
        (i, qa)
        for (i, qa), key in zip(targets, keys)
        if cache is None or key not in cache
    ]

    def ask(pair):
        _, qa = pair
        raw = ask_one(model, qa, context, decode)
        return grade_answer(qa, raw).correct

    answered = dict(zip((i for i, _ in misses), parallel_map(ask, misses, max_concurrency)))
    results = []
    for (i, qa), key in zip(targets, keys):
        if i in answered:
            outcome = answered[i]
            if isinstance(outcome, Exception):
                results.append((i, None, f"{type(outcome).__name__}: {outcome}"))
                continue
            if cache is not None:
                cache[key] = outcome
            results.append((i, outcome, None))
        else:
            results.append((i, cache[key], None))
    return results


def trivial_filter(
    qas: list[QAPair],
    alt_model: Backend,
    generator_id: str,
    decode: DecodeParams = DecodeParams(),
    cache: FilterCache | None = None,
    max_concurrency: int = 4,
    errors_out: list[tuple[str, str]] | None = None,
) -> list[QAPair]:
    """Mark no-context-answerable questions RemovedTrivial.

    Only pending MC/YesNo/Sort items are probed; ClaimCheck is exempt,
    and items already carrying a decision pass through untouched. A
    failed probe leaves the item pending and reports it.
    """
    if alt_model.backend_id == generator_id:
        raise ConfigError(
            f"trivial filtering needs a model distinct from the generator; "
            f"both are {generator_id!r}"
        )

    def eligible(qa: QAPair) -> bool:
        return qa.filtered is FilterStatus.PENDING and not isinstance(
            qa.format, ClaimCheck
        )

    out = list(qas)
    for i, correct, error in _probe(
        qas, eligible, None, alt_model, decode, cache, max_concurrency
    ):
        if error is not None:
            log.warning("trivial filter failed on %s: %s", qas[i].id, error)
            if errors_out is not None:
                errors_out.append((qas[i].id, error))
        elif correct:
            out[i] = out[i].with_status(FilterStatus.REMOVED_TRIVIAL)
    return out


def context_filter(
    qas: list[QAPair],
    context: Summary | MediaRef,
    model: Backend,
    decode: DecodeParams = DecodeParams(),
    cache: FilterCache | None = None,
    max_concurrency: int = 4,
    errors_out: list[tuple[str, str]] | None = None,
) -> list[QAPair]:
    """Decide every still-pending question: Kept if answered correctly
    with the context, RemovedLowQuality otherwise. Items already removed
    are not posed again (zero model calls on an all-removed input)."""

    def eligible(qa: QAPair) -> bool:
        return qa.filtered is FilterStatus.PENDING

    out = list(qas)
    for i, correct, error in _probe(
        qas, eligible, context, model, decode, cache, max_concurrency
    ):
        if error is not None:
            log.warning("context filter failed on %s: %s", qas[i].id, error)
            if errors_out is not None:
                errors_out.append((qas[i].id, error))
        elif correct:
            out[i] = out[i].with_status(FilterStatus.KEPT)
        else:
            out[i] = out[i].with_status(FilterStatus.REMOVED_LOW_QUALITY)
    return out


def filter_pipeline(
    qas: list[QAPair],
    video: MediaRef,
    summary: Summary | None,
    cfg: FilterConfig,
    cache: FilterCache | None = None,
) -> FilterReport:
    """Both stages in order; statuses partition the input.

    Stage 2 poses every dimension's questions against the source video:
    from-video questions must be answerable from that video, and claims
    are checked the same way the metric itself checks them. The summary
    argument reserves the alternative routing slot without using it.
    """
    errors: list[tuple[str, str]] = []
    stage1 = trivial_filter(
        qas,
        cfg.trivial_model,
        cfg.generator_id,
        cfg.decode,
        cache,
        cfg.max_concurrency,
        errors_out=errors,
    )
    stage2 = context_filter(
        stage1,
        video,
        cfg.quality_model,
        cfg.decode,
        cache,
        cfg.max_concurrency,
        errors_out=errors,
    )
    return FilterReport(items=stage2, errors=errors)
