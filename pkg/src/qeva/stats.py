"""Tie-aware rank statistics and inter-annotator agreement.

Implemented from first principles rather than delegated to a stats
toolkit, so the test suite can check them against independent
brute-force oracles:

- Kendall's tau-b and Stuart's tau-c via an O(n log n) sort-and-merge
  concordance count (Knight's algorithm), with the tie-corrected normal
  approximation for two-sided p-values and an exact permutation p-value
  for small n.
- Spearman's rho as Pearson correlation of average ranks, with the
  t-approximation p-value.
- Krippendorff's alpha via the coincidence-matrix formulation with
  nominal, ordinal and interval distance metrics.

Only the normal/Student-t CDFs come from outside (math.erfc and
scipy.special.stdtr); the statistics themselves do not.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import stdtr

from .core import AnnotationRecord
from .errors import DegenerateSample, InsufficientData


class Method(str, enum.Enum):
    TAU_B = "tau_b"
    TAU_C = "tau_c"
    SPEARMAN_RHO = "spearman_rho"


@dataclass(frozen=True)
class PairedSample:
    """Two equally long observation vectors, n >= 2."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise DegenerateSample(
                f"paired sample lengths differ: {len(self.x)} vs {len(self.y)}"
            )
        if len(self.x) < 2:
            raise DegenerateSample("paired sample needs at least 2 observations")

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class CorrelationResult:
    statistic: float
    p_value: float
    n: int
    method: Method
    boundary: bool = False  # |statistic| hit 1, p reported by limit convention

    def __post_init__(self):
        if math.isnan(self.statistic) or math.isnan(self.p_value):
            raise DegenerateSample("correlation produced NaN")
        if not -1.0 <= self.statistic <= 1.0:
            raise DegenerateSample(f"statistic {self.statistic} outside [-1, 1]")
        if not 0.0 <= self.p_value <= 1.0:
            raise DegenerateSample(f"p-value {self.p_value} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n": self.n,
            "method": self.method.value,
            "boundary": self.boundary,
        }


def average_ranks(values) -> list[float]:
    """1-based ranks; tied values share the mean of their block's positions."""
    n = len(values)
    if n == 0:
        raise DegenerateSample("cannot rank an empty sequence")
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        # positions i..j (0-based) share rank mean of (i+1)..(j+1)
        rank = (i + j + 2) / 2
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


# --- Kendall machinery ------------------------------------------------------


@dataclass(frozen=True)
class _ConcordanceCounts:
    n: int
    s: int          # C - D
    concordant: int
    discordant: int
    xtie_pairs: int  # pairs tied in x (including pairs tied in both)
    ytie_pairs: int
    x_groups: tuple[int, ...]  # tie-group sizes (> 1 only)
    y_groups: tuple[int, ...]


def _tie_groups(values) -> tuple[int, ...]:
    return tuple(c for c in Counter(values).values() if c > 1)


def _pair_sum(groups, f) -> int:
    return sum(f(t) for t in groups)


def _merge_count_inversions(seq: list[float]) -> int:
    """Count strict inversions (i < j, seq[i] > seq[j]) by merge sort."""
    n = len(seq)
    if n < 2:
        return 0
    work = list(seq)
    buf = [0.0] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if work[i] <= work[j]:
                    buf[k] = work[i]
                    i += 1
                else:
                    buf[k] = work[j]
                    inversions += mid - i
                    j += 1
                k += 1
            buf[k:hi] = work[i:mid] if i < mid else work[j:hi]
            work[lo:hi] = buf[lo:hi]
        width *= 2
    return inversions


def _concordance(sample: PairedSample) -> _ConcordanceCounts:
    n = len(sample)
    order = sorted(range(n), key=lambda i: (sample.x[i], sample.y[i]))
    xs = [sample.x[i] for i in order]
    ys = [sample.y[i] for i in order]

    # With ties in x broken by ascending y, y-inversions are exactly the
    # discordant pairs: x-tied pairs are internally y-sorted and contribute 0.
    discordant = _merge_count_inversions(ys)

    x_groups = _tie_groups(sample.x)
    y_groups = _tie_groups(sample.y)
    xtie = _pair_sum(x_groups, lambda t: t * (t - 1) // 2)
    ytie = _pair_sum(y_groups, lambda t: t * (t - 1) // 2)
    xytie = _pair_sum(
        _tie_groups(list(zip(xs, ys))), lambda t: t * (t - 1) // 2
    )

    n0 = n * (n - 1) // 2
    concordant = n0 - discordant - xtie - ytie + xytie
    return _ConcordanceCounts(
        n=n,
        s=concordant - discordant,
        concordant=concordant,
        discordant=discordant,
        xtie_pairs=xtie,
        ytie_pairs=ytie,
        x_groups=x_groups,
        y_groups=y_groups,
    )


def _s_variance(counts: _ConcordanceCounts) -> float:
    """Tie-corrected variance of S = C - D under the null."""
    n = counts.n
    t, u = counts.x_groups, counts.y_groups
    v0 = n * (n - 1) * (2 * n + 5)
    vt = _pair_sum(t, lambda k: k * (k - 1) * (2 * k + 5))
    vu = _pair_sum(u, lambda k: k * (k - 1) * (2 * k + 5))
    var = (v0 - vt - vu) / 18
    var += (
        _pair_sum(t, lambda k: k * (k - 1))
        * _pair_sum(u, lambda k: k * (k - 1))
        / (2 * n * (n - 1))
    )
    if n > 2:
        var += (
            _pair_sum(t, lambda k: k * (k - 1) * (k - 2))
            * _pair_sum(u, lambda k: k * (k - 1) * (k - 2))
            / (9 * n * (n - 1) * (n - 2))
        )
    return var


def _normal_p_two_sided(s: int, var: float) -> float:
    if var <= 0:
        return 1.0
    # Continuity correction: S moves in discrete steps, so the tail at
    # |S| is approximated from |S| - 1. Keeps the approximation within
    # a few percent of the exact permutation p even at n = 8.
    z = max(abs(s) - 1, 0) / math.sqrt(var)
    return math.erfc(z / math.sqrt(2))


def _check_not_constant(sample: PairedSample) -> None:
    if len(set(sample.x)) < 2:
        raise DegenerateSample("x is constant")
    if len(set(sample.y)) < 2:
        raise DegenerateSample("y is constant")


def kendall_tau_b(x, y) -> CorrelationResult:
    """Tie-corrected Kendall correlation with asymptotic two-sided p."""
    sample = PairedSample(tuple(x), tuple(y))
    _check_not_constant(sample)
    c = _concordance(sample)
    n0 = c.n * (c.n - 1) // 2
    denom = math.sqrt((n0 - c.xtie_pairs) * (n0 - c.ytie_pairs))
    tau = c.s / denom
    return CorrelationResult(
        statistic=_clamp_unit(tau),
        p_value=_normal_p_two_sided(c.s, _s_variance(c)),
        n=c.n,
        method=Method.TAU_B,
    )


def kendall_tau_c(x, y) -> CorrelationResult:
    """Stuart's tau-c; the p-value shares tau-b's approximation on S."""
    sample = PairedSample(tuple(x), tuple(y))
    m = min(len(set(sample.x)), len(set(sample.y)))
    if m < 2:
        raise DegenerateSample(f"tau-c needs >= 2 distinct values per variable, got m={m}")
    c = _concordance(sample)
    n = c.n
    tau = 2 * m * c.s / (n * n * (m - 1))
    return CorrelationResult(
        statistic=_clamp_unit(tau),
        p_value=_normal_p_two_sided(c.s, _s_variance(c)),
        n=n,
        method=Method.TAU_C,
    )


@lru_cache(maxsize=None)
def _permutation_matrix(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def kendall_exact_p(x, y) -> float:
    """Two-sided exact permutation p-value for S = C - D; n <= 8 only."""
    sample = PairedSample(tuple(x), tuple(y))
    n = len(sample)
    if n > 8:
        raise DegenerateSample(f"exact permutation p limited to n <= 8, got {n}")
    xs = np.asarray(sample.x)
    ys = np.asarray(sample.y)
    perms = _permutation_matrix(n)
    y_perm = ys[perms]  # (n!, n)
    s_all = np.zeros(len(perms))
    for i in range(n - 1):
        for j in range(i + 1, n):
            sx = np.sign(xs[j] - xs[i])
            if sx == 0:
                continue
            s_all += sx * np.sign(y_perm[:, j] - y_perm[:, i])
    s_obs = _concordance(sample).s
    return float(np.mean(np.abs(s_all) >= abs(s_obs) - 1e-9))


def spearman_rho(x, y) -> CorrelationResult:
    """Pearson correlation of average ranks with the t-approximation p."""
    sample = PairedSample(tuple(x), tuple(y))
    _check_not_constant(sample)
    rx = average_ranks(sample.x)
    ry = average_ranks(sample.y)
    n = len(sample)
    mx = sum(rx) / n
    my = sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    rho = _clamp_unit(cov / math.sqrt(vx * vy))
    if abs(rho) >= 1.0 - 1e-13 or n == 2:
        # t diverges; report the limit with an explicit boundary flag
        return CorrelationResult(
            statistic=1.0 if rho > 0 else -1.0,
            p_value=0.0,
            n=n,
            method=Method.SPEARMAN_RHO,
            boundary=True,
        )
    t = rho * math.sqrt((n - 2) / (1 - rho * rho))
    p = 2 * float(stdtr(n - 2, -abs(t)))
    return CorrelationResult(
        statistic=rho,
        p_value=min(1.0, p),
        n=n,
        method=Method.SPEARMAN_RHO,
    )


def _clamp_unit(v: float) -> float:
    if not -1.0 - 1e-9 <= v <= 1.0 + 1e-9:
        raise DegenerateSample(f"statistic {v} far outside [-1, 1]")
    return max(-1.0, min(1.0, v))


# --- Krippendorff's alpha ----------------------------------------------------


class AgreementMetric(str, enum.Enum):
    NOMINAL = "nominal"
    ORDINAL = "ordinal"
    INTERVAL = "interval"


@dataclass(frozen=True)
class AlphaResult:
    """Krippendorff's alpha plus the bookkeeping behind it."""

    value: float
    metric: AgreementMetric
    n_units: int          # units with >= 2 annotations (used)
    n_excluded: int       # units dropped for having < 2 annotations
    n_values: int         # total pairable values
    zero_expected_disagreement: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "metric": self.metric.value,
            "n_units": self.n_units,
            "n_excluded": self.n_excluded,
            "n_values": self.n_values,
            "zero_expected_disagreement": self.zero_expected_disagreement,
        }


def krippendorff_alpha(
    records: list[AnnotationRecord],
    metric: AgreementMetric = AgreementMetric.ORDINAL,
) -> AlphaResult:
    """Agreement over units keyed by (summary, criterion).

    Units with fewer than two annotations are excluded from the
    coincidence matrix. All annotated values are perfectly identical
    iff expected disagreement is zero; that case is reported as
    alpha = 1.0 with a flag rather than an error.
    """
    units: dict[tuple[str, str], list[float]] = {}
    for rec in records:
        units.setdefault((rec.summary_id, rec.criterion.value), []).append(
            float(rec.score)
        )
    return alpha_from_units(list(units.values()), metric)


def alpha_from_units(
    unit_values: list[list[float]],
    metric: AgreementMetric = AgreementMetric.ORDINAL,
) -> AlphaResult:
    """Krippendorff's alpha over raw units (one value list per unit)."""
    usable = [vals for vals in unit_values if len(vals) >= 2]
    excluded = len(unit_values) - len(usable)
    if len(usable) < 2:
        raise InsufficientData(
            f"need >= 2 units with >= 2 annotations, got {len(usable)}"
        )

    categories = sorted({v for vals in usable for v in vals})
    index = {c: i for i, c in enumerate(categories)}
    k = len(categories)

    # coincidence matrix: ordered value pairs within units, weighted 1/(m-1)
    coincidence = np.zeros((k, k))
    for vals in usable:
        m = len(vals)
        w = 1.0 / (m - 1)
        for a, b in itertools.permutations(range(m), 2):
            coincidence[index[vals[a]], index[vals[b]]] += w
    marginals = coincidence.sum(axis=1)
    n = marginals.sum()

    delta = _distance_matrix(categories, marginals, metric)
    d_observed = float((coincidence * delta).sum()) / n
    d_expected = float((np.outer(marginals, marginals) * delta).sum()) / (n * (n - 1))

    if d_expected == 0.0:
        return AlphaResult(
            value=1.0,
            metric=metric,
            n_units=len(usable),
            n_excluded=excluded,
            n_values=int(round(n)),
            zero_expected_disagreement=True,
        )
    return AlphaResult(
        value=float(1.0 - d_observed / d_expected),
        metric=metric,
        n_units=len(usable),
        n_excluded=excluded,
        n_values=int(round(n)),
    )


def _distance_matrix(
    categories: list[float], marginals: np.ndarray, metric: AgreementMetric
) -> np.ndarray:
    k = len(categories)
    delta = np.zeros((k, k))
    for c in range(k):
        for d in range(c + 1, k):
            if metric is AgreementMetric.NOMINAL:
                dist = 1.0
            elif metric is AgreementMetric.INTERVAL:
                dist = (categories[c] - categories[d]) ** 2
            else:  # ordinal: cumulative marginal mass between the categories
                span = marginals[c : d + 1].sum()
                dist = (span - (marginals[c] + marginals[d]) / 2) ** 2
            delta[c, d] = delta[d, c] = dist
    return delta
