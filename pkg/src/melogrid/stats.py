"""Distribution similarity and paired significance tests for metric samples."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateDistributionError, InsufficientDataError
from .metrics import METRIC_NAMES, MetricReport

log = logging.getLogger(__name__)

OA_GRID_POINTS = 2048
OA_TAIL_BANDWIDTHS = 6.0
EXACT_WILCOXON_MAX = 20
MIN_PAIRS = 5


def scott_bandwidth(samples: Sequence[float]) -> float:
    """Scott's rule ``sd * n**(-1/5)``, narrowed by a further factor of 4."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise DegenerateDistributionError(f"need at least 2 samples, got {x.size}")
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DegenerateDistributionError("samples have zero variance")
    return sd * x.size ** -0.2 / 4


@dataclass(frozen=True, eq=False)
class KdeModel:
    samples: np.ndarray
    bandwidth: float

    @classmethod
    def fit(cls, samples: Sequence[float]) -> "KdeModel":
        return cls(np.asarray(samples, dtype=float), scott_bandwidth(samples))

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise DegenerateDistributionError(f"bandwidth must be positive, got {self.bandwidth}")

    def pdf(self, x):
        """Gaussian KDE density at ``x`` (scalar or array)."""
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.samples) / self.bandwidth
        dens = np.exp(-0.5 * z * z).sum(axis=-1)
        return dens / (self.samples.size * self.bandwidth * math.sqrt(2 * math.pi))


def kde_pdf(model: KdeModel, x):
    return model.pdf(x)


def oa_grid(a: KdeModel, b: KdeModel, points: int = OA_GRID_POINTS) -> np.ndarray:
    h = max(a.bandwidth, b.bandwidth)
    lo = min(a.samples.min(), b.samples.min()) - OA_TAIL_BANDWIDTHS * h
    hi = max(a.samples.max(), b.samples.max()) + OA_TAIL_BANDWIDTHS * h
    return np.linspace(lo, hi, points)


def overlapping_area(a: KdeModel, b: KdeModel) -> float:
    """Trapezoid integral of ``min(pdf_a, pdf_b)``, clamped to [0, 1]."""
    grid = oa_grid(a, b)
    area = float(np.trapezoid(np.minimum(a.pdf(grid), b.pdf(grid)), grid))
    return min(1.0, max(0.0, area))


def wasserstein1(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Exact 1-Wasserstein distance between two empirical distributions.

    Integrates ``|F_x - F_y|`` over the merged support, where both CDFs are
    step functions.
    """
    x = np.sort(np.asarray(xs, dtype=float))
    y = np.sort(np.asarray(ys, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("wasserstein1 needs non-empty samples")
    support = np.concatenate([x, y])
    support.sort(kind="mergesort")
    widths = np.diff(support)
    # integer counts keep the CDF difference exact until the final division
    cx = np.searchsorted(x, support[:-1], side="right")
    cy = np.searchsorted(y, support[:-1], side="right")
    diff = np.abs(cx * y.size - cy * x.size)
    return float(np.sum(diff * widths) / (x.size * y.size))


def wasserstein1_equal_size(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Mean absolute difference of sorted samples; only valid for equal sizes."""
    x = np.sort(np.asarray(xs, dtype=float))
    y = np.sort(np.asarray(ys, dtype=float))
    if x.size != y.size or x.size == 0:
        raise ValueError("equal-size formula needs two non-empty samples of the same length")
    return float(np.mean(np.abs(x - y)))


@dataclass(frozen=True)
class DistributionComparison:
    metric_name: str
    oa: Optional[float]
    w1: Optional[float]
    n_model: int
    n_reference: int


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # keep pytest from collecting this

    metric_name: str
    statistic: float
    p_value: float
    adjusted_alpha: float = float("nan")
    rejected: bool = False


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks, ties sharing the mean of the ranks they span."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(v.size)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _signed_rank_null(doubled_ranks: Sequence[int]) -> np.ndarray:
    """Counts of each achievable ``2 * T+`` over all sign assignments.

    Each of the 2**m equally likely sign patterns adds a rank or not, so the
    distribution is the subset-sum count, built one rank at a time.
    """
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=object if len(doubled_ranks) > 60 else np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        r = int(r)
        counts[r:] = counts[r:] + counts[:total + 1 - r].copy()
    return counts


def _exact_p(doubled_ranks: Sequence[int], t_plus2: int) -> float:
    counts = _signed_rank_null(doubled_ranks)
    m = len(doubled_ranks)
    lower = int(counts[:t_plus2 + 1].sum())
    upper = int(counts[t_plus2:].sum())
    return min(1.0, 2 * min(lower, upper) / 2 ** m)


def _normal_p(ranks: np.ndarray, t_plus: float) -> float:
    m = ranks.size
    mean = m * (m + 1) / 4
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = m * (m + 1) * (2 * m + 1) / 24 - float(np.sum(tie_sizes ** 3 - tie_sizes)) / 48
    if var <= 0:
        return 1.0
    d = t_plus - mean
    # continuity correction toward the mean
    d = max(0.0, abs(d) - 0.5)
    z = d / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float], name: str = "",
                         method: str = "auto") -> TestOutcome:
    """Two-sided paired Wilcoxon signed-rank test.

    Zero differences are discarded. The p-value is exact (full sign-flip
    null) up to 20 non-zero pairs and normal-approximated beyond, unless
    ``method`` forces ``"exact"`` or ``"approx"``. The reported statistic is
    ``min(T+, T-)``.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"paired samples differ in length: {x.size} vs {y.size}")
    d = x - y
    d = d[d != 0]
    m = d.size
    if m < MIN_PAIRS:
        raise InsufficientDataError(f"{name or 'test'}: {m} non-zero paired differences, need {MIN_PAIRS}")
    ranks = average_ranks(np.abs(d))
    t_plus = float(ranks[d > 0].sum())
    t_minus = float(ranks[d < 0].sum())
    if method == "auto":
        method = "exact" if m <= EXACT_WILCOXON_MAX else "approx"
    if method == "exact":
        doubled = np.rint(2 * ranks).astype(int)
        p = _exact_p(doubled, int(round(2 * t_plus)))
    elif method == "approx":
        p = _normal_p(ranks, t_plus)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TestOutcome(name, min(t_plus, t_minus), p)


def paired_t_test(a: Sequence[float], b: Sequence[float], name: str = "") -> TestOutcome:
    from scipy import stats as sps

    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.size < 2 or np.all(x == y):
        raise InsufficientDataError(f"{name or 'test'}: not enough non-identical pairs")
    res = sps.ttest_rel(x, y)
    return TestOutcome(name, float(res.statistic), float(res.pvalue))


def holm_thresholds(m: int, alpha: float = 0.05) -> list[float]:
    """Step-down thresholds ``alpha / (m - k + 1)`` for k = 1..m."""
    return [alpha / (m - k) for k in range(m)]


def holm_bonferroni(p_values, alpha: float = 0.05, names: Sequence[str] | None = None,
                    statistics: Sequence[float] | None = None) -> list[TestOutcome]:
    """Holm's step-down procedure; results are returned in input order.

    ``p_values`` may also be a sequence of :class:`TestOutcome`, whose names
    and statistics are carried over.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    items = list(p_values)
    if items and isinstance(items[0], TestOutcome):
        names = [t.metric_name for t in items]
        statistics = [t.statistic for t in items]
        items = [t.p_value for t in items]
    m = len(items)
    names = list(names) if names is not None else [""] * m
    statistics = list(statistics) if statistics is not None else [float("nan")] * m
    thresholds = holm_thresholds(m, alpha)
    order = sorted(range(m), key=lambda i: items[i])
    out: list[Optional[TestOutcome]] = [None] * m
    still_rejecting = True
    for k, i in enumerate(order):
        still_rejecting = still_rejecting and items[i] <= thresholds[k]
        out[i] = TestOutcome(names[i], statistics[i], items[i], thresholds[k], still_rejecting)
    return out


def _defined(reports: Sequence[MetricReport], name: str) -> list[float]:
    return [v for v in (r.get(name) for r in reports) if v is not None]


def compare_metric(model: Sequence[float], reference: Sequence[float], name: str = "") -> DistributionComparison:
    n_m, n_r = len(model), len(reference)
    if n_m < 2 or n_r < 2:
        log.warning("%s: fewer than 2 defined values (model %d, reference %d)", name, n_m, n_r)
        return DistributionComparison(name, None, None, n_m, n_r)
    w1 = wasserstein1(model, reference)
    try:
        oa = overlapping_area(KdeModel.fit(model), KdeModel.fit(reference))
    except DegenerateDistributionError as exc:
        log.warning("%s: OA undefined, %s", name, exc)
        oa = None
    return DistributionComparison(name, oa, w1, n_m, n_r)


def compare_sets(model_reports: Sequence[MetricReport],
                 reference_reports: Sequence[MetricReport]) -> list[DistributionComparison]:
    """OA and W1 per metric between two sets of per-melody reports."""
    if not model_reports or not reference_reports:
        raise ValueError("compare_sets needs non-empty report sets")
    return [compare_metric(_defined(model_reports, n), _defined(reference_reports, n), n)
            for n in METRIC_NAMES]
