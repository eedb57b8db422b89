"""Statistical oracles and empirical bound checks for the constructions.

The checks here compare Monte Carlo estimates against closed forms: the
chi-squared variance 2/k of |Rv|^2 under the Gaussian family, the fourth
moment cap E[(R_j v)^4] <= 3 for the unit-variance discrete families, the
Hypergeometric(k, s, s) law of per-pair collision counts in the graph
construction, and the exponential norm-deviation tails

    Pr[| |Rv|^2 - 1 | > eps] <= 2 exp(-k eps^2 / 8)   (Gaussian entries)
                              <= 2 exp(-k eps^2 / 12)  (+-1 / sparse discrete)

Acceptance convention: empirical rates are compared at 4 standard errors
(false-alarm rate ~6e-5 per check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import chi2

from .apply import distortion
from .constructions import SparseColumnLayout, sample_transform
from .core import (
    AchlioptasSparse,
    ConstructionKind,
    DenseGaussian,
    GraphSparse,
    Rademacher,
    SeedSpec,
    sample_unit_sphere,
)


@dataclass(frozen=True)
class QuantileSummary:
    """Nearest-rank quantiles of one sample set at the given probes."""

    probes: tuple[float, ...]
    values: tuple[float, ...]
    n: int


@dataclass(frozen=True)
class TailReport:
    """Empirical norm-deviation failure rate next to its theoretical bound."""

    epsilon: float
    empirical_failure_rate: float
    bound: float
    n: int
    kind: ConstructionKind
    k: int


@dataclass(frozen=True)
class CollisionTailReport:
    """Observed exceedance of the 2s^2/k collision threshold vs the exact tail."""

    k: int
    s: int
    num_pairs: int
    threshold: float
    empirical_exceedance: float
    exact_tail: float


@dataclass(frozen=True)
class FourthMomentReport:
    """Normalized fourth-moment estimate E[(R_j v)^4] on the all-equal vector."""

    kind: ConstructionKind
    estimate: float
    std_error: float
    trials: int


@dataclass(frozen=True)
class VarianceReport:
    """Sample variance of |Rv|^2 against the chi-squared value 2/k."""

    k: int
    sample_variance: float
    expected_variance: float
    trials: int


def quantile(samples, p: float) -> float:
    """Nearest-rank quantile: sorted sample at 0-based index ceil(p*n) - 1.

    The probe is read as the decimal it prints as (p=0.1 means exactly
    1/10) and the rank is computed in exact rational arithmetic, so float
    rounding of p*n can never shift it across an integer boundary.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("quantile of an empty sample set")
    if not 0.0 < p < 1.0:
        raise ValueError(f"probe must lie in (0, 1), got {p}")
    rank = math.ceil(Fraction(repr(float(p))) * arr.size)
    return float(np.sort(arr)[rank - 1])


def quantile_summary(samples, probes) -> QuantileSummary:
    """Quantiles at several probes; values are non-decreasing in probe order."""
    arr = np.asarray(samples, dtype=np.float64)
    values = tuple(quantile(arr, p) for p in probes)
    return QuantileSummary(probes=tuple(probes), values=values, n=int(arr.size))


def empirical_cdf(samples, grid) -> np.ndarray:
    """Fraction of samples <= g for each grid point g (grid must be ascending)."""
    arr = np.asarray(samples, dtype=np.float64)
    pts = np.asarray(grid, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empirical_cdf of an empty sample set")
    if pts.size > 1 and np.any(np.diff(pts) < 0):
        raise ValueError("grid must be sorted ascending")
    return np.searchsorted(np.sort(arr), pts, side="right") / arr.size


def collision_count(layout: SparseColumnLayout, i: int, j: int) -> int:
    """Number of rows where columns i and j are both nonzero."""
    if i == j:
        raise ValueError("collision count requires two distinct columns")
    if not (0 <= i < layout.d and 0 <= j < layout.d):
        raise ValueError(f"column indices must lie in [0, {layout.d}), got {i}, {j}")
    return int(np.intersect1d(layout.rows[i], layout.rows[j], assume_unique=True).size)


def sample_collision_counts(k: int, s: int, num_pairs: int, seed: SeedSpec) -> np.ndarray:
    """Collision counts of ``num_pairs`` independent column pairs.

    Samples one graph-construction layout with 2*num_pairs columns and
    counts row collisions between columns (2m, 2m+1), so every pair is an
    independent draw of the per-pair collision law.
    """
    layout = sample_transform(GraphSparse(s), k, 2 * num_pairs, seed)
    r = layout.rows.reshape(num_pairs, 2, s)
    return (r[:, 0, :, None] == r[:, 1, None, :]).sum(axis=(1, 2))


def collision_tail_check(k: int, s: int, num_pairs: int, seed: SeedSpec) -> CollisionTailReport:
    """Empirical Pr[collisions > 2s^2/k] next to the exact hypergeometric tail."""
    if s > k:
        raise ValueError(f"column sparsity s={s} exceeds k={k}")
    counts = sample_collision_counts(k, s, num_pairs, seed)
    threshold = 2.0 * s * s / k
    exact = sum(hypergeometric_pmf(k, s, s, x) for x in range(int(threshold) + 1, s + 1))
    return CollisionTailReport(
        k=k,
        s=s,
        num_pairs=num_pairs,
        threshold=threshold,
        empirical_exceedance=float(np.mean(counts > threshold)),
        exact_tail=exact,
    )


def _log_choose(n: int, r: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def hypergeometric_pmf(population: int, successes: int, draws: int, x: int) -> float:
    """P[X = x] for X ~ Hypergeometric(population, successes, draws).

    Computed in log space, C(successes, x) C(population - successes,
    draws - x) / C(population, draws), so binomials stay finite for
    populations in the thousands.  Out-of-range x gives 0, not an error.
    """
    if not 0 <= draws <= population or not 0 <= successes <= population:
        raise ValueError(
            f"need 0 <= successes, draws <= population, got {successes}, {draws}, {population}"
        )
    if x < max(0, draws - (population - successes)) or x > min(successes, draws):
        return 0.0
    log_p = (
        _log_choose(successes, x)
        + _log_choose(population - successes, draws - x)
        - _log_choose(population, draws)
    )
    return math.exp(log_p)


def tail_bound_report(
    kind: ConstructionKind, k: int, d: int, epsilon: float, trials: int, seed: SeedSpec
) -> TailReport:
    """Fraction of (fresh transform, fresh sphere vector) trials with |delta| > eps.

    The bound column is 2 exp(-k eps^2 / 8) for the Gaussian family and
    2 exp(-k eps^2 / 12) for the discrete ones.  Trial i consumes streams
    (seed.stream_id + 2i, seed.stream_id + 2i + 1), so trials are
    independent and individually reproducible.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    failures = 0
    for i in range(trials):
        transform = sample_transform(kind, k, d, seed.stream(seed.stream_id + 2 * i))
        x = sample_unit_sphere(d, seed.stream(seed.stream_id + 2 * i + 1))
        if abs(distortion(transform, x)) > epsilon:
            failures += 1
    denom = 8.0 if isinstance(kind, DenseGaussian) else 12.0
    bound = 2.0 * math.exp(-k * epsilon * epsilon / denom)
    return TailReport(
        epsilon=epsilon,
        empirical_failure_rate=failures / trials,
        bound=bound,
        n=trials,
        kind=kind,
        k=k,
    )


_ROW_BATCH = 1024


def fourth_moment_check(
    kind: ConstructionKind, d: int, trials: int, seed: SeedSpec
) -> FourthMomentReport:
    """Monte Carlo estimate of E[(R_j v)^4] on the worst-case all-equal vector.

    v = (1, ..., 1)/sqrt(d) maximizes the fourth moment for the discrete
    families.  Stored rows carry the 1/sqrt(k) scale, so each sample is
    k^2 (R_j v)^4; the Gaussian value is exactly 3, the discrete families
    sit at or below it.  Rows are batched ``_ROW_BATCH`` per transform,
    batch c drawing from stream seed.stream_id + c.
    """
    if not isinstance(kind, (DenseGaussian, Rademacher, AchlioptasSparse)):
        raise ValueError(f"fourth-moment check needs i.i.d.-entry rows, got {kind!r}")
    v = np.full(d, 1.0 / np.sqrt(d))
    samples = np.empty(trials)
    done = 0
    batch_index = 0
    while done < trials:
        rows = min(_ROW_BATCH, trials - done)
        transform = sample_transform(kind, rows, d, seed.stream(seed.stream_id + batch_index))
        y = transform.entries @ v
        samples[done : done + rows] = (rows * rows) * y**4
        done += rows
        batch_index += 1
    estimate = float(samples.mean())
    std_error = float(samples.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("inf")
    return FourthMomentReport(kind=kind, estimate=estimate, std_error=std_error, trials=trials)


def gaussian_variance_check(k: int, d: int, trials: int, seed: SeedSpec) -> VarianceReport:
    """Sample variance of |Rv|^2 over fresh Gaussian transforms vs 2/k.

    k |Rv|^2 is chi-squared with k degrees of freedom for any fixed unit v,
    so Var(|Rv|^2) = 2/k.  The probe vector draws stream seed.stream_id;
    trial i draws stream seed.stream_id + 1 + i.
    """
    v = sample_unit_sphere(d, seed)
    sq_norms = np.empty(trials)
    for i in range(trials):
        transform = sample_transform(DenseGaussian(), k, d, seed.stream(seed.stream_id + 1 + i))
        sq_norms[i] = distortion(transform, v) + 1.0
    return VarianceReport(
        k=k,
        sample_variance=float(sq_norms.var(ddof=1)),
        expected_variance=2.0 / k,
        trials=trials,
    )


def chi_square_gof(observed_counts, expected_probs, alpha: float = 0.001):
    """Pearson goodness-of-fit: (statistic, critical value, passed at alpha)."""
    obs = np.asarray(observed_counts, dtype=np.float64)
    probs = np.asarray(expected_probs, dtype=np.float64)
    if obs.shape != probs.shape:
        raise ValueError("observed counts and expected probabilities must align")
    expected = probs * obs.sum()
    statistic = float(((obs - expected) ** 2 / expected).sum())
    critical = float(chi2.ppf(1.0 - alpha, df=obs.size - 1))
    return statistic, critical, statistic <= critical
