"""End-to-end distortion experiments: sweeps, CDF tables, verification, CSV.

An experiment draws its input vectors once (shared by every construction
and trial), then measures distortion quantiles per transform instance and
aggregates mean/std across instances.  All randomness comes from streams
derived off the config's master seed:

    vector batch b     -> stream VECTOR_ROLE  | b
    cell c, trial i    -> stream TRANSFORM_ROLE | c << 32 | i
    verification check -> stream VERIFY_ROLE | check << 32 (+ offsets inside)

Cells (construction x input family x axis value) are enumerated in a fixed
order and may execute on a thread pool capped by the JL_THREADS environment
variable; aggregation happens in cell order, so output bytes never depend
on the schedule.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .apply import distortion_batch
from .constructions import sample_transform
from .core import (
    AchlioptasSparse,
    ConstructionKind,
    DenseGaussian,
    GraphSparse,
    InputVector,
    Rademacher,
    SeedSpec,
    sample_sparse_unit_batch,
    sample_unit_sphere_batch,
)
from .stats import (
    chi_square_gof,
    collision_tail_check,
    empirical_cdf,
    fourth_moment_check,
    gaussian_variance_check,
    hypergeometric_pmf,
    quantile,
    sample_collision_counts,
    tail_bound_report,
)

_VECTOR_ROLE = 1 << 60
_TRANSFORM_ROLE = 2 << 60
_VERIFY_ROLE = 3 << 60

SERIES_KINDS = ("Dense", "Ach", "Sparse")

# Paper-scale experiment setup; CI-friendly desk scale is n=500, d=1000,
# trials=10 (see desk_scale_config / the CLI --paper-scale flag).
PAPER_SCALE = {"n": 5000, "d": 10000, "trials": 30}
DESK_SCALE = {"n": 500, "d": 1000, "trials": 10}

DEFAULT_S_GRID = (1, 2, 4, 8, 16, 32)
DEFAULT_T_GRID = (1, 2, 5, 10, 50, 100, 1000)
DEFAULT_K_GRID = (25, 50, 100, 200, 400)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full determinism contract for one experiment run."""

    n: int = 5000
    d: int = 10000
    k: int = 50
    s: int = 16
    t: int = 5
    trials: int = 30
    epsilon: float = 0.5
    master_seed: int = 0
    constructions: tuple[str, ...] = SERIES_KINDS
    probes: tuple[float, ...] = (0.5, 0.99)

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1 or self.k < 1:
            raise ValueError("n, d, k must be positive")
        if not 1 <= self.s <= self.k:
            raise ValueError(f"need 1 <= s <= k, got s={self.s}, k={self.k}")
        if not 1 <= self.t <= self.d:
            raise ValueError(f"need 1 <= t <= d, got t={self.t}, d={self.d}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        unknown = [c for c in self.constructions if c not in SERIES_KINDS]
        if unknown:
            raise ValueError(f"unknown constructions: {unknown}")
        if len(set(self.constructions)) != len(self.constructions):
            raise ValueError("constructions must not repeat")
        if not all(0.0 < p < 1.0 for p in self.probes):
            raise ValueError("probes must lie in (0, 1)")


def desk_scale_config(**overrides) -> ExperimentConfig:
    """Config with CI-friendly sizes; overrides win."""
    merged = {**DESK_SCALE, **overrides}
    return ExperimentConfig(**merged)


@dataclass(frozen=True)
class GridSpec:
    """CDF evaluation grid plus log-spaced |delta| tail thresholds."""

    lo: float = -1.0
    hi: float = 1.0
    points: int = 201
    tail_lo: float = 1e-4
    tail_hi: float = 1.0
    tail_points: int = 17

    def __post_init__(self) -> None:
        if not self.lo < self.hi or self.points < 2:
            raise ValueError("grid needs lo < hi and at least 2 points")
        if not 0.0 < self.tail_lo < self.tail_hi or self.tail_points < 2:
            raise ValueError("tail thresholds need 0 < tail_lo < tail_hi and >= 2 points")

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)

    def tail_thresholds(self) -> np.ndarray:
        return np.logspace(math.log10(self.tail_lo), math.log10(self.tail_hi), self.tail_points)


@dataclass(frozen=True)
class SweepRow:
    construction: str
    input_family: str
    axis_value: int
    probe: float
    mean: float
    std: float
    trials: int


@dataclass(frozen=True)
class SweepResult:
    """Per-(construction, family, axis, probe) quantile statistics across trials."""

    axis_name: str
    axis_values: tuple[int, ...]
    rows: tuple[SweepRow, ...]
    pooled_mean: float
    pooled_std: float
    pooled_count: int


@dataclass(frozen=True)
class CdfResult:
    """Pooled distortion CDFs per construction plus a |delta| tail table."""

    grid: np.ndarray
    constructions: tuple[str, ...]
    cdf: dict[str, np.ndarray]
    tail_thresholds: np.ndarray
    tail: dict[str, np.ndarray]
    samples: dict[str, np.ndarray]
    pooled_mean: float
    pooled_std: float
    pooled_count: int


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _series_kind(name: str, s: int) -> ConstructionKind:
    if name == "Dense":
        return DenseGaussian()
    if name == "Ach":
        return AchlioptasSparse()
    if name == "Sparse":
        return GraphSparse(s)
    raise ValueError(f"unknown series {name!r}")


def _threads() -> int:
    return max(1, int(os.environ.get("JL_THREADS", "1")))


def _run_jobs(jobs):
    workers = _threads()
    if workers <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [future.result() for future in futures]


def _trial_quantiles(
    kind: ConstructionKind,
    k: int,
    d: int,
    vectors: list[InputVector],
    trials: int,
    probes: tuple[float, ...],
    master_seed: int,
    cell_index: int,
    use_abs: bool,
):
    """(trials, probes) quantile matrix plus pooled (sum, sum_sq, count) of delta."""
    q = np.empty((trials, len(probes)))
    total = 0.0
    total_sq = 0.0
    count = 0
    for trial in range(trials):
        spec = SeedSpec(master_seed, _TRANSFORM_ROLE | (cell_index << 32) | trial)
        transform = sample_transform(kind, k, d, spec)
        samples = distortion_batch(transform, vectors, transform_instance=trial)
        deltas = np.array([sample.delta for sample in samples])
        values = np.abs(deltas) if use_abs else deltas
        for pi, probe in enumerate(probes):
            q[trial, pi] = quantile(values, probe)
        total += float(deltas.sum())
        total_sq += float(deltas @ deltas)
        count += deltas.size
    return q, total, total_sq, count


def _pooled_stats(cell_results) -> tuple[float, float, int]:
    total = sum(r[1] for r in cell_results)
    total_sq = sum(r[2] for r in cell_results)
    count = sum(r[3] for r in cell_results)
    mean = total / count
    var = max(0.0, (total_sq - count * mean * mean) / (count - 1)) if count > 1 else 0.0
    return mean, math.sqrt(var), count


def _rows_from_matrix(construction, family, axis_value, probes, q, trials):
    rows = []
    for pi, probe in enumerate(probes):
        col = q[:, pi]
        rows.append(
            SweepRow(
                construction=construction,
                input_family=family,
                axis_value=axis_value,
                probe=probe,
                mean=float(col.mean()),
                std=float(col.std(ddof=1)) if trials > 1 else 0.0,
                trials=trials,
            )
        )
    return rows


def run_sparsity_sweep(cfg: ExperimentConfig, s_values) -> SweepResult:
    """Distortion quantiles of the graph construction vs its column sparsity.

    Runs both input families with the Achlioptas series as the reference at
    every axis point (its statistics do not depend on s, so its cell is
    computed once per family and replicated).
    """
    s_values = tuple(int(s) for s in s_values)
    for s in s_values:
        if not 1 <= s <= cfg.k:
            raise ValueError(f"sweep value s={s} must satisfy 1 <= s <= k={cfg.k}")
    families = [
        ("dense", sample_unit_sphere_batch(cfg.d, cfg.n, SeedSpec(cfg.master_seed, _VECTOR_ROLE | 0))),
        ("sparse", sample_sparse_unit_batch(cfg.d, cfg.t, cfg.n, SeedSpec(cfg.master_seed, _VECTOR_ROLE | 1))),
    ]

    cells = []
    for family, vectors in families:
        for s in s_values:
            cells.append(("Sparse", family, s, GraphSparse(s), vectors))
        cells.append(("Ach", family, None, AchlioptasSparse(), vectors))
    results = _run_jobs(
        [
            lambda ci=ci, cell=cell: _trial_quantiles(
                cell[3], cfg.k, cfg.d, cell[4], cfg.trials, cfg.probes, cfg.master_seed, ci, False
            )
            for ci, cell in enumerate(cells)
        ]
    )

    by_key = {(c[0], c[1], c[2]): r for c, r in zip(cells, results)}
    rows = []
    for construction in ("Sparse", "Ach"):
        for family, _ in families:
            for s in s_values:
                key = (construction, family, s if construction == "Sparse" else None)
                q = by_key[key][0]
                rows.extend(_rows_from_matrix(construction, family, s, cfg.probes, q, cfg.trials))
    mean, std, count = _pooled_stats(results)
    return SweepResult(
        axis_name="s",
        axis_values=s_values,
        rows=tuple(rows),
        pooled_mean=mean,
        pooled_std=std,
        pooled_count=count,
    )


def run_input_sparsity_sweep(cfg: ExperimentConfig, t_values) -> SweepResult:
    """Distortion quantiles vs input support size, graph construction at fixed s.

    Input vectors are redrawn per axis point (the axis changes the inputs);
    at t=1 the graph construction reproduces one column exactly, so its
    distortion rows are identically zero.
    """
    t_values = tuple(int(t) for t in t_values)
    for t in t_values:
        if not 1 <= t <= cfg.d:
            raise ValueError(f"sweep value t={t} must satisfy 1 <= t <= d={cfg.d}")
    vector_sets = {
        t: sample_sparse_unit_batch(cfg.d, t, cfg.n, SeedSpec(cfg.master_seed, _VECTOR_ROLE | (2 + ti)))
        for ti, t in enumerate(t_values)
    }

    cells = []
    for construction in ("Sparse", "Ach"):
        kind = _series_kind(construction, cfg.s)
        for t in t_values:
            cells.append((construction, t, kind, vector_sets[t]))
    results = _run_jobs(
        [
            lambda ci=ci, cell=cell: _trial_quantiles(
                cell[2], cfg.k, cfg.d, cell[3], cfg.trials, cfg.probes, cfg.master_seed, ci, False
            )
            for ci, cell in enumerate(cells)
        ]
    )

    rows = []
    for (construction, t, _, _), (q, *_rest) in zip(cells, results):
        rows.extend(_rows_from_matrix(construction, "sparse", t, cfg.probes, q, cfg.trials))
    mean, std, count = _pooled_stats(results)
    return SweepResult(
        axis_name="t",
        axis_values=t_values,
        rows=tuple(rows),
        pooled_mean=mean,
        pooled_std=std,
        pooled_count=count,
    )


def run_k_sweep(cfg: ExperimentConfig, k_values) -> SweepResult:
    """|delta| quantiles vs target dimension for every configured construction."""
    k_values = tuple(int(k) for k in k_values)
    for k in k_values:
        if k < 1:
            raise ValueError(f"sweep value k={k} must be positive")
        if "Sparse" in cfg.constructions and k < cfg.s:
            raise ValueError(f"sweep value k={k} is below the column sparsity s={cfg.s}")
    families = [
        ("dense", sample_unit_sphere_batch(cfg.d, cfg.n, SeedSpec(cfg.master_seed, _VECTOR_ROLE | 0))),
        ("sparse", sample_sparse_unit_batch(cfg.d, cfg.t, cfg.n, SeedSpec(cfg.master_seed, _VECTOR_ROLE | 1))),
    ]

    cells = []
    for construction in cfg.constructions:
        kind = _series_kind(construction, cfg.s)
        for family, vectors in families:
            for k in k_values:
                cells.append((construction, family, k, kind, vectors))
    results = _run_jobs(
        [
            lambda ci=ci, cell=cell: _trial_quantiles(
                cell[3], cell[2], cfg.d, cell[4], cfg.trials, cfg.probes, cfg.master_seed, ci, True
            )
            for ci, cell in enumerate(cells)
        ]
    )

    rows = []
    for (construction, family, k, _, _), (q, *_rest) in zip(cells, results):
        rows.extend(_rows_from_matrix(construction, family, k, cfg.probes, q, cfg.trials))
    mean, std, count = _pooled_stats(results)
    return SweepResult(
        axis_name="k",
        axis_values=k_values,
        rows=tuple(rows),
        pooled_mean=mean,
        pooled_std=std,
        pooled_count=count,
    )


def run_cdf(cfg: ExperimentConfig, grid_spec: GridSpec = GridSpec()) -> CdfResult:
    """Pooled distortion CDF per construction on sparse inputs (t = cfg.t)."""
    vectors = sample_sparse_unit_batch(cfg.d, cfg.t, cfg.n, SeedSpec(cfg.master_seed, _VECTOR_ROLE | 0))

    def pooled_deltas(construction: str, cell_index: int) -> np.ndarray:
        kind = _series_kind(construction, cfg.s)
        chunks = []
        for trial in range(cfg.trials):
            spec = SeedSpec(cfg.master_seed, _TRANSFORM_ROLE | (cell_index << 32) | trial)
            transform = sample_transform(kind, cfg.k, cfg.d, spec)
            samples = distortion_batch(transform, vectors, transform_instance=trial)
            chunks.append(np.array([sample.delta for sample in samples]))
        return np.concatenate(chunks)

    all_samples = _run_jobs(
        [lambda ci=ci, c=c: pooled_deltas(c, ci) for ci, c in enumerate(cfg.constructions)]
    )

    grid = grid_spec.grid()
    thresholds = grid_spec.tail_thresholds()
    cdf_table: dict[str, np.ndarray] = {}
    tail_table: dict[str, np.ndarray] = {}
    samples_table: dict[str, np.ndarray] = {}
    total = total_sq = 0.0
    count = 0
    for construction, deltas in zip(cfg.constructions, all_samples):
        cdf_table[construction] = empirical_cdf(deltas, grid)
        tail_table[construction] = np.array([np.mean(np.abs(deltas) > thr) for thr in thresholds])
        samples_table[construction] = deltas
        total += float(deltas.sum())
        total_sq += float(deltas @ deltas)
        count += deltas.size
    mean = total / count
    var = max(0.0, (total_sq - count * mean * mean) / (count - 1)) if count > 1 else 0.0
    return CdfResult(
        grid=grid,
        constructions=tuple(cfg.constructions),
        cdf=cdf_table,
        tail_thresholds=thresholds,
        tail=tail_table,
        samples=samples_table,
        pooled_mean=mean,
        pooled_std=math.sqrt(var),
        pooled_count=count,
    )


def required_k(n: int, epsilon: float) -> int:
    """Smallest k with 2 exp(-k eps^2 / 12) <= n^-3: ceil(12 (3 ln n + ln 2) / eps^2).

    This is the single-vector failure budget 1/n^3 that survives the union
    bound over all points and pairs with overall success >= 1 - 1/n.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got n={n}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.ceil(12.0 * (3.0 * math.log(n) + math.log(2.0)) / (epsilon * epsilon))


# ---------------------------------------------------------------------------
# Verification suite (surfaced by the `verify` CLI subcommand)
# ---------------------------------------------------------------------------


def _verify_seed(master_seed: int, check: int) -> SeedSpec:
    return SeedSpec(master_seed, _VERIFY_ROLE | (check << 32))


def run_verification(master_seed: int = 0, trials: int = 2000, pair_samples: int = 100_000) -> list[CheckResult]:
    """Empirical bound checks for all constructions; every check is seeded."""
    checks: list[CheckResult] = []

    def add(name: str, passed: bool, detail: str) -> None:
        checks.append(CheckResult(name=name, passed=bool(passed), detail=detail))

    tails = [
        ("gaussian-tail", DenseGaussian(), 50),
        ("rademacher-tail", Rademacher(), 200),
        ("achlioptas-tail", AchlioptasSparse(), 200),
    ]
    for ci, (name, kind, k) in enumerate(tails):
        report = tail_bound_report(kind, k, 500, 0.5, trials, _verify_seed(master_seed, ci))
        slack = 4.0 * math.sqrt(report.bound * (1.0 - report.bound) / trials)
        add(
            name,
            report.empirical_failure_rate <= report.bound + slack,
            f"rate={report.empirical_failure_rate:.6g} bound={report.bound:.6g} n={trials}",
        )

    moments = [
        ("gaussian-fourth-moment", DenseGaussian()),
        ("rademacher-fourth-moment", Rademacher()),
        ("achlioptas-fourth-moment", AchlioptasSparse()),
    ]
    for ci, (name, kind) in enumerate(moments, start=3):
        report = fourth_moment_check(kind, 500, max(trials, 4000), _verify_seed(master_seed, ci))
        if isinstance(kind, DenseGaussian):
            ok = abs(report.estimate - 3.0) <= 4.0 * report.std_error
        else:
            ok = report.estimate <= 3.0 + 4.0 * report.std_error
        add(name, ok, f"estimate={report.estimate:.6g} se={report.std_error:.3g}")

    counts = sample_collision_counts(50, 16, pair_samples, _verify_seed(master_seed, 6))
    expected_mean = 16 * 16 / 50
    se = counts.std(ddof=1) / math.sqrt(pair_samples)
    add(
        "collision-mean",
        abs(counts.mean() - expected_mean) <= 4.0 * se,
        f"mean={counts.mean():.4f} expected={expected_mean} se={se:.3g}",
    )

    small = sample_collision_counts(4, 2, pair_samples, _verify_seed(master_seed, 7))
    observed = np.bincount(small, minlength=3)
    statistic, critical, ok = chi_square_gof(observed, [1 / 6, 2 / 3, 1 / 6])
    add("collision-distribution", ok, f"chi2={statistic:.3f} critical={critical:.3f}")

    report = collision_tail_check(50, 16, pair_samples, _verify_seed(master_seed, 8))
    se = math.sqrt(report.exact_tail * (1.0 - report.exact_tail) / pair_samples)
    add(
        "collision-tail",
        abs(report.empirical_exceedance - report.exact_tail) <= 4.0 * se,
        f"empirical={report.empirical_exceedance:.6g} exact={report.exact_tail:.6g}",
    )

    var_report = gaussian_variance_check(50, 200, max(trials, 4000), _verify_seed(master_seed, 9))
    rel = abs(var_report.sample_variance - var_report.expected_variance) / var_report.expected_variance
    add(
        "gaussian-variance",
        rel <= 0.15,
        f"sample={var_report.sample_variance:.6g} expected={var_report.expected_variance:.6g}",
    )

    total = sum(hypergeometric_pmf(500, 37, 37, x) for x in range(38))
    mean = sum(x * hypergeometric_pmf(500, 37, 37, x) for x in range(38))
    add(
        "hypergeometric-normalization",
        abs(total - 1.0) <= 1e-12 and abs(mean - 37 * 37 / 500) <= 1e-10,
        f"sum={total!r} mean={mean!r}",
    )

    return checks


# ---------------------------------------------------------------------------
# CSV / manifest output
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    """Sweep rows as CSV; the axis column is named after the swept parameter."""
    lines = [f"construction,input_family,{result.axis_name},probe,mean,std,trials"]
    for r in result.rows:
        lines.append(
            f"{r.construction},{r.input_family},{r.axis_value},"
            f"{_fmt(r.probe)},{_fmt(r.mean)},{_fmt(r.std)},{r.trials}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_cdf_csv(result: CdfResult, path: str | Path) -> None:
    lines = ["construction,grid,cdf"]
    for construction in result.constructions:
        cdf = result.cdf[construction]
        for g, c in zip(result.grid, cdf):
            lines.append(f"{construction},{_fmt(g)},{_fmt(c)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_tail_csv(result: CdfResult, path: str | Path) -> None:
    lines = ["construction,threshold,exceedance"]
    for construction in result.constructions:
        tail = result.tail[construction]
        for thr, frac in zip(result.tail_thresholds, tail):
            lines.append(f"{construction},{_fmt(thr)},{_fmt(frac)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path: str | Path, cfg: ExperimentConfig, started_at: str, extra: dict | None = None) -> None:
    manifest = {
        "config": dataclasses.asdict(cfg),
        "seed": cfg.master_seed,
        "version": __version__,
        "started_at": started_at,
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
