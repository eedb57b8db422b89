"""Random projections with dense Gaussian, discrete, and graph-sparse constructions."""

from ._version import __version__
from .apply import WorkCounter, apply, distortion, distortion_batch
from .constructions import (
    DenseTransform,
    ResourceLimitError,
    SparseColumnLayout,
    load_transform,
    nnz,
    sample_rows_without_replacement,
    sample_transform,
    save_transform,
)
from .core import (
    AchlioptasSparse,
    ConstructionKind,
    DenseGaussian,
    DistortionSample,
    GraphSparse,
    InputVector,
    Rademacher,
    SeedSpec,
    derive_stream,
    sample_sparse_unit,
    sample_sparse_unit_batch,
    sample_unit_sphere,
    sample_unit_sphere_batch,
)
from .experiments import (
    CdfResult,
    CheckResult,
    ExperimentConfig,
    GridSpec,
    SweepResult,
    SweepRow,
    desk_scale_config,
    required_k,
    run_cdf,
    run_input_sparsity_sweep,
    run_k_sweep,
    run_sparsity_sweep,
    run_verification,
)
from .stats import (
    CollisionTailReport,
    FourthMomentReport,
    QuantileSummary,
    TailReport,
    VarianceReport,
    collision_count,
    collision_tail_check,
    empirical_cdf,
    fourth_moment_check,
    gaussian_variance_check,
    hypergeometric_pmf,
    quantile,
    quantile_summary,
    sample_collision_counts,
    tail_bound_report,
)

__all__ = [
    "__version__",
    "AchlioptasSparse",
    "CdfResult",
    "CheckResult",
    "CollisionTailReport",
    "ConstructionKind",
    "DenseGaussian",
    "DenseTransform",
    "DistortionSample",
    "ExperimentConfig",
    "FourthMomentReport",
    "GraphSparse",
    "GridSpec",
    "InputVector",
    "QuantileSummary",
    "Rademacher",
    "ResourceLimitError",
    "SeedSpec",
    "SparseColumnLayout",
    "SweepResult",
    "SweepRow",
    "TailReport",
    "VarianceReport",
    "WorkCounter",
    "apply",
    "collision_count",
    "collision_tail_check",
    "derive_stream",
    "desk_scale_config",
    "distortion",
    "distortion_batch",
    "empirical_cdf",
    "fourth_moment_check",
    "gaussian_variance_check",
    "hypergeometric_pmf",
    "load_transform",
    "nnz",
    "quantile",
    "quantile_summary",
    "required_k",
    "run_cdf",
    "run_input_sparsity_sweep",
    "run_k_sweep",
    "run_sparsity_sweep",
    "run_verification",
    "sample_collision_counts",
    "sample_rows_without_replacement",
    "sample_sparse_unit",
    "sample_sparse_unit_batch",
    "sample_transform",
    "sample_unit_sphere",
    "sample_unit_sphere_batch",
    "save_transform",
    "tail_bound_report",
]
