"""toptune: fast Gaussian-kernel ridge classification over fixed features.

Train a kernel classifier on precomputed backbone activations, run the
cross-validation grid protocol, and build accuracy/speed-up comparison
reports against gradient-descent baselines.
"""

from .errors import FeatureFileError, SolverError, ValidationError
from .feature_store import (
    DatasetManifest,
    FeatureSet,
    SplitPlan,
    encode_targets,
    read_feature_file,
    stratified_kfold,
    write_feature_file,
)
from .kernel_core import KernelParams, gaussian_kernel, kernel_block
from .krr_solver import (
    ExactModel,
    LinearModel,
    NystromModel,
    SolverOptions,
    TrainingLog,
    default_num_centers,
    fit_exact,
    fit_linear_ridge,
    fit_nystrom,
    load_model,
    pcg_solve,
    predict_labels,
    predict_scores,
    sample_centers,
    save_model,
)
from .tuning_harness import (
    AggregateStats,
    ComparisonReport,
    GridCVResult,
    GridSpec,
    KernelConfig,
    LinearConfig,
    ReportRow,
    RunRecord,
    aggregate_stats,
    build_report,
    compute_delta_acc,
    compute_speedup,
    emit_report,
    fine_tune_batch_size,
    run_grid_cv,
    select_best,
)

__version__ = "0.1.0"
