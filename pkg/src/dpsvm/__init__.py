"""Principal (weighted) support vector machines for sufficient dimension
reduction, with full-data, naive divide-and-conquer, and refined smoothed
distributed fitting engines, plus a Monte-Carlo benchmark harness."""

from .bench import (
    ExperimentConfig,
    ModelSpec,
    ReportRow,
    distance_correlation,
    generate_model,
    projection_distance,
    run_experiment,
    scaling_study,
)
from .distributed import (
    Partition,
    RefinedConfig,
    WorkerSummary,
    bandwidth_schedule,
    naive_fit,
    partition,
    refined_fit,
    refined_update,
    worker_summary,
)
from .errors import (
    DegenerateSlicing,
    DPSVMError,
    EmptyData,
    OracleTooLarge,
    RefinementSingular,
    SingularCovariance,
    SingularSystem,
    ZeroDistanceVariance,
)
from .linalg import (
    EigenDecomposition,
    sample_covariance,
    sample_mean,
    solve_linear_system,
    sym_eigen,
    whitening_transform,
)
from .psvm import (
    SdrFit,
    SliceSpec,
    WeightSpec,
    candidate_matrix,
    central_subspace,
    dividing_points,
    fit_full,
    sliced_label,
    weight_grid,
)
from .smoothing import smooth_H, smooth_H_prime, smoothed_hinge
from .solver import (
    DirectionEstimate,
    SolverConfig,
    brute_force_oracle,
    hinge_objective,
    psvm_direction,
    smoothed_objective,
    wpsvm_direction,
)

__version__ = "0.1.0"
