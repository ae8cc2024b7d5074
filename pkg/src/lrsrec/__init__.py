"""Low-rank plus sparse matrix recovery.

Recovers an unknown low-rank matrix and sparse corruption matrix from linear
measurements (robust matrix sensing) or entrywise observations (robust PCA,
full or partial), via a spectral/hard-thresholding initialization followed by
factored projected gradient descent with a double-thresholded sparse update.
"""

from .errors import (
    DimensionError,
    DivergenceError,
    LrsError,
    NumericalError,
    ParameterError,
    ParseError,
)
from .experiments import (
    EXACT_RECOVERY_TOL,
    ExperimentSpec,
    run_convergence,
    run_phase_transition,
    run_single,
    run_stat_rate,
)
from .matrixio import load_matrix, save_matrix, save_trace
from .metrics import (
    combined_error,
    factor_distance,
    measure_incoherence,
    relative_error,
    rmse,
    truth_factors,
)
from .models import (
    ObservationModel,
    RpcaProblem,
    SensingProblem,
    grad,
    grad_factored,
    loss,
    objective_f,
)
from .numerics import (
    FactorPair,
    SvdResult,
    procrustes_rotation,
    spectral_norm,
    svd_top_k,
)
from .operators import (
    double_threshold,
    hard_threshold,
    project_row_norm,
    rank_project_clipped,
    truncate,
)
from .solver import (
    InitConfig,
    RunTrace,
    Solution,
    SolverConfig,
    TraceRecord,
    gd_phase,
    init_phase,
    solve,
)
from .synthetic import (
    GroundTruth,
    gen_lowrank,
    gen_rpca,
    gen_sensing,
    gen_sparse,
    make_ground_truth,
)

__version__ = "0.1.0"
