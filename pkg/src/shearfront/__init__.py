"""Minimal KPP front speeds in space-time periodic shear flows.

Computes the minimal traveling-front speed of the reaction-diffusion-
advection equation with a mean-zero shear that is periodic in one cross
direction and in time.  The speed comes from minimizing a principal-
eigenvalue quotient over exponential decay rates; a direct PDE evolution
is included as an independent cross check.
"""

__version__ = "0.1.0"

from .eigen import (
    EigenPair,
    OperatorMatrix,
    assemble,
    diagonal_weighted_mean,
    drift_eigenvalue,
    eigenvalue_identity_gap,
    mu_of_lambda,
    principal_eigenpair,
    record_eigenpairs,
)
from .errors import (
    BoundaryContaminationError,
    ComplexEigenvalueError,
    ConvergenceError,
    GridError,
    InsufficientDataError,
    PositivityError,
    RecordParseError,
    ShearError,
    StabilityError,
)
from .grid import (
    DiffMatrix,
    GridSpec,
    first_derivative_matrix,
    flatten_index,
    second_derivative_matrix,
    unflatten_index,
)
from .oracle import FrontTrace, OracleConfig, estimate_speed, evolve, write_trace
from .shear import (
    ShearField,
    ShearSpec,
    check_nondegenerate,
    load_table_csv,
    mean_over_cell,
    sample,
    table_from_fourier,
    time_average,
)
from .speed import (
    SolverOptions,
    SpeedResult,
    candidate_speed,
    enhancement,
    minimize_speed,
    scan_candidate_speeds,
    slope_sign_changes,
    zero_shear_speed,
)
from .sweeps import (
    LARGE_DELTA_WINDOW,
    SMALL_DELTA_WINDOW,
    SweepConfig,
    SweepRecord,
    default_grid,
    fit_loglog_slope,
    read_records,
    run_sweep,
    write_records,
)

__all__ = [name for name in dir() if not name.startswith("_")]
