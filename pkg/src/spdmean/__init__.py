"""Karcher and inductive means of symmetric positive-definite matrices."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DimensionMismatch,
    EigenFailure,
    InputError,
    InvalidPermutation,
    NoConvergence,
    NonFiniteEntry,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    SolverFailure,
    SpdMeanError,
)
from .spd_core import (  # noqa: E402
    EigenDecomposition,
    MatrixSet,
    SpdMatrix,
    distance,
    geodesic,
    load_matrix_set,
    matrix_exp,
    matrix_log,
    matrix_power,
    random_spd,
    save_matrix_set,
    sym_eig,
    validate_spd,
)
from .geometry import EuclideanPoint, EuclideanSpace, SpdSpace, certify_hadamard  # noqa: E402
from .sequences import Schedule, materialize, schedule_index  # noqa: E402
from .means import (  # noqa: E402
    InductiveState,
    KarcherConfig,
    MeanConstants,
    constants,
    inductive_mean,
    inductive_step,
    karcher_mean,
    objective,
    variance_check,
)
