"""Minimal-coherence unit-norm frame design and compressed-sensing
sensing-matrix optimization."""

from .bounds import (
    BoundDomainError,
    composite_bound,
    recoverability_bound,
    welch_bound,
)
from .frame import (
    CoherenceReport,
    DegenerateFrameError,
    Frame,
    FrameError,
    PairIndex,
    coherence_of_matrix,
    init_frame,
    mutual_coherence,
    normalize_columns,
    pair_arrays,
    pair_count,
)
from .frameio import FrameFormatError, read_frame, write_frame
from .solver import (
    SimplexWeights,
    SolverConfig,
    SurrogateData,
    apply_D,
    apply_D_adjoint,
    build_surrogate,
    frame_objective,
    mda_solve,
    outer_step,
    solve,
)
from .accel import SquaremState, squarem_step
from .baselines import APVariant, alternating_projection, nearest_alpha_tight, shrink
from .cs import (
    ExperimentSpec,
    SensingProblem,
    SparseSignalSet,
    dct_dictionary,
    haar_dictionary,
    ls_sensing_matrix,
    make_sparse_signals,
    omp_recover,
    optimize_sensing,
    percent_decrease,
    psnr,
    run_synthetic_experiment,
    sre_aware_sensing_matrix,
)
from .trace import ConvergenceTrace, TraceRecord

__version__ = "0.1.0"
