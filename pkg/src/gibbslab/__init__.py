"""gibbslab: dense numerics for thermal states of finite-range 1D spin chains.

The package builds Gibbs states of short-ranged chain Hamiltonians exactly,
evaluates the entropic and operator-norm correlation measures between
separated blocks, and sweeps them against the width of the shielding region
to measure decay rates.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigInvalid,
    DimensionOverflow,
    GibbsLabError,
    InvalidOrder,
    NotAState,
    NotHermitian,
    NumericalInconsistency,
    SchemaMismatch,
    SingularOperator,
    SiteNotInSupport,
    SupportMismatch,
    SupportNotContained,
    TooFewSamples,
    UnknownModel,
)
from .operators import (
    DENSE_DIM_CAP,
    Interval,
    Operator,
    SpectralDecomposition,
    compose,
    conditional_expectation,
    embed,
    hs_norm,
    matrix_function,
    operator_norm,
    partial_trace,
    spectral_decomposition,
    trace_norm,
)
from .hamiltonians import (
    GibbsEnsemble,
    Interaction,
    InteractionTerm,
    MODEL_CATALOG,
    build_hamiltonian,
    gibbs_state,
    log_partition,
    preset_model,
    reduced_state,
)
from .divergences import (
    DivergenceReport,
    bs_entropy,
    bs_mutual_information,
    conditional_mutual_information,
    divergence_report,
    geometric_renyi,
    geometric_renyi_mi,
    mi_upper_bound_norm,
    mutual_information,
    trace_distance_to_product,
    umegaki,
    upper_bound_norm,
    von_neumann_entropy,
)
from .expansionals import (
    Expansional,
    ExpansionalBoundReport,
    TailDecomposition,
    complex_time_evolution,
    expansional,
    expansional_bound_report,
    local_distance_upper,
    tail_decomposition,
)
from .recovery import (
    CorrResult,
    Partition,
    SchmidtDecomposition,
    Step1Result,
    bs_recovery_product,
    covariance_correlation,
    dpi_gap,
    lambda_deviation,
    local_indistinguishability_gap,
    operator_schmidt,
    recovery_distance,
    step1_factorization,
)
from .experiments import (
    FLOOR,
    DecaySeries,
    SweepConfig,
    dpi_gap_scan,
    fit_exponential,
    partition_for,
    run_sweep,
    superexponential_signature,
    uniform_clustering_scan,
)
