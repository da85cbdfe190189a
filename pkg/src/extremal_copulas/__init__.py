"""Singular extreme copulas: constructions, certificates, approximation,
and Frechet-class optimization.

The package works in exact rational arithmetic wherever measures are
manipulated, so marginal validation and round-trip identities hold with
zero tolerance; float paths exist for lattice sweeps and sampling.
"""

from .approximation import (
    ApproximationResult,
    IntervalPartition,
    approximate,
    assemble,
    interval_partition,
    rationalization_error,
    rationalize,
)
from .constructions import (
    GraphCopula,
    MeasurePreservationReport,
    PermutationCopulaSpec,
    PiecewiseLinearMap,
    four_line_3d,
    graph_copula,
    measure_preserving_check,
    normalize_orientation,
    permutation_copula,
    shift_transform,
    shuffle_copula,
    shuffle_copula_truncated,
    swap_transform,
    tent_copula,
)
from .errors import (
    CopulaError,
    DecompositionError,
    DomainError,
    InvalidMeasureError,
    NotMeasurePreservingError,
    ObjectiveSyntaxError,
    RationalizationError,
)
from .extremality import (
    NECESSARY_CONDITION_PASSED,
    NOT_EXTREME,
    DecompositionWitness,
    FunctionalCoverCertificate,
    SingularityVerdict,
    SquareRegion,
    find_dense_square,
    functional_cover_check,
    is_functional_over,
    lemma_decompose,
    singularity_diagnostic,
)
from .frechet import (
    CostTensor,
    MatchProbabilityResult,
    MatchStep,
    OptimizationResult,
    brute_force_assignment,
    cost_tensor,
    default_match_schedule,
    evaluate_permutation_objective,
    local_search_nd,
    match_probability,
    monte_carlo_objective,
    optimize_m_of_g,
    solve_assignment_2d,
)
from .marginals import (
    Exponential,
    MarginalDistribution,
    Normal,
    TabulatedQuantile,
    Uniform,
    parse_marginal,
    quantile_eval,
)
from .measures import (
    FGM,
    Box,
    Comonotone,
    Copula,
    Countermonotone,
    DinfResult,
    GridDensity,
    GridMeasure,
    GridSpec,
    Independence,
    MixedMeasure,
    Segment,
    SegmentMeasure,
    ValidationReport,
    cdf_eval,
    dinf_distance,
    grid_density_from_copula,
    grid_extract,
    marginal_slice_masses,
    sample,
    segment_box_mass,
    stochasticity_error,
    validate_copula_measure,
)
from .objectives import (
    Objective,
    abs_diff_objective,
    builtin_objective,
    match_eps_objective,
    parse_objective,
    product_objective,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
