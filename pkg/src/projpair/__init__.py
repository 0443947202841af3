"""Two-projection geometry made computable.

Halmos canonical form of a projection pair, the essential codimension /
Fredholm-pair index by three independent routes, diagonals of projections
(admissibility and construction), and the integer attached to diagonals of
self-adjoint operators with finite spectrum.
"""

from .canonical import (
    COMPACT,
    Cardinal,
    CanonicalPair,
    FINITE_RANK,
    Geometric,
    INFINITY,
    IdealClass,
    PowerDecay,
    SSpectrum,
    Undefined,
    conjugator_exists,
    corner_trace,
    diff_in_ideal,
    ideal_pow,
    majorizes,
    pair_index,
    pair_is_fredholm,
    same_diagonal_witness,
    schatten,
)
from .errors import (
    ConsistencyError,
    DefectPlacementError,
    IndexObstruction,
    NotApplicableError,
    NotFredholmError,
    NotTraceClassError,
    PreconditionFailed,
    ProjPairError,
    SchemaError,
    UnsupportedTailError,
    ValidationError,
)
from .finite_spectrum import (
    BJReport,
    DiagonalModel,
    FiniteSpectrumOp,
    bj_analyze,
    contraction_corner_check,
    spectral_cutoff,
)
from .kadison import (
    Declared,
    DiagonalSequence,
    KadisonReport,
    ab_sums,
    check_diagonal,
    construct_projection,
    ess_codim_from_diagonal,
    frame_index,
    range_isometry,
)
from .operators import (
    HalmosForm,
    TailPattern,
    TailedOperator,
    TailedProjection,
    arveson_corner_trace,
    as_projection,
    build_conjugator,
    complete_to_isometry,
    difference_eigs,
    essential_codimension,
    halmos_decompose,
    intersection_dims,
    restricted_dims,
    restricted_index,
    validate_projection,
)
from .spectral import EigenSystem, givens_rotation, hermitian_eigen, nullspace_dim

__version__ = "0.1.0"

__all__ = [
    "BJReport", "COMPACT", "Cardinal", "CanonicalPair", "ConsistencyError",
    "Declared", "DefectPlacementError", "DiagonalModel", "DiagonalSequence",
    "EigenSystem", "FINITE_RANK", "FiniteSpectrumOp", "Geometric", "HalmosForm",
    "IdealClass", "INFINITY", "IndexObstruction", "KadisonReport",
    "NotApplicableError", "NotFredholmError", "NotTraceClassError", "PowerDecay",
    "PreconditionFailed", "ProjPairError", "SSpectrum", "SchemaError",
    "TailPattern", "TailedOperator", "TailedProjection", "Undefined",
    "UnsupportedTailError", "ValidationError", "ab_sums", "arveson_corner_trace",
    "as_projection", "bj_analyze", "build_conjugator", "check_diagonal",
    "complete_to_isometry", "conjugator_exists", "construct_projection",
    "contraction_corner_check", "corner_trace", "diff_in_ideal",
    "difference_eigs", "ess_codim_from_diagonal", "essential_codimension",
    "frame_index", "givens_rotation", "halmos_decompose", "hermitian_eigen",
    "ideal_pow", "intersection_dims", "majorizes", "nullspace_dim", "pair_index",
    "pair_is_fredholm", "range_isometry", "restricted_dims", "restricted_index",
    "same_diagonal_witness", "schatten", "spectral_cutoff", "validate_projection",
]
