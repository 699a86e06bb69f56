"""Spectral-count obstruction toolkit for twisted Dirac families on the circle.

The package checks, at matrix scale, that a nonvanishing product of odd
generator classes over the holonomy torus forces small-window eigenvalue
counts of the twisted Dirac truncations to reach the rank, and exposes the
supporting machinery: an exact exterior-algebra calculator, circle Dirac
spectra, bounded transforms and shift deformations, invertibility covers,
and spectral flow.
"""

from .circle_dirac import (
    HolonomySpec,
    SpectrumWindow,
    SpinStructure,
    analytic_spectrum,
    cluster_values,
    fourier_truncation,
    holonomy_angles,
    holonomy_log,
    kernel_dim,
    truncation_from_angles,
    truncation_spectrum,
)
from .cohomology import (
    AlgebraContext,
    CohomologyClass,
    character_coefficient,
    cup,
    format_class,
    generator,
    obstruction_product,
    odd_chern_character,
    parse_class,
    zero,
)
from .errors import (
    BoundaryAmbiguityError,
    ContextMismatchError,
    DiracObstructionError,
    EndpointDegeneracyError,
    RefinementRequiredError,
    ValidationError,
)
from .fredholm import (
    CoverReport,
    FamilyPoint,
    PathSpec,
    SampledFamily,
    bounded_transform,
    build_cover,
    count_in_window,
    require_hermitian,
    shift_deform,
    shift_levels,
    spectral_count,
    spectral_flow,
)
from .obstruction import (
    EpsilonReport,
    ObstructionVerdict,
    TorusGridSpec,
    bounded_scalar,
    c1_pairing,
    coordinate_loop,
    tautological_family,
    verify_contrapositive,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraContext",
    "BoundaryAmbiguityError",
    "CohomologyClass",
    "ContextMismatchError",
    "CoverReport",
    "DiracObstructionError",
    "EndpointDegeneracyError",
    "EpsilonReport",
    "FamilyPoint",
    "HolonomySpec",
    "ObstructionVerdict",
    "PathSpec",
    "RefinementRequiredError",
    "SampledFamily",
    "SpectrumWindow",
    "SpinStructure",
    "TorusGridSpec",
    "ValidationError",
    "analytic_spectrum",
    "bounded_scalar",
    "bounded_transform",
    "build_cover",
    "c1_pairing",
    "character_coefficient",
    "cluster_values",
    "coordinate_loop",
    "count_in_window",
    "cup",
    "fourier_truncation",
    "format_class",
    "generator",
    "holonomy_angles",
    "holonomy_log",
    "kernel_dim",
    "obstruction_product",
    "odd_chern_character",
    "parse_class",
    "require_hermitian",
    "shift_deform",
    "shift_levels",
    "spectral_count",
    "spectral_flow",
    "tautological_family",
    "truncation_from_angles",
    "truncation_spectrum",
    "verify_contrapositive",
    "zero",
]
