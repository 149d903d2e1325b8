"""Dimension theory of rational-slope slices of the Sierpinski gasket.

The right-angle gasket cut by lines of slope p/q has a finite-type projected
dynamics: a pair of 0/1 transition matrices drives everything measurable
about the slices.  This package builds those matrices two independent ways,
certifies their structure, and computes the typical slice dimensions, the
pressure function, and the multifractal spectra, cross-checked against an
exact rational-geometry box-counting oracle.
"""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("gasketslice")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0.dev"

from ._kernels import BACKEND
from .errors import CapacityError, GasketSliceError, InvariantViolation, ValidationError
from .exact import (
    ExactPoint,
    RationalLine,
    SlopeSpec,
    Sqrt3,
    TriangleCell,
    line_hits_triangle,
    make_slope,
    slope_from_gasket_tangent,
    transform_from_right_angle,
    transform_to_right_angle,
)
from .matrices import (
    IntervalPartition,
    PrimitivityCertificate,
    TransitionPair,
    ValidationReport,
    build_matrices_congruence,
    build_matrices_geometric,
    build_partition,
    build_transition_pair,
    count_degenerate_words,
    degenerate_count_bound,
    find_primitive_word,
    matrices_to_csv,
    matrices_to_json,
    validate_structure,
)
from .measures import (
    LogProductValue,
    PerronVector,
    eta_weight,
    eta_weight_exact,
    eta_components_exact,
    log_product,
    perron_vector,
    sample_eta,
)
from .exponents import (
    ExponentEstimate,
    GrowthEnvelope,
    S_DIM,
    alpha_exact,
    alpha_monte_carlo,
    alpha_richardson,
    beta_exact,
    beta_monte_carlo,
    beta_richardson,
    growth_envelope,
)
from .pressure import (
    PressureCurve,
    SpectrumCurve,
    alpha_splice,
    legendre_gamma,
    pressure_at,
    pressure_curve,
    pressure_derivative,
    pressure_extrapolated,
    spectrum_box,
    spectrum_curve,
    spectrum_localdim,
)
from .slicer import (
    ConservationCheck,
    DyadicPointRef,
    GoodSetCount,
    SliceDimensionEstimate,
    conservation_check,
    conservation_envelope,
    expand_point,
    good_set_count_geometric,
    good_set_count_matrix,
    interval_dynamics_count,
    slice_dimension_estimate,
)
