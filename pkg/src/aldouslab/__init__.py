"""Spectral-gap laboratory for random walks and the interchange process on
finite lattice graphs: generators, eigensolvers, trace inequalities, and the
gap-equalization machinery behind Aldous-condition certificates."""

from .lattice import (
    RateFunction,
    VertexSet,
    face_vertices,
    induced_rates,
    is_traceable,
    line_vertices,
    make_hypercube,
    sequence_is_increasing,
    traceable_sequence,
)
from .operators import (
    LiftOperator,
    SymmetricGenerator,
    delta_general,
    delta_hat_general,
    ip_generator,
    is_markov_generator,
    lift_apply,
    rw_generator,
    verify_intertwining,
)
from .spectral import (
    SpectralResult,
    full_spectrum,
    hypercube_eigenpair,
    hypercube_gap_closed_form,
    spectral_gap,
    spectrum_containment,
)
from .trace_bounds import gap_lower_bound, gap_upper_bound, sandwich, trace_1d, trace_nd
from .aldous import (
    AldousVerdict,
    build_equalized_sequence,
    find_tk,
    interpolate_rate,
    is_aldous,
    ratio_table,
    verify_corollary,
)

__version__ = "0.1.0"

__all__ = [
    "RateFunction", "VertexSet", "face_vertices", "induced_rates",
    "is_traceable", "line_vertices", "make_hypercube",
    "sequence_is_increasing", "traceable_sequence",
    "LiftOperator", "SymmetricGenerator", "delta_general", "delta_hat_general",
    "ip_generator", "is_markov_generator", "lift_apply", "rw_generator",
    "verify_intertwining",
    "SpectralResult", "full_spectrum", "hypercube_eigenpair",
    "hypercube_gap_closed_form", "spectral_gap", "spectrum_containment",
    "gap_lower_bound", "gap_upper_bound", "sandwich", "trace_1d", "trace_nd",
    "AldousVerdict", "build_equalized_sequence", "find_tk", "interpolate_rate",
    "is_aldous", "ratio_table", "verify_corollary",
]
