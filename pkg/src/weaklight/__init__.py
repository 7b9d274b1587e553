"""Collinear weak-measurement optics of a rotating birefringent plate.

A plate whose TE/TM axes pick up frequency-dependent phases sits between a
preparation polarizer and an analyzer.  The post-selected complex response
T(omega, beta) develops exact zeros at half-wave frequencies for specific
plate angles; near those zeros the spectral phase steepens without bound, so
the group delay (the weak value of the time-of-flight operator) swings far
outside the eigen-delay range, flipping between slow and fast light across
the singular angle.  This package computes T, its phase and group-delay
spectra, locates the zeros, propagates pulses to exhibit the delays, and
inverts measured delays back to plate angle.

Frequencies are in units of the default model's first half-wave frequency;
times in its inverse; angles in radians.
"""

from .backends import active_backend
from .crystal import (
    DEFAULT_MODEL,
    DispersionModel,
    LinearDispersion,
    TabulatedDispersion,
    evolution_operator,
    flight_operator,
    group_delays,
    half_wave_frequencies,
    load_tabulated,
    phases,
)
from .errors import BadBracket, PostselectionNull
from .jones import (
    PolarizationOperator,
    PolarizationState,
    apply,
    basis_state,
    hermitian_eigenvalues,
    inner,
    is_hermitian,
    is_unitary,
    linear_state,
    rotation,
)
from .pulse import (
    PropagationReport,
    PulseField,
    SpectralGrid,
    gaussian_pulse,
    peak_time,
    propagate,
)
from .weakmeas import (
    NUMERIC_H,
    SINGULAR_TOL,
    PhaseSpectrum,
    SelectionPair,
    Singularity,
    TransferSample,
    contour_grid,
    estimate_beta,
    find_singularities,
    group_delay,
    phase_spectrum,
    selection,
    sweep_angle,
    transfer,
    transfer_grid,
    transfer_line,
    unwrap,
    weak_flight_value,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "active_backend",
    # jones
    "PolarizationState", "PolarizationOperator", "basis_state", "linear_state",
    "rotation", "inner", "apply", "is_unitary", "is_hermitian",
    "hermitian_eigenvalues",
    # crystal
    "LinearDispersion", "TabulatedDispersion", "DispersionModel",
    "DEFAULT_MODEL", "phases", "group_delays", "half_wave_frequencies",
    "evolution_operator", "flight_operator", "load_tabulated",
    # weakmeas
    "SINGULAR_TOL", "NUMERIC_H", "SelectionPair", "TransferSample",
    "Singularity", "PhaseSpectrum", "selection", "transfer", "transfer_line",
    "transfer_grid", "unwrap", "phase_spectrum", "group_delay",
    "weak_flight_value", "sweep_angle", "contour_grid", "find_singularities",
    "estimate_beta",
    # pulse
    "SpectralGrid", "PulseField", "PropagationReport", "gaussian_pulse",
    "propagate", "peak_time",
    # errors
    "PostselectionNull", "BadBracket",
]
