"""Spin model, spectra, line-group fits and maser threshold for V2 centres in SiC."""

from ._core import (
    ConvergenceError,
    DegenerateFitError,
    LineGroupFit,
    MaserParams,
    NoInversionError,
    NoResonanceError,
    NotFoundError,
    NumericalError,
    Orientation,
    SpinSystem,
    TransitionLabel,
    TransitionSet,
    ValidationError,
    WeightMode,
    angular_delta_p,
    boltzmann_delta_p,
    energy_levels,
    fit_line_group,
    fit_saturation,
    isotope_site_probabilities,
    lorentzian_derivative,
    magic_angle,
    masing_margin,
    peak_to_peak,
    resonance_fields_exact,
    run_cli,
    saturation_delta_p,
    splitting_first_order,
    superradiance_exponent,
    synthesize_spectrum,
    threshold_q,
    threshold_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
