"""Quantum-noise modelling of squeezed-light interferometry with
entangled sidebands reflected off a detuned cavity.

The package provides the analytic noise spectral density of a
bichromatic homodyne readout of entangled sideband pairs, back-action
(ponderomotive) covariance propagation, conditional-squeezing analysis,
and joint nonlinear least-squares fitting of measured spectra, plus a
CLI that emits CSV/JSON reports with rendered figures.
"""

from .errors import (
    DataFormatError,
    DegenerateStateError,
    EprSqueezeError,
    SingularityError,
    ValidationError,
)
from .params import (
    CarrierLayout,
    FilterCavityParams,
    FrequencyGrid,
    InterferometerParams,
    QuadCovariance,
    ReadoutParams,
    SqueezerParams,
)
from .transfer import (
    apply_readout_loss,
    cavity_coupling,
    detunings_from_layout,
    kimble_cavity_equivalence_error,
    kimble_factor,
    optimal_squeeze_angle,
    phase_quadrature_noise,
    ponderomotive_transfer,
    readout_variance,
    squeezed_input_covariance,
    transform_covariance,
)
from .spectra import (
    NoiseSpectrum,
    Spectrogram,
    coefficient_c,
    coefficient_d,
    coupling_k1,
    coupling_k2,
    epr_noise_spectrum,
    inference_fidelity,
    interferometer_noise_map,
    minimum_noise_over_angle,
    spectrogram,
    squeeze_angle_trajectory,
)
from .epr import (
    TwoModeCovariance,
    conditional_variance,
    conditioning_report,
    minimum_conditional_variance,
    optimal_conditioning_gain,
    reid_epr_criterion,
    two_mode_squeezed_covariance,
)
from .fitting import (
    FitProblem,
    FitResult,
    MeasuredTrace,
    evaluate_residual,
    fit,
    profile_parameter,
)
from .config import ScenarioConfig, config_from_dict, load_config, preset

__version__ = "0.1.0"

__all__ = [
    "CarrierLayout",
    "DataFormatError",
    "DegenerateStateError",
    "EprSqueezeError",
    "FilterCavityParams",
    "FitProblem",
    "FitResult",
    "FrequencyGrid",
    "InterferometerParams",
    "MeasuredTrace",
    "NoiseSpectrum",
    "QuadCovariance",
    "ReadoutParams",
    "ScenarioConfig",
    "SingularityError",
    "Spectrogram",
    "SqueezerParams",
    "TwoModeCovariance",
    "ValidationError",
    "apply_readout_loss",
    "cavity_coupling",
    "coefficient_c",
    "coefficient_d",
    "conditional_variance",
    "conditioning_report",
    "config_from_dict",
    "coupling_k1",
    "coupling_k2",
    "detunings_from_layout",
    "epr_noise_spectrum",
    "evaluate_residual",
    "fit",
    "inference_fidelity",
    "interferometer_noise_map",
    "kimble_cavity_equivalence_error",
    "kimble_factor",
    "load_config",
    "minimum_conditional_variance",
    "minimum_noise_over_angle",
    "optimal_conditioning_gain",
    "optimal_squeeze_angle",
    "phase_quadrature_noise",
    "ponderomotive_transfer",
    "preset",
    "profile_parameter",
    "readout_variance",
    "reid_epr_criterion",
    "spectrogram",
    "squeeze_angle_trajectory",
    "squeezed_input_covariance",
    "transform_covariance",
    "two_mode_squeezed_covariance",
]
