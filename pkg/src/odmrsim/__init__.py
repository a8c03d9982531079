"""Simulation and analysis of CW ODMR magnetometry with S=3/2 defects."""

from .errors import (
    ConvergenceFailure,
    DeviationTooLarge,
    EmptyGrid,
    EmptyTransitionList,
    FieldOutOfRange,
    FormatError,
    IoFailure,
    MalformedHeader,
    NegativeVoltage,
    NonConvergence,
    NonMonotoneAxis,
    NonNumericCell,
    NonPositiveInput,
    NoPeakFound,
    OdmrError,
    SampleRateMismatch,
    ScheduleMismatch,
    SchemaViolation,
    WindowOutOfRange,
    ZeroDC,
)
from .spin_model import (
    AxialFrequencies,
    FieldVector,
    LevelSet,
    SpinParams,
    TransitionLine,
    axial_frequencies,
    build_hamiltonian,
    eigenlevels,
    gyromagnetic_ratio,
    level_crossing_field,
    spin_operators,
    transitions,
)
from .lineshape import (
    BroadeningModel,
    PeakShape,
    PRESETS,
    SamplePreset,
    SyntheticSpectrum,
    lorentzian_value,
    saturated_contrast,
    saturated_fwhm,
    synthesize_odmr,
)
from .signal_chain import (
    DetectorModel,
    FieldTimeline,
    LockInConfig,
    SQUARE_AM_GAIN,
    Scene,
    SweepPlan,
    TimeSeries,
    TrackingResult,
    fm_discriminator_slope,
    lockin_demodulate,
    photon_rate_from_voltage,
    sample_shot_noise,
    simulate_am_sweep,
    simulate_fm_tracking,
    voltage_from_photon_rate,
)
from .analysis import (
    LorentzFit,
    SHOT_NOISE_PREFACTOR,
    SensitivityMap,
    SensitivityPoint,
    StepReport,
    analyze_steps,
    build_sensitivity_map,
    fit_lorentzian,
    odmr_contrast,
    peak_ratio,
    shot_noise_sensitivity,
)
from .io_formats import (
    ConfigDoc,
    FORMAT_VERSION,
    RunManifest,
    SweepRecord,
    config_from_dict,
    load_config,
    load_manifest,
    load_map_csv,
    load_sweep,
    store_results,
    verify_manifest,
    write_map_csv,
    write_run_manifest,
    write_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AxialFrequencies",
    "BroadeningModel",
    "ConfigDoc",
    "ConvergenceFailure",
    "DetectorModel",
    "DeviationTooLarge",
    "EmptyGrid",
    "EmptyTransitionList",
    "FieldOutOfRange",
    "FieldTimeline",
    "FieldVector",
    "FormatError",
    "FORMAT_VERSION",
    "IoFailure",
    "LevelSet",
    "LockInConfig",
    "LorentzFit",
    "MalformedHeader",
    "NegativeVoltage",
    "NonConvergence",
    "NonMonotoneAxis",
    "NonNumericCell",
    "NonPositiveInput",
    "NoPeakFound",
    "OdmrError",
    "PeakShape",
    "PRESETS",
    "RunManifest",
    "SampleRateMismatch",
    "SamplePreset",
    "ScheduleMismatch",
    "SchemaViolation",
    "Scene",
    "SensitivityMap",
    "SensitivityPoint",
    "SHOT_NOISE_PREFACTOR",
    "SpinParams",
    "SQUARE_AM_GAIN",
    "StepReport",
    "SweepPlan",
    "SweepRecord",
    "SyntheticSpectrum",
    "TimeSeries",
    "TrackingResult",
    "TransitionLine",
    "WindowOutOfRange",
    "ZeroDC",
    "analyze_steps",
    "axial_frequencies",
    "build_hamiltonian",
    "build_sensitivity_map",
    "config_from_dict",
    "eigenlevels",
    "fit_lorentzian",
    "fm_discriminator_slope",
    "gyromagnetic_ratio",
    "level_crossing_field",
    "load_config",
    "load_manifest",
    "load_map_csv",
    "load_sweep",
    "lockin_demodulate",
    "lorentzian_value",
    "odmr_contrast",
    "peak_ratio",
    "photon_rate_from_voltage",
    "sample_shot_noise",
    "saturated_contrast",
    "saturated_fwhm",
    "shot_noise_sensitivity",
    "simulate_am_sweep",
    "simulate_fm_tracking",
    "spin_operators",
    "store_results",
    "synthesize_odmr",
    "transitions",
    "verify_manifest",
    "voltage_from_photon_rate",
    "write_map_csv",
    "write_run_manifest",
    "write_sweep",
]
