"""Detector, shot noise and lock-in signal chain simulation.

Scaling convention
------------------
The demodulator multiplies the input by a unit-amplitude cosine reference
and low-passes the product with a gain of two, so a square-wave
amplitude-modulated input of depth d * V_dc settles to (2/pi) * d * V_dc
(the amplitude of the fundamental Fourier component).  Analysis code that
wants the physical contrast back multiplies by pi/2.

The low-pass is a one-modulation-period moving average (a synchronous comb
whose nulls sit exactly on the carrier and its harmonics) followed by a
cascade of ``filter_order`` identical single-pole stages of time constant
``time_constant_s``.  The comb contributes negligible extra noise
bandwidth; without it the carrier feedthrough of a single-pole filter
would swamp nanotesla-scale readouts.  It requires the sample rate to be
an integer multiple of the modulation frequency.

Modulation clocks
-----------------
The AM gate drives the RF on while cos(2 pi f_mod t) < 0 and the FM
switcher sits at +deviation while cos(2 pi f_mod t) >= 0, so that with
phase_rad = 0 an ODMR dip demodulates positive and the FM discriminator
has positive slope for a carrier parked above resonance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as _SPEED_OF_LIGHT
from scipy.constants import h as _PLANCK
from scipy.signal import lfilter

from .errors import (
    DeviationTooLarge,
    NegativeVoltage,
    SampleRateMismatch,
)
from .lineshape import (
    BroadeningModel,
    PeakShape,
    lorentzian_value,
    saturated_contrast,
    saturated_fwhm,
    synthesize_odmr,
)
from .io_formats import SweepRecord
from .spin_model import (
    FieldVector,
    SpinParams,
    TransitionLine,
    build_hamiltonian,
    eigenlevels,
    transitions,
)

SQUARE_AM_GAIN = 2.0 / math.pi

# Above this mean count a Gaussian draw replaces the Poisson draw; keeps
# long tracking simulations tractable without visible distortion.
GAUSSIAN_MEAN_THRESHOLD = 1e4

_BLOCK = 1_000_000


@dataclass(frozen=True)
class DetectorModel:
    """Photodiode plus transimpedance stage.

    collection_note documents the collected fraction of total emission; it
    is bookkeeping only and enters no formula (the photon rate conversion
    works on detected photons).
    """

    responsivity_a_per_w: float = 0.6
    transimpedance_v_per_a: float = 1e6
    effective_wavelength_m: float = 900e-9
    collection_note: float = 0.11

    def __post_init__(self) -> None:
        for name in (
            "responsivity_a_per_w",
            "transimpedance_v_per_a",
            "effective_wavelength_m",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def photon_energy_j(self) -> float:
        return _PLANCK * _SPEED_OF_LIGHT / self.effective_wavelength_m

    @property
    def volts_per_photon_rate(self) -> float:
        """Detector output volts per (photon/s) of detected PL."""
        return (
            self.photon_energy_j
            * self.responsivity_a_per_w
            * self.transimpedance_v_per_a
        )


def photon_rate_from_voltage(v_dc: float, detector: DetectorModel) -> float:
    """Detected photon rate implied by a DC detector voltage."""
    if v_dc < 0:
        raise NegativeVoltage(f"detector voltage must be >= 0, got {v_dc}")
    return v_dc / detector.volts_per_photon_rate


def voltage_from_photon_rate(rate_hz: float, detector: DetectorModel) -> float:
    """Inverse of photon_rate_from_voltage."""
    return rate_hz * detector.volts_per_photon_rate


def sample_shot_noise(rate_hz: float, dt_s: float, seed) -> int:
    """Draw one photon count for an interval dt at the given mean rate.

    seed may be an int, a SeedSequence or a Generator.  Means above
    GAUSSIAN_MEAN_THRESHOLD use a Gaussian approximation.
    """
    if rate_hz < 0:
        raise ValueError("rate_hz must be non-negative")
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    rng = np.random.default_rng(seed)
    mean = rate_hz * dt_s
    if mean > GAUSSIAN_MEAN_THRESHOLD:
        return int(round(max(rng.normal(mean, math.sqrt(mean)), 0.0)))
    return int(rng.poisson(mean))


def _shot_counts(mean: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorised photon counts with the Gaussian switch; returns floats."""
    out = np.empty_like(mean)
    big = mean > GAUSSIAN_MEAN_THRESHOLD
    small = ~big
    if small.any():
        out[small] = rng.poisson(mean[small])
    if big.any():
        mu = mean[big]
        out[big] = np.maximum(rng.normal(mu, np.sqrt(mu)), 0.0)
    return out


@dataclass(frozen=True)
class LockInConfig:
    """Demodulator settings; see the module docstring for conventions."""

    mode: str = "am"
    mod_freq_hz: float = 10e3
    time_constant_s: float = 0.5
    sample_rate_hz: float = 100e3
    fm_deviation_hz: float | None = None
    filter_order: int = 1
    phase_rad: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("am", "fm"):
            raise ValueError(f"mode must be 'am' or 'fm', got {self.mode!r}")
        if self.mod_freq_hz <= 0:
            raise ValueError("mod_freq_hz must be positive")
        if self.sample_rate_hz < 10.0 * self.mod_freq_hz:
            raise ValueError("sample_rate_hz must be at least 10x mod_freq_hz")
        if self.time_constant_s <= 1.0 / self.mod_freq_hz:
            raise ValueError("time_constant_s must exceed one modulation period")
        ratio = self.sample_rate_hz / self.mod_freq_hz
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                "sample_rate_hz must be an integer multiple of mod_freq_hz"
            )
        if self.filter_order < 1:
            raise ValueError("filter_order must be >= 1")
        if self.mode == "fm" and (
            self.fm_deviation_hz is None or self.fm_deviation_hz <= 0
        ):
            raise ValueError("fm mode needs a positive fm_deviation_hz")

    @property
    def samples_per_cycle(self) -> int:
        return int(round(self.sample_rate_hz / self.mod_freq_hz))

    @property
    def dt_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def settle_samples(self) -> int:
        """Samples covering the 5 tau settling discard."""
        return int(math.ceil(5.0 * self.time_constant_s * self.sample_rate_hz))


@dataclass
class TimeSeries:
    """Uniformly sampled series with a unit tag."""

    t0_s: float
    dt_s: float
    values: np.ndarray
    unit: str

    def __post_init__(self) -> None:
        if self.dt_s <= 0:
            raise ValueError("dt_s must be positive")
        self.values = np.asarray(self.values, dtype=float)

    def times(self) -> np.ndarray:
        return self.t0_s + self.dt_s * np.arange(self.values.size)


@dataclass(frozen=True)
class FieldTimeline:
    """Piecewise-constant axial field: starts_s[0] == 0, strictly increasing."""

    starts_s: np.ndarray
    bz_t: np.ndarray

    def __post_init__(self) -> None:
        starts = np.asarray(self.starts_s, dtype=float)
        bz = np.asarray(self.bz_t, dtype=float)
        object.__setattr__(self, "starts_s", starts)
        object.__setattr__(self, "bz_t", bz)
        if starts.size == 0 or starts.size != bz.size:
            raise ValueError("timeline needs equal-length, non-empty arrays")
        if starts[0] != 0.0:
            raise ValueError("timeline must start at t = 0")
        if starts.size >= 2 and not np.all(np.diff(starts) > 0):
            raise ValueError("timeline starts must be strictly increasing")

    def value_at(self, t_s: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.starts_s, t_s, side="right") - 1
        return self.bz_t[np.clip(idx, 0, self.bz_t.size - 1)]

    @property
    def end_s(self) -> float:
        return float(self.starts_s[-1])

    @classmethod
    def staircase(
        cls,
        bias_t: float,
        step_t: float,
        period_s: float,
        n_steps: int,
        centered: bool = True,
    ) -> "FieldTimeline":
        """Monotone staircase of n_steps levels, optionally centred on bias."""
        k = np.arange(n_steps, dtype=float)
        offset = k - 0.5 * (n_steps - 1) if centered else k
        return cls(starts_s=k * period_s, bz_t=bias_t + step_t * offset)


@dataclass(frozen=True)
class Scene:
    """Everything needed to predict the detector signal at fixed powers."""

    spin: SpinParams
    field: FieldVector
    broadening: BroadeningModel
    detector: DetectorModel
    pl_rate_per_w: float
    p_opt_w: float
    p_rf_w: float
    hyperfine: bool = True

    def photon_rate_hz(self) -> float:
        return self.pl_rate_per_w * self.p_opt_w

    def dc_voltage(self) -> float:
        return voltage_from_photon_rate(self.photon_rate_hz(), self.detector)

    def lines(self) -> list[TransitionLine]:
        levels = eigenlevels(build_hamiltonian(self.spin, self.field))
        return transitions(
            levels, self.spin, include_hyperfine=self.hyperfine
        )


class _Demodulator:
    """Stateful demodulation chain usable on consecutive sample blocks."""

    def __init__(self, cfg: LockInConfig, phase_rad: float | None = None):
        self.cfg = cfg
        self.phase = cfg.phase_rad if phase_rad is None else phase_rad
        n = cfg.samples_per_cycle
        self._b_comb = np.full(n, 1.0 / n)
        self._zi_comb = np.zeros(n - 1)
        beta = 1.0 - math.exp(-cfg.dt_s / cfg.time_constant_s)
        self._b_pole = np.array([beta])
        self._a_pole = np.array([1.0, beta - 1.0])
        self._zi_poles = [np.zeros(1) for _ in range(cfg.filter_order)]
        self.index = 0

    def _theta(self, n: int) -> np.ndarray:
        k = self.index + np.arange(n)
        return 2.0 * math.pi * (self.cfg.mod_freq_hz * self.cfg.dt_s) * k

    def process(self, values: np.ndarray) -> np.ndarray:
        ref = np.cos(self._theta(values.size) + self.phase)
        prod = 2.0 * values * ref
        out, self._zi_comb = lfilter(
            self._b_comb, [1.0], prod, zi=self._zi_comb
        )
        for i in range(self.cfg.filter_order):
            out, self._zi_poles[i] = lfilter(
                self._b_pole, self._a_pole, out, zi=self._zi_poles[i]
            )
        self.index += values.size
        return out


class _CycleMean:
    """One-period moving average, used for ripple-free DC readings."""

    def __init__(self, cfg: LockInConfig):
        n = cfg.samples_per_cycle
        self._b = np.full(n, 1.0 / n)
        self._zi = np.zeros(n - 1)

    def process(self, values: np.ndarray) -> np.ndarray:
        out, self._zi = lfilter(self._b, [1.0], values, zi=self._zi)
        return out


def _mod_cos(cfg: LockInConfig, index: int, n: int) -> np.ndarray:
    k = index + np.arange(n)
    return np.cos(2.0 * math.pi * (cfg.mod_freq_hz * cfg.dt_s) * k)


def lockin_demodulate(
    raw: TimeSeries, cfg: LockInConfig, phase_rad: float | None = None
) -> TimeSeries:
    """Demodulate a raw detector series; output settles over ~5 tau.

    Raises SampleRateMismatch when the series sample interval disagrees
    with the configuration.
    """
    if abs(raw.dt_s * cfg.sample_rate_hz - 1.0) > 1e-9:
        raise SampleRateMismatch(
            f"series dt {raw.dt_s} does not match sample_rate_hz "
            f"{cfg.sample_rate_hz}"
        )
    demod = _Demodulator(cfg, phase_rad)
    demod.index = int(round(raw.t0_s * cfg.sample_rate_hz))
    out = demod.process(raw.values)
    return TimeSeries(t0_s=raw.t0_s, dt_s=raw.dt_s, values=out, unit="V")


@dataclass(frozen=True)
class SweepPlan:
    """Frequency sweep played against the square-wave AM gate."""

    f_start_hz: float
    f_stop_hz: float
    n_points: int
    dwell_s: float

    def __post_init__(self) -> None:
        if self.f_stop_hz <= self.f_start_hz:
            raise ValueError("f_stop_hz must exceed f_start_hz")
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if self.dwell_s <= 0:
            raise ValueError("dwell_s must be positive")

    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start_hz, self.f_stop_hz, self.n_points)


def simulate_am_sweep(
    scene: Scene,
    plan: SweepPlan,
    cfg: LockInConfig,
    seed=0,
    shot_noise: bool = True,
) -> SweepRecord:
    """Simulate a square-wave AM ODMR sweep through the lock-in.

    Each swept point is held for plan.dwell_s (must be at least 5 tau);
    the reading is the demodulated output averaged after the settling
    discard, and dc_v is the cycle-averaged raw voltage over the same
    window.  An extra discarded lead-in dwell at the first frequency
    removes the initial filter transient.  With shot_noise False the
    output equals the 2/pi-scaled synthesized lineshape.
    """
    if cfg.mode != "am":
        raise ValueError("simulate_am_sweep needs an 'am' lock-in config")
    if plan.dwell_s < 5.0 * cfg.time_constant_s - 1e-12:
        raise ValueError("dwell_s must be at least 5 lock-in time constants")

    freqs = plan.frequencies()
    spectrum = synthesize_odmr(
        scene.lines(),
        scene.broadening,
        scene.p_rf_w,
        scene.p_opt_w,
        freqs,
        hyperfine=scene.hyperfine,
    )
    depth = spectrum.values
    rate0 = scene.photon_rate_hz()
    k_v = scene.detector.volts_per_photon_rate
    dt = cfg.dt_s
    dwell_n = int(round(plan.dwell_s * cfg.sample_rate_hz))
    settle_n = min(cfg.settle_samples, dwell_n - 1)

    rng = np.random.default_rng(seed)
    demod = _Demodulator(cfg)
    cycle_mean = _CycleMean(cfg)

    lockin = np.empty(plan.n_points)
    dc = np.empty(plan.n_points)
    # Point -1 is the discarded lead-in at the first frequency.
    for point in range(-1, plan.n_points):
        level = depth[max(point, 0)]
        gate = _mod_cos(cfg, demod.index, dwell_n) < 0
        rate = rate0 * (1.0 - level * gate)
        if shot_noise:
            volts = k_v * _shot_counts(rate * dt, rng) / dt
        else:
            volts = k_v * rate
        smooth_dc = cycle_mean.process(volts)
        out = demod.process(volts)
        if point < 0:
            continue
        window = slice(settle_n, dwell_n)
        lockin[point] = float(np.mean(out[window]))
        dc[point] = float(np.mean(smooth_dc[window]))
    return SweepRecord(frequency_hz=freqs, lockin_v=lockin, dc_v=dc)


def _fm_settled_output(
    peak: PeakShape, cfg: LockInConfig, v_dc: float, detuning_hz: float
) -> float:
    """Noise-free settled demodulator output with the carrier detuned."""
    n = int(round(8.0 * cfg.time_constant_s * cfg.sample_rate_hz))
    demod = _Demodulator(cfg)
    sign = np.where(_mod_cos(cfg, 0, n) >= 0, 1.0, -1.0)
    nu_inst = peak.center_hz + detuning_hz + cfg.fm_deviation_hz * sign
    volts = v_dc * (1.0 - lorentzian_value(peak, nu_inst))
    out = demod.process(volts)
    return float(np.mean(out[cfg.settle_samples :]))


def fm_discriminator_slope(
    peak: PeakShape, cfg: LockInConfig, v_dc: float
) -> float:
    """Demodulated volts per hertz of carrier detuning, at resonance.

    Computed by symmetric numeric differentiation of the modelled FM
    response so that any discretisation gain of the sampled chain cancels
    when converting readouts back to frequency or field.
    """
    if cfg.fm_deviation_hz is None or cfg.fm_deviation_hz <= 0:
        raise ValueError("fm_discriminator_slope needs fm_deviation_hz")
    if cfg.fm_deviation_hz >= peak.fwhm_hz:
        raise DeviationTooLarge(
            f"fm deviation {cfg.fm_deviation_hz:.3g} Hz >= linewidth "
            f"{peak.fwhm_hz:.3g} Hz"
        )
    h = peak.fwhm_hz / 100.0
    plus = _fm_settled_output(peak, cfg, v_dc, +h)
    minus = _fm_settled_output(peak, cfg, v_dc, -h)
    return (plus - minus) / (2.0 * h)


@dataclass
class TrackingResult:
    """Output of simulate_fm_tracking."""

    lockin: TimeSeries
    field_estimate: TimeSeries
    carrier_hz: float
    slope_v_per_hz: float
    gamma_eff_hz_per_t: float
    field_noise_sigma_in_t: float


def _line_table(scene: Scene) -> tuple[list[TransitionLine], dict[str, float]]:
    """Scene lines at the bias field plus each line's d(freq)/d(bz) slope."""
    lines = scene.lines()
    h = 1e-6
    slopes: dict[str, float] = {}
    for sign in (+1.0, -1.0):
        shifted = Scene(
            spin=scene.spin,
            field=FieldVector(
                scene.field.bx_t, scene.field.by_t, scene.field.bz_t + sign * h
            ),
            broadening=scene.broadening,
            detector=scene.detector,
            pl_rate_per_w=scene.pl_rate_per_w,
            p_opt_w=scene.p_opt_w,
            p_rf_w=scene.p_rf_w,
            hyperfine=scene.hyperfine,
        )
        for ln in shifted.lines():
            slopes[ln.label] = slopes.get(ln.label, 0.0) + sign * ln.frequency_hz
    return lines, {label: df / (2.0 * h) for label, df in slopes.items()}


def _field_noise_input_sigma(
    target_step_sigma_t: float,
    lines: list[TransitionLine],
    slopes: dict[str, float],
    fwhm_hz: float,
    contrast: float,
    carrier_hz: float,
    v_dc: float,
    cfg: LockInConfig,
    slope_v_per_hz: float,
    gamma_eff: float,
) -> float:
    """Per-sample white field noise giving the requested settled output std.

    The injected noise sees a time-varying gain (the modulated slope of the
    lineshape times the demod reference); its settled variance is the mean
    squared gain over one modulation cycle times the filter energy of the
    demod chain.  Inverting that linear model calibrates the input sigma.
    """
    n = cfg.samples_per_cycle
    cosine = _mod_cos(cfg, 0, n)
    sign = np.where(cosine >= 0, 1.0, -1.0)
    nu_inst = carrier_hz + cfg.fm_deviation_hz * sign
    eps = 1e-8
    dv_db = np.zeros(n)
    for ln in lines:
        amp = contrast * ln.rel_strength
        peak = PeakShape(center_hz=ln.frequency_hz, fwhm_hz=fwhm_hz, contrast=amp)
        line_slope = slopes.get(ln.label, 0.0)
        plus = lorentzian_value(peak, nu_inst - line_slope * eps)
        minus = lorentzian_value(peak, nu_inst + line_slope * eps)
        dv_db += -v_dc * (plus - minus) / (2.0 * eps)
    gain = 2.0 * np.cos(2.0 * math.pi * np.arange(n) / n + cfg.phase_rad) * dv_db
    mean_sq_gain = float(np.mean(gain**2))
    sigma_out_per_unit = math.sqrt(mean_sq_gain * _filter_energy_pure(cfg))
    field_gain = abs(slope_v_per_hz * gamma_eff)
    if sigma_out_per_unit <= 0 or field_gain <= 0:
        raise ValueError("cannot calibrate field noise for a flat response")
    return target_step_sigma_t * field_gain / sigma_out_per_unit


def _filter_energy_pure(cfg: LockInConfig) -> float:
    """Sum of squared impulse response of comb plus pole cascade alone."""
    n = max(
        int(math.ceil(30.0 * cfg.time_constant_s * cfg.sample_rate_hz)),
        64 * cfg.samples_per_cycle,
    )
    m = cfg.samples_per_cycle
    b_comb = np.full(m, 1.0 / m)
    impulse = np.zeros(n)
    impulse[0] = 1.0
    out = lfilter(b_comb, [1.0], impulse)
    beta = 1.0 - math.exp(-cfg.dt_s / cfg.time_constant_s)
    for _ in range(cfg.filter_order):
        out = lfilter([beta], [1.0, beta - 1.0], out)
    return float(np.sum(out**2))


def simulate_fm_tracking(
    timeline: FieldTimeline,
    scene: Scene,
    cfg: LockInConfig,
    duration_s: float,
    seed=0,
    shot_noise: bool = True,
    field_noise_step_sigma_t: float = 0.0,
) -> TrackingResult:
    """Track an axial field timeline with the FM-locked discriminator.

    The RF carrier is parked on the rising (nu2) resonance of the scene's
    bias field and square-wave switched by +-fm_deviation_hz.  The
    demodulated output is converted to a field estimate with the modelled
    discriminator slope and the numeric d(nu2)/d(bz) of the scene, so a
    constant field reads back as the bias.

    field_noise_step_sigma_t, when positive, injects white field noise
    calibrated so the settled field-estimate standard deviation equals the
    requested value.
    """
    if cfg.mode != "fm":
        raise ValueError("simulate_fm_tracking needs an 'fm' lock-in config")
    rate0 = scene.photon_rate_hz()
    if rate0 <= 0:
        raise ValueError("scene photon rate must be positive for tracking")

    lines, slopes = _line_table(scene)
    by_label = {ln.label: ln for ln in lines}
    if "nu2" not in by_label:
        raise ValueError("scene produces no nu2 line to track")
    carrier = by_label["nu2"].frequency_hz
    gamma_eff = slopes["nu2"]
    fwhm = saturated_fwhm(scene.broadening, scene.p_rf_w, scene.p_opt_w)
    contrast = saturated_contrast(scene.broadening, scene.p_rf_w, scene.p_opt_w)
    if cfg.fm_deviation_hz >= fwhm:
        raise DeviationTooLarge(
            f"fm deviation {cfg.fm_deviation_hz:.3g} Hz >= linewidth {fwhm:.3g} Hz"
        )
    v_dc = scene.dc_voltage()
    k_v = scene.detector.volts_per_photon_rate
    nu2_peak = PeakShape(
        center_hz=carrier,
        fwhm_hz=fwhm,
        contrast=contrast * by_label["nu2"].rel_strength,
    )
    slope_v = fm_discriminator_slope(nu2_peak, cfg, v_dc)

    sigma_in = 0.0
    if field_noise_step_sigma_t > 0:
        sigma_in = _field_noise_input_sigma(
            field_noise_step_sigma_t,
            lines,
            slopes,
            fwhm,
            contrast,
            carrier,
            v_dc,
            cfg,
            slope_v,
            gamma_eff,
        )

    dt = cfg.dt_s
    n_total = int(round(duration_s * cfg.sample_rate_hz))
    bias = scene.field.bz_t
    half = 0.5 * fwhm
    amps = np.array([contrast * ln.rel_strength for ln in lines])
    centers = np.array([ln.frequency_hz for ln in lines])
    line_slopes = np.array([slopes[ln.label] for ln in lines])

    rng = np.random.default_rng(seed)
    demod = _Demodulator(cfg)
    out = np.empty(n_total)
    for start in range(0, n_total, _BLOCK):
        stop = min(start + _BLOCK, n_total)
        k = np.arange(start, stop)
        t = k * dt
        db = timeline.value_at(t) - bias
        if sigma_in > 0:
            db = db + rng.normal(0.0, sigma_in, size=db.size)
        sign = np.where(_mod_cos(cfg, start, stop - start) >= 0, 1.0, -1.0)
        nu_inst = carrier + cfg.fm_deviation_hz * sign
        depth = np.zeros(stop - start)
        for amp, center, line_slope in zip(amps, centers, line_slopes):
            detune = nu_inst - (center + line_slope * db)
            depth += amp * half * half / (detune * detune + half * half)
        rate = rate0 * (1.0 - depth)
        if shot_noise:
            volts = k_v * _shot_counts(rate * dt, rng) / dt
        else:
            volts = k_v * rate
        out[start:stop] = demod.process(volts)

    estimate = bias - out / (slope_v * gamma_eff)
    return TrackingResult(
        lockin=TimeSeries(t0_s=0.0, dt_s=dt, values=out, unit="V"),
        field_estimate=TimeSeries(t0_s=0.0, dt_s=dt, values=estimate, unit="T"),
        carrier_hz=carrier,
        slope_v_per_hz=slope_v,
        gamma_eff_hz_per_t=gamma_eff,
        field_noise_sigma_in_t=sigma_in,
    )
