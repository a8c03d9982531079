"""Fitting and sensitivity analysis for demodulated ODMR data.

The fitted amplitude of a demodulated sweep is (2/pi) * contrast * V_dc
under the square-wave AM convention of the signal chain, so
odmr_contrast defaults to dividing that gain back out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyGrid,
    NonConvergence,
    NonPositiveInput,
    NoPeakFound,
    ScheduleMismatch,
    WindowOutOfRange,
    ZeroDC,
)
from .lineshape import BroadeningModel, saturated_contrast, saturated_fwhm
from .signal_chain import (
    FieldTimeline,
    LockInConfig,
    SQUARE_AM_GAIN,
    TimeSeries,
)
from .spin_model import gyromagnetic_ratio

# 4 sqrt(2) / (3 sqrt(3)): photon shot-noise prefactor for a Lorentzian
# resonance interrogated at the steepest-slope detuning.
SHOT_NOISE_PREFACTOR = 4.0 * math.sqrt(2.0) / (3.0 * math.sqrt(3.0))


@dataclass
class LorentzFit:
    """Least-squares Lorentzian-plus-offset fit with 95% Wald intervals."""

    center_hz: float
    fwhm_hz: float
    amplitude: float
    offset: float
    center_ci_hz: tuple[float, float]
    fwhm_ci_hz: tuple[float, float]
    rss: float
    n_iter: int

    def evaluate(self, frequency_hz) -> np.ndarray:
        x = np.asarray(frequency_hz, dtype=float)
        half_sq = (0.5 * self.fwhm_hz) ** 2
        return self.offset + self.amplitude * half_sq / (
            (x - self.center_hz) ** 2 + half_sq
        )


def _lorentz_model_jac(params: np.ndarray, x: np.ndarray):
    center, width, amp, offset = params
    half = 0.5 * width
    u = half * half
    dx = x - center
    denom = dx * dx + u
    shape = u / denom
    model = offset + amp * shape
    jac = np.empty((x.size, 4))
    jac[:, 0] = amp * u * 2.0 * dx / (denom * denom)
    jac[:, 1] = amp * half * dx * dx / (denom * denom)
    jac[:, 2] = shape
    jac[:, 3] = 1.0
    return model, jac


def _initial_guess(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    offset = float(np.median(y))
    dev = y - offset
    idx = int(np.argmax(np.abs(dev)))
    amp = float(dev[idx])
    center = float(x[idx])
    above = np.abs(dev) > 0.5 * abs(amp)
    dx = float(np.median(np.diff(x)))
    width = max(float(np.count_nonzero(above)) * dx, 2.0 * dx)
    return np.array([center, width, amp, offset])


def fit_lorentzian(
    sweep,
    values=None,
    max_iter: int = 200,
    rel_tol: float = 1e-8,
) -> LorentzFit:
    """Fit a Lorentzian plus constant offset by Levenberg-Marquardt.

    Accepts either a sweep record (frequency_hz / lockin_v attributes) or
    two plain arrays.  Raises NoPeakFound when the fitted amplitude does
    not clear twice the residual scatter or the fitted width collapses
    below the sample spacing (a noise spike, not a resonance), and
    NonConvergence when the damping loop fails to settle within max_iter
    iterations.
    """
    if values is None:
        x = np.asarray(sweep.frequency_hz, dtype=float)
        y = np.asarray(sweep.lockin_v, dtype=float)
    else:
        x = np.asarray(sweep, dtype=float)
        y = np.asarray(values, dtype=float)
    if x.size != y.size:
        raise ValueError("frequency and value arrays differ in length")
    if x.size < 5:
        raise ValueError("need at least five samples to fit four parameters")

    params = _initial_guess(x, y)
    if params[2] == 0.0:
        raise NoPeakFound("input data are exactly flat")

    model, jac = _lorentz_model_jac(params, x)
    resid = y - model
    rss = float(resid @ resid)
    lam = 1e-3
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        jtj = jac.T @ jac
        jtr = jac.T @ resid
        accepted = False
        for _ in range(50):
            damped = jtj + lam * np.diag(np.diag(jtj))
            try:
                step = np.linalg.solve(damped, jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = params + step
            trial_model, trial_jac = _lorentz_model_jac(trial, x)
            trial_resid = y - trial_model
            trial_rss = float(trial_resid @ trial_resid)
            if trial_rss <= rss:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        rel_step = np.max(np.abs(step) / (np.abs(params) + rel_tol))
        params, model, jac = trial, trial_model, trial_jac
        resid, rss = trial_resid, trial_rss
        lam = max(lam / 10.0, 1e-12)
        if rel_step < rel_tol:
            converged = True
            break

    center, width, amp, offset = params
    width = abs(width)
    dof = max(x.size - 4, 1)
    resid_rms = math.sqrt(rss / dof)
    if abs(amp) < 2.0 * resid_rms:
        raise NoPeakFound(
            f"fitted amplitude {amp:.3g} below twice the residual scatter "
            f"{resid_rms:.3g}"
        )
    spacing = float(np.median(np.diff(x)))
    if width < spacing:
        raise NoPeakFound(
            f"fitted width {width:.3g} Hz is below the sample spacing "
            f"{spacing:.3g} Hz"
        )
    if not converged:
        raise NonConvergence(f"no convergence after {n_iter} iterations")

    jtj = jac.T @ jac
    try:
        cov = resid_rms**2 * np.linalg.inv(jtj)
        sigma = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        sigma = np.full(4, math.nan)
    z95 = 1.959963984540054
    return LorentzFit(
        center_hz=float(center),
        fwhm_hz=float(width),
        amplitude=float(amp),
        offset=float(offset),
        center_ci_hz=(
            float(center - z95 * sigma[0]),
            float(center + z95 * sigma[0]),
        ),
        fwhm_ci_hz=(
            float(width - z95 * sigma[1]),
            float(width + z95 * sigma[1]),
        ),
        rss=rss,
        n_iter=n_iter,
    )


def odmr_contrast(
    fit: LorentzFit, dc_v: float, demod_gain: float = SQUARE_AM_GAIN
) -> float:
    """Physical dip contrast from a demodulated-sweep fit and DC level."""
    if dc_v <= 0:
        raise ZeroDC(f"dc_v must be positive, got {dc_v}")
    if demod_gain <= 0:
        raise ValueError("demod_gain must be positive")
    return abs(fit.amplitude) / (dc_v * demod_gain)


def shot_noise_sensitivity(
    fwhm_hz: float,
    contrast: float,
    rate_hz: float,
    g_factor: float = 2.0032,
    gradiometric: bool = False,
) -> float:
    """Photon shot-noise limited field sensitivity in T / sqrt(Hz).

    gradiometric=True applies the sqrt(3/2) penalty of splitting the
    photon budget across a two-channel difference measurement.
    """
    for name, value in (
        ("fwhm_hz", fwhm_hz),
        ("contrast", contrast),
        ("rate_hz", rate_hz),
    ):
        if value <= 0:
            raise NonPositiveInput(f"{name} must be positive, got {value}")
    gamma = gyromagnetic_ratio(g_factor)
    eta = SHOT_NOISE_PREFACTOR * fwhm_hz / (gamma * contrast * math.sqrt(rate_hz))
    if gradiometric:
        eta *= math.sqrt(1.5)
    return eta


@dataclass(frozen=True)
class SensitivityPoint:
    p_opt_w: float
    p_rf_w: float
    fwhm_hz: float
    contrast: float
    rate_hz: float
    eta_t_rthz: float


@dataclass
class SensitivityMap:
    points: list[SensitivityPoint] = field(default_factory=list)

    def best(self) -> SensitivityPoint:
        finite = [p for p in self.points if math.isfinite(p.eta_t_rthz)]
        if not finite:
            raise EmptyGrid("no finite sensitivity values in map")
        return min(finite, key=lambda p: (p.eta_t_rthz, p.p_opt_w, p.p_rf_w))


def build_sensitivity_map(
    model: BroadeningModel,
    pl_rate_per_w: float,
    p_opt_values,
    p_rf_values,
    g_factor: float = 2.0032,
    gradiometric: bool = False,
) -> SensitivityMap:
    """Closed-form sensitivity over a power grid (no signal simulation)."""
    p_opt = np.asarray(p_opt_values, dtype=float)
    p_rf = np.asarray(p_rf_values, dtype=float)
    if p_opt.size == 0 or p_rf.size == 0:
        raise EmptyGrid("power grid must have at least one point per axis")
    points = []
    for po in p_opt:
        for pr in p_rf:
            fwhm = saturated_fwhm(model, pr, po)
            contrast = saturated_contrast(model, pr, po)
            rate = pl_rate_per_w * po
            if contrast > 0 and rate > 0:
                eta = shot_noise_sensitivity(
                    fwhm, contrast, rate, g_factor, gradiometric
                )
            else:
                eta = math.nan
            points.append(
                SensitivityPoint(
                    p_opt_w=float(po),
                    p_rf_w=float(pr),
                    fwhm_hz=fwhm,
                    contrast=contrast,
                    rate_hz=rate,
                    eta_t_rthz=eta,
                )
            )
    return SensitivityMap(points=points)


@dataclass
class StepReport:
    """Per-step statistics of a tracked field staircase."""

    step_true_t: np.ndarray
    step_means_t: np.ndarray
    step_stds_t: np.ndarray
    residuals_t: np.ndarray
    pooled_std_t: float
    sensitivity_t_rthz: float
    settle_discard_s: float
    time_constant_s: float

    def to_dict(self) -> dict:
        return {
            "step_true_t": [float(v) for v in self.step_true_t],
            "step_means_t": [float(v) for v in self.step_means_t],
            "step_stds_t": [float(v) for v in self.step_stds_t],
            "residuals_t": [float(v) for v in self.residuals_t],
            "pooled_std_t": float(self.pooled_std_t),
            "sensitivity_t_rthz": float(self.sensitivity_t_rthz),
            "settle_discard_s": float(self.settle_discard_s),
            "time_constant_s": float(self.time_constant_s),
        }


def analyze_steps(
    estimate: TimeSeries,
    timeline: FieldTimeline,
    cfg: LockInConfig,
    settle_discard_s: float | None = None,
) -> StepReport:
    """Per-step mean/std of a field-estimate series against its timeline.

    Discards settle_discard_s (default, and minimum, 5 tau) after every
    step edge, pools the per-step standard deviations as an RMS and
    quotes sensitivity as pooled std times sqrt(time constant).  Raises
    ScheduleMismatch when any step has no samples left after the discard.
    """
    if settle_discard_s is None:
        settle_discard_s = 5.0 * cfg.time_constant_s
    if settle_discard_s < 5.0 * cfg.time_constant_s - 1e-12:
        raise ValueError("settle_discard_s must be at least 5 time constants")
    series = np.asarray(estimate.values, dtype=float)
    dt = estimate.dt_s
    n = series.size
    starts = timeline.starts_s
    ends = np.append(starts[1:], n * dt + estimate.t0_s)
    means, stds = [], []
    for start, end in zip(starts, ends):
        i0 = int(math.ceil((start + settle_discard_s - estimate.t0_s) / dt))
        i1 = int(math.floor((end - estimate.t0_s) / dt))
        i1 = min(i1, n)
        if i1 - i0 < 2:
            raise ScheduleMismatch(
                f"step at t = {start:.6g} s has {max(i1 - i0, 0)} samples "
                "after the settling discard"
            )
        window = series[i0:i1]
        means.append(float(np.mean(window)))
        stds.append(float(np.std(window, ddof=1)))
    means_arr = np.array(means)
    stds_arr = np.array(stds)
    pooled = float(np.sqrt(np.mean(stds_arr**2)))
    return StepReport(
        step_true_t=np.asarray(timeline.bz_t, dtype=float).copy(),
        step_means_t=means_arr,
        step_stds_t=stds_arr,
        residuals_t=means_arr - np.asarray(timeline.bz_t, dtype=float),
        pooled_std_t=pooled,
        sensitivity_t_rthz=pooled * math.sqrt(cfg.time_constant_s),
        settle_discard_s=float(settle_discard_s),
        time_constant_s=float(cfg.time_constant_s),
    )


def peak_ratio(
    energy_ev,
    intensity,
    window_a: tuple[float, float] = (1.349, 1.359),
    window_b: tuple[float, float] = (1.365, 1.375),
) -> float:
    """Peak-height ratio between two energy windows of an emission spectrum.

    Raises WindowOutOfRange when either window contains no samples.
    """
    energy = np.asarray(energy_ev, dtype=float)
    values = np.asarray(intensity, dtype=float)
    if energy.size != values.size:
        raise ValueError("energy and intensity arrays differ in length")
    heights = []
    for lo, hi in (window_a, window_b):
        if hi <= lo:
            raise ValueError("window bounds must satisfy lo < hi")
        mask = (energy >= lo) & (energy <= hi)
        if not mask.any():
            raise WindowOutOfRange(
                f"no samples in window [{lo}, {hi}] eV"
            )
        heights.append(float(np.max(values[mask])))
    if heights[1] <= 0:
        raise NonPositiveInput("reference window peak must be positive")
    return heights[0] / heights[1]
