"""Command line front end.

Subcommands
-----------
spectrum  Noise-free transition table and synthesized ODMR spectrum.
fit       Lorentzian fit of a recorded sweep CSV.
map       Simulated sensitivity map over an optical/RF power grid.
steps     FM tracking of a stepped axial field, with step statistics.

Every command writes its outputs plus a manifest.json holding the fully
defaulted configuration, the seed and SHA-256 digests of each output.
Exit codes: 0 success, 1 domain error (bad data, no peak, out of range),
2 usage, config or file format error.

ODMR_THREADS caps the worker threads of the map command; results are
reduced by grid index, so the thread count never changes the output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    SensitivityPoint,
    analyze_steps,
    build_sensitivity_map,
    fit_lorentzian,
    odmr_contrast,
    shot_noise_sensitivity,
)
from .errors import FormatError, NonConvergence, NoPeakFound, OdmrError
from .errors import SchemaViolation
from .io_formats import (
    ConfigDoc,
    FORMAT_VERSION,
    format_float,
    load_config,
    load_sweep,
    write_json_record,
    write_map_csv,
    write_run_manifest,
    _write_text,
)
from .lineshape import BroadeningModel, synthesize_odmr
from .signal_chain import (
    DetectorModel,
    FieldTimeline,
    LockInConfig,
    Scene,
    SweepPlan,
    photon_rate_from_voltage,
    simulate_am_sweep,
    simulate_fm_tracking,
)
from .spin_model import FieldVector, SpinParams, transitions, eigenlevels
from .spin_model import build_hamiltonian
from .svgplot import heatmap, line_plot

TRANSITIONS_HEADER = "bz_t,label,lower_m,upper_m,frequency_hz,rel_strength"


def _spin_from_cfg(cfg: ConfigDoc) -> SpinParams:
    return SpinParams(
        zfs_hz=cfg.spin["zfs_hz"],
        g_factor=cfg.spin["g_factor"],
        hyperfine_offset_hz=cfg.spin["hyperfine_offset_hz"],
        hyperfine_rel_amp=cfg.spin["hyperfine_rel_amp"],
    )


def _field_from_cfg(cfg: ConfigDoc) -> FieldVector:
    return FieldVector(
        bx_t=cfg.field["bx_t"], by_t=cfg.field["by_t"], bz_t=cfg.field["bz_t"]
    )


def _broadening_from_cfg(cfg: ConfigDoc) -> BroadeningModel:
    return BroadeningModel(
        fwhm0_hz=cfg.lineshape["fwhm0_hz"],
        rf_sat_w=cfg.lineshape["rf_sat_w"],
        contrast_max=cfg.lineshape["contrast_max"],
        opt_sat_w=cfg.lineshape["opt_sat_w"],
        rf_contrast_sat_w=cfg.lineshape["rf_contrast_sat_w"],
    )


def _detector_from_cfg(cfg: ConfigDoc) -> DetectorModel:
    return DetectorModel(
        responsivity_a_per_w=cfg.detector["responsivity_a_per_w"],
        transimpedance_v_per_a=cfg.detector["transimpedance_v_per_a"],
        effective_wavelength_m=cfg.detector["effective_wavelength_m"],
        collection_note=cfg.detector["collection_note"],
    )


def _lockin_from_cfg(cfg: ConfigDoc) -> LockInConfig:
    return LockInConfig(
        mode=cfg.lockin["mode"],
        mod_freq_hz=cfg.lockin["mod_freq_hz"],
        time_constant_s=cfg.lockin["time_constant_s"],
        sample_rate_hz=cfg.lockin["sample_rate_hz"],
        fm_deviation_hz=cfg.lockin["fm_deviation_hz"],
        filter_order=cfg.lockin["filter_order"],
        phase_rad=cfg.lockin["phase_rad"],
    )


def _scene_from_cfg(
    cfg: ConfigDoc,
    hyperfine: bool,
    p_opt_w: float | None = None,
    p_rf_w: float | None = None,
) -> Scene:
    return Scene(
        spin=_spin_from_cfg(cfg),
        field=_field_from_cfg(cfg),
        broadening=_broadening_from_cfg(cfg),
        detector=_detector_from_cfg(cfg),
        pl_rate_per_w=cfg.lineshape["pl_rate_per_w"],
        p_opt_w=cfg.sweep["p_opt_w"] if p_opt_w is None else p_opt_w,
        p_rf_w=cfg.sweep["p_rf_w"] if p_rf_w is None else p_rf_w,
        hyperfine=hyperfine,
    )


def _hyperfine_enabled(cfg: ConfigDoc, args) -> bool:
    return cfg.spin["hyperfine"] and not getattr(args, "no_hyperfine", False)


def _prepare_out(args) -> Path:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def cmd_spectrum(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    hyperfine = _hyperfine_enabled(cfg, args)
    scene = _scene_from_cfg(cfg, hyperfine)
    out_dir = _prepare_out(args)

    spin = scene.spin
    rows = [TRANSITIONS_HEADER]
    bz_values = np.linspace(
        cfg.sweep["bz_start_t"], cfg.sweep["bz_stop_t"], cfg.sweep["n_fields"]
    )
    for bz in bz_values:
        levels = eigenlevels(
            build_hamiltonian(
                spin, FieldVector(cfg.field["bx_t"], cfg.field["by_t"], bz)
            )
        )
        for ln in transitions(levels, spin, include_hyperfine=False):
            rows.append(
                ",".join(
                    (
                        format_float(bz),
                        ln.label,
                        format_float(ln.lower_m),
                        format_float(ln.upper_m),
                        format_float(ln.frequency_hz),
                        format_float(ln.rel_strength),
                    )
                )
            )
    transitions_path = _write_text(
        out_dir / "transitions.csv", "\n".join(rows) + "\n"
    )

    freqs = np.linspace(
        cfg.sweep["f_start_hz"], cfg.sweep["f_stop_hz"], cfg.sweep["n_points"]
    )
    spectrum = synthesize_odmr(
        scene.lines(),
        scene.broadening,
        scene.p_rf_w,
        scene.p_opt_w,
        freqs,
        hyperfine=hyperfine,
    )
    spec_rows = ["frequency_hz,contrast"]
    for f, v in zip(spectrum.frequency_hz, spectrum.values):
        spec_rows.append(f"{format_float(f)},{format_float(v)}")
    spectrum_path = _write_text(
        out_dir / "spectrum.csv", "\n".join(spec_rows) + "\n"
    )

    outputs = [transitions_path, spectrum_path]
    if args.svg:
        svg_path = out_dir / "spectrum.svg"
        line_plot(
            spectrum.frequency_hz / 1e6,
            spectrum.values,
            svg_path,
            title="ODMR spectrum",
            x_label="frequency (MHz)",
            y_label="contrast",
        )
        outputs.append(svg_path)

    write_run_manifest(
        out_dir,
        command="spectrum",
        config=cfg.as_dict(),
        seed=args.seed,
        output_paths=outputs,
        duration_s=time.perf_counter() - t0,
    )
    print(
        f"spectrum: {len(rows) - 1} transition rows, "
        f"{spectrum.frequency_hz.size} samples -> {out_dir}"
    )
    return 0


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    record = load_sweep(args.sweep_csv)
    out_dir = _prepare_out(args)

    fit = fit_lorentzian(record)
    dc = float(np.nanmedian(record.dc_v)) if record.dc_v.size else math.nan
    contrast = None
    if math.isfinite(dc) and dc > 0:
        contrast = odmr_contrast(fit, dc)

    payload = {
        "format_version": FORMAT_VERSION,
        "source": Path(args.sweep_csv).name,
        "center_hz": fit.center_hz,
        "center_ci_hz": list(fit.center_ci_hz),
        "fwhm_hz": fit.fwhm_hz,
        "fwhm_ci_hz": list(fit.fwhm_ci_hz),
        "amplitude_v": fit.amplitude,
        "offset_v": fit.offset,
        "rss": fit.rss,
        "n_iter": fit.n_iter,
        "dc_v": dc if math.isfinite(dc) else None,
        "contrast": contrast,
    }
    fit_path = write_json_record(payload, out_dir / "fit.json")
    outputs = [fit_path]
    if args.svg:
        svg_path = out_dir / "fit.svg"
        line_plot(
            record.frequency_hz / 1e6,
            fit.evaluate(record.frequency_hz),
            svg_path,
            title=(
                f"lorentzian fit: center {fit.center_hz / 1e6:.4f} MHz, "
                f"fwhm {fit.fwhm_hz / 1e3:.1f} kHz"
            ),
            x_label="frequency (MHz)",
            y_label="lock-in (V)",
        )
        outputs.append(svg_path)
    write_run_manifest(
        out_dir,
        command="fit",
        config=cfg.as_dict(),
        seed=args.seed,
        output_paths=outputs,
        duration_s=time.perf_counter() - t0,
    )
    contrast_txt = "n/a" if contrast is None else f"{contrast:.4g}"
    print(
        f"fit: center {fit.center_hz / 1e6:.4f} MHz, "
        f"fwhm {fit.fwhm_hz / 1e3:.2f} kHz, contrast {contrast_txt}"
    )
    return 0


def _map_cell(
    cfg: ConfigDoc,
    hyperfine: bool,
    plan: SweepPlan,
    lock_cfg: LockInConfig,
    p_opt: float,
    p_rf: float,
    seed,
    shot_noise: bool,
) -> SensitivityPoint:
    scene = _scene_from_cfg(cfg, hyperfine, p_opt_w=p_opt, p_rf_w=p_rf)
    record = simulate_am_sweep(
        scene, plan, lock_cfg, seed=seed, shot_noise=shot_noise
    )
    try:
        fit = fit_lorentzian(record)
        dc = float(np.nanmedian(record.dc_v))
        contrast = odmr_contrast(fit, dc)
        rate = photon_rate_from_voltage(dc, scene.detector)
        eta = shot_noise_sensitivity(
            fit.fwhm_hz, contrast, rate, g_factor=cfg.spin["g_factor"]
        )
        return SensitivityPoint(
            p_opt_w=p_opt,
            p_rf_w=p_rf,
            fwhm_hz=fit.fwhm_hz,
            contrast=contrast,
            rate_hz=rate,
            eta_t_rthz=eta,
        )
    except (NoPeakFound, NonConvergence):
        return SensitivityPoint(
            p_opt_w=p_opt,
            p_rf_w=p_rf,
            fwhm_hz=math.nan,
            contrast=math.nan,
            rate_hz=math.nan,
            eta_t_rthz=math.nan,
        )


def _thread_count() -> int:
    raw = os.environ.get("ODMR_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _point_payload(point) -> dict:
    return {
        "p_opt_w": point.p_opt_w,
        "p_rf_w": point.p_rf_w,
        "fwhm_hz": point.fwhm_hz,
        "contrast": point.contrast,
        "rate_hz": point.rate_hz,
        "eta_t_rthz": point.eta_t_rthz,
    }


def cmd_map(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    grid = cfg.grid()
    if grid is None:
        raise SchemaViolation("sweep.grid: required by the map command")
    if cfg.lockin["mode"] != "am":
        raise SchemaViolation("lockin.mode: map command needs 'am'")
    hyperfine = _hyperfine_enabled(cfg, args)
    lock_cfg = _lockin_from_cfg(cfg)
    plan = SweepPlan(
        f_start_hz=cfg.sweep["f_start_hz"],
        f_stop_hz=cfg.sweep["f_stop_hz"],
        n_points=cfg.sweep["n_points"],
        dwell_s=cfg.sweep["dwell_s"],
    )
    shot = cfg.detector["shot_noise"]
    p_opts = grid.p_opt_values()
    p_rfs = grid.p_rf_values()
    out_dir = _prepare_out(args)

    cells = [
        (i, j, float(po), float(pr))
        for i, po in enumerate(p_opts)
        for j, pr in enumerate(p_rfs)
    ]

    def run_cell(cell):
        i, j, po, pr = cell
        seed = np.random.SeedSequence((args.seed, i, j))
        return _map_cell(cfg, hyperfine, plan, lock_cfg, po, pr, seed, shot)

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        points = list(pool.map(run_cell, cells))

    map_path = write_map_csv(points, out_dir / "map.csv")

    finite = [p for p in points if math.isfinite(p.eta_t_rthz)]
    if not finite:
        raise NoPeakFound("no map cell produced a fittable resonance")
    best = min(finite, key=lambda p: (p.eta_t_rthz, p.p_opt_w, p.p_rf_w))

    analytic = build_sensitivity_map(
        _broadening_from_cfg(cfg),
        cfg.lineshape["pl_rate_per_w"],
        p_opts,
        p_rfs,
        g_factor=cfg.spin["g_factor"],
    )
    payload = {
        "format_version": FORMAT_VERSION,
        "simulated": _point_payload(best),
        "analytic": _point_payload(analytic.best()),
        "n_cells": len(points),
        "n_failed": len(points) - len(finite),
    }
    argmin_path = write_json_record(payload, out_dir / "argmin.json")

    outputs = [map_path, argmin_path]
    if args.svg:
        z = np.full((p_rfs.size, p_opts.size), math.nan)
        for idx, (i, j, _, _) in enumerate(cells):
            z[j, i] = points[idx].eta_t_rthz
        svg_path = out_dir / "map.svg"
        heatmap(
            p_opts,
            p_rfs,
            z,
            svg_path,
            title="sensitivity (T per sqrt Hz)",
            x_label="optical power (W)",
            y_label="RF power (W)",
        )
        outputs.append(svg_path)

    write_run_manifest(
        out_dir,
        command="map",
        config=cfg.as_dict(),
        seed=args.seed,
        output_paths=outputs,
        duration_s=time.perf_counter() - t0,
    )
    print(
        f"map: {p_opts.size}x{p_rfs.size} cells, best "
        f"{best.eta_t_rthz * 1e9:.3f} nT/sqrt(Hz) at "
        f"p_opt {best.p_opt_w:.3g} W, p_rf {best.p_rf_w:.3g} W"
    )
    return 0


def cmd_steps(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    if cfg.lockin["mode"] != "fm":
        raise SchemaViolation("lockin.mode: steps command needs 'fm'")
    hyperfine = _hyperfine_enabled(cfg, args)
    scene = _scene_from_cfg(cfg, hyperfine)
    lock_cfg = _lockin_from_cfg(cfg)
    sched = cfg.schedule
    timeline = FieldTimeline.staircase(
        bias_t=cfg.field["bz_t"],
        step_t=sched["step_t"],
        period_s=sched["step_period_s"],
        n_steps=sched["n_steps"],
    )
    duration = sched["step_period_s"] * sched["n_steps"]
    out_dir = _prepare_out(args)

    result = simulate_fm_tracking(
        timeline,
        scene,
        lock_cfg,
        duration,
        seed=args.seed,
        shot_noise=cfg.detector["shot_noise"],
        field_noise_step_sigma_t=sched["field_noise_step_sigma_t"],
    )
    discard = sched["settle_discard_s"]
    report = analyze_steps(
        result.field_estimate,
        timeline,
        lock_cfg,
        settle_discard_s=discard if discard > 0 else None,
    )

    decim = sched["output_decimation"]
    t = result.field_estimate.times()[::decim]
    est = result.field_estimate.values[::decim]
    lockin = result.lockin.values[::decim]
    true = timeline.value_at(t)
    rows = ["t_s,bz_true_t,bz_est_t,lockin_v"]
    for ti, bt, be, lv in zip(t, true, est, lockin):
        rows.append(
            f"{format_float(ti)},{format_float(bt)},"
            f"{format_float(be)},{format_float(lv)}"
        )
    tracking_path = _write_text(
        out_dir / "tracking.csv", "\n".join(rows) + "\n"
    )

    payload = {"format_version": FORMAT_VERSION}
    payload.update(report.to_dict())
    payload.update(
        {
            "carrier_hz": result.carrier_hz,
            "slope_v_per_hz": result.slope_v_per_hz,
            "gamma_eff_hz_per_t": result.gamma_eff_hz_per_t,
            "field_noise_sigma_in_t": result.field_noise_sigma_in_t,
        }
    )
    steps_path = write_json_record(payload, out_dir / "steps.json")

    outputs = [tracking_path, steps_path]
    if args.svg:
        svg_path = out_dir / "tracking.svg"
        line_plot(
            t,
            est * 1e6,
            svg_path,
            title="tracked field",
            x_label="time (s)",
            y_label="field (uT)",
        )
        outputs.append(svg_path)

    write_run_manifest(
        out_dir,
        command="steps",
        config=cfg.as_dict(),
        seed=args.seed,
        output_paths=outputs,
        duration_s=time.perf_counter() - t0,
    )
    print(
        f"steps: pooled std {report.pooled_std_t * 1e9:.2f} nT, "
        f"sensitivity {report.sensitivity_t_rthz * 1e9:.2f} nT/sqrt(Hz)"
    )
    return 0


def _add_common(sub, with_hyperfine: bool = True) -> None:
    sub.add_argument(
        "--config", default=None, help="JSON configuration file (defaults apply)"
    )
    sub.add_argument("--seed", type=int, default=0, help="random seed")
    sub.add_argument(
        "--out", default=".", help="output directory (created if missing)"
    )
    sub.add_argument(
        "--svg", action="store_true", help="also write an SVG plot"
    )
    if with_hyperfine:
        sub.add_argument(
            "--no-hyperfine",
            action="store_true",
            help="drop hyperfine satellites regardless of the config",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odmr",
        description="CW ODMR magnetometry simulator for S=3/2 defects",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_spectrum = sub.add_parser(
        "spectrum",
        help="transition table and noise-free spectrum",
        description=(
            "Write transitions.csv (line positions against axial field) and "
            "spectrum.csv (synthesized contrast spectrum at the configured "
            "field and powers)."
        ),
    )
    _add_common(p_spectrum)
    p_spectrum.set_defaults(func=cmd_spectrum)

    p_fit = sub.add_parser(
        "fit",
        help="Lorentzian fit of a sweep CSV",
        description=(
            "Fit a Lorentzian plus offset to a sweep CSV (columns "
            "frequency_hz,lockin_v,dc_v) and write fit.json."
        ),
    )
    p_fit.add_argument("sweep_csv", help="sweep CSV file to fit")
    _add_common(p_fit, with_hyperfine=False)
    p_fit.set_defaults(func=cmd_fit)

    p_map = sub.add_parser(
        "map",
        help="sensitivity map over a power grid",
        description=(
            "Run one simulated AM sweep per grid cell (sweep.grid in the "
            "config), fit each, and write map.csv plus argmin.json with the "
            "best simulated and analytic cells."
        ),
    )
    _add_common(p_map)
    p_map.set_defaults(func=cmd_map)

    p_steps = sub.add_parser(
        "steps",
        help="FM tracking of a stepped field",
        description=(
            "Track a field staircase (schedule section) with the FM "
            "discriminator and write tracking.csv plus steps.json with "
            "per-step statistics."
        ),
    )
    _add_common(p_steps)
    p_steps.set_defaults(func=cmd_steps)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OdmrError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
