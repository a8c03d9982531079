"""End-to-end checks of the command line interface (in-process)."""

import json

import numpy as np
import pytest

from odmrsim import (
    SweepRecord,
    load_map_csv,
    load_sweep,
    verify_manifest,
    write_sweep,
)
from odmrsim.cli import main

MINI_MAP_CONFIG = {
    "detector": {"shot_noise": False},
    "lockin": {
        "mode": "am",
        "mod_freq_hz": 5000.0,
        "time_constant_s": 0.005,
        "sample_rate_hz": 50000.0,
    },
    "sweep": {
        "f_start_hz": 95.5e6,
        "f_stop_hz": 100.5e6,
        "n_points": 21,
        "dwell_s": 0.025,
        "grid": {
            "p_opt_min_w": 0.1,
            "p_opt_max_w": 0.4,
            "n_opt": 3,
            "p_rf_min_w": 0.5,
            "p_rf_max_w": 1.5,
            "n_rf": 3,
        },
    },
}

MINI_STEPS_CONFIG = {
    "lockin": {
        "mode": "fm",
        "mod_freq_hz": 50.0,
        "time_constant_s": 0.5,
        "sample_rate_hz": 500.0,
        "fm_deviation_hz": 1e5,
    },
    "schedule": {
        "step_t": 2e-7,
        "step_period_s": 10.0,
        "n_steps": 2,
        "settle_discard_s": 2.5,
        "field_noise_step_sigma_t": 0.0,
        "output_decimation": 10,
    },
}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_spectrum_outputs_and_manifest(tmp_path):
    out = tmp_path / "run"
    code = main(["spectrum", "--out", str(out), "--svg"])
    assert code == 0
    assert (out / "transitions.csv").exists()
    assert (out / "spectrum.csv").exists()
    assert (out / "spectrum.svg").exists()
    checks = verify_manifest(out / "manifest.json")
    assert checks and all(checks.values())
    header = (out / "transitions.csv").read_text().splitlines()[0]
    assert header == "bz_t,label,lower_m,upper_m,frequency_hz,rel_strength"


def test_spectrum_no_hyperfine_changes_output(tmp_path):
    a = tmp_path / "with"
    b = tmp_path / "without"
    assert main(["spectrum", "--out", str(a)]) == 0
    assert main(["spectrum", "--out", str(b), "--no-hyperfine"]) == 0
    assert (a / "spectrum.csv").read_text() != (b / "spectrum.csv").read_text()
    # The transition table never includes satellites, so it is unchanged.
    assert (
        a / "transitions.csv"
    ).read_text() == (b / "transitions.csv").read_text()


def test_fit_command_on_synthetic_sweep(tmp_path):
    freq = np.linspace(95e6, 101e6, 201)
    half_sq = (0.5e6) ** 2
    lockin = 4e-4 * half_sq / ((freq - 98e6) ** 2 + half_sq)
    record = SweepRecord(
        frequency_hz=freq,
        lockin_v=lockin,
        dc_v=np.full(freq.size, 0.0635),
    )
    sweep_path = tmp_path / "sweep.csv"
    write_sweep(record, sweep_path)
    out = tmp_path / "fitrun"
    assert main(["fit", str(sweep_path), "--out", str(out), "--svg"]) == 0
    assert (out / "fit.svg").exists()
    payload = json.loads((out / "fit.json").read_text())
    assert payload["center_hz"] == pytest.approx(98e6, rel=1e-6)
    assert payload["fwhm_hz"] == pytest.approx(1e6, rel=1e-4)
    assert payload["contrast"] == pytest.approx(
        4e-4 / (0.0635 * 2 / np.pi), rel=1e-4
    )
    assert all(verify_manifest(out / "manifest.json").values())


def test_fit_flat_data_is_domain_error(tmp_path, capsys):
    freq = np.linspace(95e6, 101e6, 101)
    record = SweepRecord(
        frequency_hz=freq,
        lockin_v=np.full(101, 1e-5),
        dc_v=np.full(101, 0.06),
    )
    sweep_path = tmp_path / "flat.csv"
    write_sweep(record, sweep_path)
    assert main(["fit", str(sweep_path), "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_fit_malformed_csv_is_format_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,header\n1,2\n")
    assert main(["fit", str(bad), "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_config_json_is_format_error(tmp_path, capsys):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{oops")
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 2
    capsys.readouterr()


def test_unknown_config_key_is_format_error(tmp_path):
    cfg = write_config(tmp_path, {"spin": {"zfs_mhz": 70.0}})
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_map_requires_grid_and_am_mode(tmp_path):
    no_grid = dict(MINI_MAP_CONFIG)
    no_grid["sweep"] = {
        k: v for k, v in MINI_MAP_CONFIG["sweep"].items() if k != "grid"
    }
    cfg = write_config(tmp_path, no_grid, "no_grid.json")
    assert main(["map", "--config", cfg, "--out", str(tmp_path / "m")]) == 2

    fm_cfg = json.loads(json.dumps(MINI_MAP_CONFIG))
    fm_cfg["lockin"]["mode"] = "fm"
    fm_cfg["lockin"]["fm_deviation_hz"] = 1e5
    cfg2 = write_config(tmp_path, fm_cfg, "fm.json")
    assert main(["map", "--config", cfg2, "--out", str(tmp_path / "m2")]) == 2


def test_map_mini_grid_outputs(tmp_path):
    cfg = write_config(tmp_path, MINI_MAP_CONFIG)
    out = tmp_path / "maprun"
    assert main(["map", "--config", cfg, "--out", str(out), "--svg"]) == 0
    rows = load_map_csv(out / "map.csv")
    assert len(rows) == 9
    payload = json.loads((out / "argmin.json").read_text())
    assert payload["n_cells"] == 9
    assert payload["n_failed"] == 0
    sim = payload["simulated"]
    ana = payload["analytic"]
    assert (sim["p_opt_w"], sim["p_rf_w"]) == (ana["p_opt_w"], ana["p_rf_w"])
    assert sim["eta_t_rthz"] == pytest.approx(ana["eta_t_rthz"], rel=0.05)
    assert (out / "map.svg").exists()
    assert all(verify_manifest(out / "manifest.json").values())


def test_steps_command_tracks_and_reports(tmp_path):
    cfg = write_config(tmp_path, MINI_STEPS_CONFIG)
    out = tmp_path / "stepsrun"
    assert main(["steps", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads((out / "steps.json").read_text())
    assert len(payload["step_means_t"]) == 2
    assert payload["sensitivity_t_rthz"] > 0
    assert payload["carrier_hz"] == pytest.approx(98.0373e6, abs=1e3)
    lines = (out / "tracking.csv").read_text().splitlines()
    assert lines[0] == "t_s,bz_true_t,bz_est_t,lockin_v"
    # 10 s at 500 Hz per step, two steps, decimated by ten.
    assert len(lines) - 1 == 1000
    assert all(verify_manifest(out / "manifest.json").values())


def test_steps_rejects_am_config(tmp_path):
    cfg = write_config(tmp_path, MINI_MAP_CONFIG)
    assert main(["steps", "--config", cfg, "--out", str(tmp_path / "s")]) == 2


def test_usage_errors_and_version(capsys):
    assert main([]) == 2
    assert main(["unknown-command"]) == 2
    assert main(["--version"]) == 0
    out = capsys.readouterr().out
    assert "0.1.0" in out


def test_seed_changes_noisy_output(tmp_path):
    noisy = json.loads(json.dumps(MINI_STEPS_CONFIG))
    cfg = write_config(tmp_path, noisy)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    out_c = tmp_path / "c"
    assert main(["steps", "--config", cfg, "--out", str(out_a), "--seed", "1"]) == 0
    assert main(["steps", "--config", cfg, "--out", str(out_b), "--seed", "1"]) == 0
    assert main(["steps", "--config", cfg, "--out", str(out_c), "--seed", "2"]) == 0
    track_a = (out_a / "tracking.csv").read_bytes()
    assert track_a == (out_b / "tracking.csv").read_bytes()
    assert track_a != (out_c / "tracking.csv").read_bytes()
