"""Level structure, transition labels and strengths of the S=3/2 model."""

import numpy as np
import pytest

from odmrsim import (
    AxialFrequencies,
    ConvergenceFailure,
    FieldOutOfRange,
    FieldVector,
    SpinParams,
    axial_frequencies,
    build_hamiltonian,
    eigenlevels,
    gyromagnetic_ratio,
    level_crossing_field,
    spin_operators,
    transitions,
)

# g * (Bohr magneton / h), frozen from CODATA 13.996244917 GHz/T.
GAMMA_DEFAULT = 2.0032 * 13.996244917e9

ZFS = 70e6


def axial_scene(bz_t, params=None):
    params = params or SpinParams()
    levels = eigenlevels(build_hamiltonian(params, FieldVector(0.0, 0.0, bz_t)))
    return {ln.label: ln for ln in transitions(levels, params)}


def test_gyromagnetic_ratio_default_g():
    assert gyromagnetic_ratio() == pytest.approx(GAMMA_DEFAULT, rel=1e-8)


def test_gyromagnetic_ratio_scales_linearly_with_g():
    assert gyromagnetic_ratio(2.0) * 2.0032 / 2.0 == pytest.approx(
        gyromagnetic_ratio(2.0032), rel=1e-12
    )


def test_spin_operators_commutator_algebra():
    sx, sy, sz = spin_operators()
    np.testing.assert_allclose(
        sx @ sy - sy @ sx, 1j * sz, atol=1e-12
    )
    np.testing.assert_allclose(
        sz @ sx - sx @ sz, 1j * sy, atol=1e-12
    )
    # Casimir S(S+1) = 15/4 for S = 3/2.
    np.testing.assert_allclose(
        sx @ sx + sy @ sy + sz @ sz, 3.75 * np.eye(4), atol=1e-12
    )


def test_zero_field_levels_split_by_zfs():
    levels = eigenlevels(build_hamiltonian(SpinParams(), FieldVector(0, 0, 0)))
    np.testing.assert_allclose(
        np.sort(levels.energies_hz), [-35e6, -35e6, 35e6, 35e6], atol=1.0
    )


def test_zero_field_bright_lines_sit_at_zfs():
    # The dark pair is degenerate at zero field, so every line left in the
    # radio-frequency range must sit on the zero-field splitting.
    params = SpinParams()
    levels = eigenlevels(build_hamiltonian(params, FieldVector(0, 0, 0)))
    lines = transitions(levels, params)
    bright = [
        ln
        for ln in lines
        if ln.rel_strength > 1e-6 and ln.frequency_hz > 1e3
    ]
    assert bright
    for ln in bright:
        assert ln.frequency_hz == pytest.approx(ZFS, abs=1e3)


def test_axial_one_millitesla_branch_frequencies():
    # Closed forms: nu1 = zfs - gamma B, nu2 = zfs + gamma B, dark = gamma B.
    by_label = axial_scene(1e-3)
    gb = GAMMA_DEFAULT * 1e-3
    assert by_label["nu1"].frequency_hz == pytest.approx(ZFS - gb, abs=1e3)
    assert by_label["nu2"].frequency_hz == pytest.approx(ZFS + gb, abs=1e3)
    assert by_label["dark"].frequency_hz == pytest.approx(gb, abs=1e3)
    assert by_label["m2_minus"].frequency_hz == pytest.approx(
        abs(ZFS - 2 * gb), abs=1e3
    )
    assert by_label["m2_plus"].frequency_hz == pytest.approx(ZFS + 2 * gb, abs=1e3)


def test_axial_branch_slopes_against_field():
    b1, b2 = 0.4e-3, 0.9e-3
    lines1 = axial_scene(b1)
    lines2 = axial_scene(b2)
    db = b2 - b1
    slope = {
        label: (lines2[label].frequency_hz - lines1[label].frequency_hz) / db
        for label in ("nu1", "nu2", "dark")
    }
    assert slope["nu1"] == pytest.approx(-GAMMA_DEFAULT, rel=1e-6)
    assert slope["nu2"] == pytest.approx(+GAMMA_DEFAULT, rel=1e-6)
    assert slope["dark"] == pytest.approx(+GAMMA_DEFAULT, rel=1e-6)


def test_axial_frequencies_match_eigensolver_route():
    params = SpinParams()
    for bz in (0.1e-3, 0.7e-3, 2.5e-3):
        closed = axial_frequencies(params, bz)
        assert isinstance(closed, AxialFrequencies)
        by_label = axial_scene(bz, params)
        assert by_label["nu1"].frequency_hz == pytest.approx(
            closed.nu1_hz, rel=1e-9
        )
        assert by_label["nu2"].frequency_hz == pytest.approx(
            closed.nu2_hz, rel=1e-9
        )
        assert by_label["dark"].frequency_hz == pytest.approx(
            closed.dark_hz, rel=1e-9
        )


def test_level_crossing_field_value_and_degeneracy():
    params = SpinParams()
    crossing = level_crossing_field(params)
    assert crossing == pytest.approx(ZFS / (2 * GAMMA_DEFAULT), rel=1e-8)
    assert crossing == pytest.approx(1.2483e-3, rel=1e-4)
    levels = eigenlevels(
        build_hamiltonian(params, FieldVector(0.0, 0.0, crossing))
    )
    gaps = np.diff(np.sort(levels.energies_hz))
    assert gaps.min() == pytest.approx(0.0, abs=1.0)
    # At the crossing the two-quantum difference line reaches zero while
    # the single-quantum branches sit at half the zero-field splitting.
    by_label = axial_scene(crossing, params)
    assert by_label["m2_minus"].frequency_hz == pytest.approx(0.0, abs=1.0)
    assert by_label["nu1"].frequency_hz == pytest.approx(0.5 * ZFS, abs=1e3)


def test_level_crossing_moves_with_g_factor():
    params = SpinParams(g_factor=2.0)
    assert level_crossing_field(params) == pytest.approx(
        35e6 / (2.0 * 13.996244917e9), rel=1e-8
    )


def test_relative_strengths_at_axial_field():
    by_label = axial_scene(1e-3)
    assert by_label["nu1"].rel_strength == pytest.approx(1.0, abs=1e-9)
    assert by_label["nu2"].rel_strength == pytest.approx(1.0, abs=1e-9)
    assert by_label["dark"].rel_strength == pytest.approx(4.0 / 3.0, abs=1e-9)
    assert by_label["m2_minus"].rel_strength == pytest.approx(0.0, abs=1e-9)
    assert by_label["m2_plus"].rel_strength == pytest.approx(0.0, abs=1e-9)


def test_tilted_field_activates_double_quantum_lines():
    params = SpinParams()
    tilt = FieldVector(0.15e-3, 0.0, 1e-3)
    levels = eigenlevels(build_hamiltonian(params, tilt))
    by_label = {ln.label: ln for ln in transitions(levels, params)}
    assert by_label["m2_minus"].rel_strength > 1e-4
    assert by_label["m2_plus"].rel_strength > 1e-4
    # Single-quantum lines stay near unit strength for a small tilt.
    assert by_label["nu1"].rel_strength == pytest.approx(1.0, abs=0.1)
    assert by_label["nu2"].rel_strength == pytest.approx(1.0, abs=0.1)


def test_eigenvalue_invariants_for_random_fields():
    # trace(H) = 0 and sum(e^2) = zfs^2 + 5 gamma^2 |B|^2, both derived
    # directly from the operator definition.
    params = SpinParams()
    gamma = gyromagnetic_ratio(params.g_factor)
    rng = np.random.default_rng(42)
    for _ in range(25):
        b = rng.uniform(-2e-3, 2e-3, size=3)
        levels = eigenlevels(
            build_hamiltonian(params, FieldVector(b[0], b[1], b[2]))
        )
        e = levels.energies_hz
        assert np.sum(e) == pytest.approx(0.0, abs=1e-2)
        expected_sq = params.zfs_hz**2 + 5.0 * gamma**2 * float(b @ b)
        assert np.sum(e**2) == pytest.approx(expected_sq, rel=1e-10)


def test_transition_classes_filter():
    params = SpinParams()
    levels = eigenlevels(build_hamiltonian(params, FieldVector(0, 0, 1e-3)))
    only = transitions(levels, params, classes=("nu1", "dark"))
    assert sorted(ln.label for ln in only) == ["dark", "nu1"]


def test_hyperfine_satellites_flank_nu2():
    params = SpinParams()
    levels = eigenlevels(build_hamiltonian(params, FieldVector(0, 0, 1e-3)))
    lines = {
        ln.label: ln
        for ln in transitions(levels, params, include_hyperfine=True)
    }
    nu2 = lines["nu2"]
    plus = lines["nu2_sat_plus"]
    minus = lines["nu2_sat_minus"]
    assert plus.frequency_hz == pytest.approx(nu2.frequency_hz + 5e6, abs=1.0)
    assert minus.frequency_hz == pytest.approx(nu2.frequency_hz - 5e6, abs=1.0)
    assert plus.rel_strength == pytest.approx(0.05 * nu2.rel_strength, rel=1e-9)
    assert minus.rel_strength == pytest.approx(0.05 * nu2.rel_strength, rel=1e-9)


def test_transitions_sorted_by_frequency():
    params = SpinParams()
    levels = eigenlevels(build_hamiltonian(params, FieldVector(0.1e-3, 0, 1e-3)))
    lines = transitions(levels, params, include_hyperfine=True)
    freqs = [ln.frequency_hz for ln in lines]
    assert freqs == sorted(freqs)


def test_field_vector_magnitude_limit():
    with pytest.raises(FieldOutOfRange):
        FieldVector(0.0, 0.0, 0.11)
    with pytest.raises(FieldOutOfRange):
        FieldVector(0.08, 0.08, 0.0)
    ok = FieldVector(0.0, 0.0, 0.1)
    assert ok.magnitude_t() == pytest.approx(0.1)


def test_spin_params_validation():
    with pytest.raises(ValueError):
        SpinParams(zfs_hz=0.0)
    with pytest.raises(ValueError):
        SpinParams(g_factor=1.5)
    with pytest.raises(ValueError):
        SpinParams(hyperfine_rel_amp=1.5)


def test_eigenlevels_rejects_bad_input():
    with pytest.raises(ValueError):
        eigenlevels(np.eye(3))
    h = build_hamiltonian(SpinParams(), FieldVector(0, 0, 1e-3))
    h = h.copy()
    h[0, 1] = 1e9
    with pytest.raises(ValueError):
        eigenlevels(h)


def test_eigenlevels_residual_guard(monkeypatch):
    import odmrsim.spin_model as sm

    def fake_eigh(_):
        return np.zeros(4), np.eye(4)

    monkeypatch.setattr(sm.np.linalg, "eigh", fake_eigh)
    with pytest.raises(ConvergenceFailure):
        sm.eigenlevels(sm.build_hamiltonian(SpinParams(), FieldVector(0, 0, 1e-3)))
