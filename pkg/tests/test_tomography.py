import dataclasses
import time

import numpy as np
import pytest
from hypothesis import assume, example, given, strategies as st

from pulsepqc.cr import CRCoefficients, default_coefficients
from pulsepqc.tomography import (GridTooCoarseError, TomographySeries, bloch_trajectory,
                                 default_durations, fit_cr_coefficients, fit_zi, full_fit,
                                 read_series_csv, simulate_ht, simulate_ramsey_zi,
                                 write_series_csv)

SIX = ("f_zx", "f_zy", "f_zz", "f_ix", "f_iy", "f_iz")
GRID = default_durations()


def within(fit, truth, rel, abs_):
    return all(abs(getattr(fit, k) - getattr(truth, k)) <= max(rel * abs(getattr(truth, k)), abs_)
               for k in SIX)


def series_map(series):
    return {(s.control_state, s.basis): s.values for s in series}


def test_default_grid():
    assert GRID.size == 64 and GRID[0] == 0 and GRID[-1] == 1200


def test_zero_coefficients_static():
    m = series_map(simulate_ht(CRCoefficients(), GRID))
    for p in (0, 1):
        np.testing.assert_allclose(m[(p, "Z")], 1.0)
        np.testing.assert_allclose(m[(p, "X")], 0.0, atol=1e-15)
        np.testing.assert_allclose(m[(p, "Y")], 0.0, atol=1e-15)


def test_pure_zx_control0_precession():
    m = series_map(simulate_ht(CRCoefficients(f_zx=1.0), GRID))
    phase = 2 * np.pi * GRID * 1e-3
    np.testing.assert_allclose(m[(0, "Z")], np.cos(phase), atol=1e-12)
    np.testing.assert_allclose(m[(0, "Y")], -np.sin(phase), atol=1e-12)
    np.testing.assert_allclose(m[(0, "X")], 0.0, atol=1e-12)


def test_table_iii_controls_differ():
    m = series_map(simulate_ht(default_coefficients(), GRID))
    assert np.max(np.abs(m[(0, "Y")] - m[(1, "Y")])) > 0.5


def test_bloch_zero_field():
    np.testing.assert_array_equal(bloch_trajectory([0, 0, 0], GRID), np.tile([0, 0, 1.0], (64, 1)))


def test_bloch_quarter_turn():
    np.testing.assert_allclose(bloch_trajectory([1.0, 0, 0], 250.0), [0, -1, 0], atol=1e-12)


@given(st.lists(st.floats(-2, 2), min_size=7, max_size=7))
def test_bloch_matches_simulator(vals):
    c = CRCoefficients(*vals)
    m = series_map(simulate_ht(c, GRID))
    for p in (0, 1):
        traj = bloch_trajectory(c.target_field(p), GRID)
        for i, b in enumerate("XYZ"):
            np.testing.assert_allclose(traj[:, i], m[(p, b)], atol=1e-8)


def test_series_validation():
    with pytest.raises(ValueError):
        TomographySeries(np.arange(3.0), 0, "Z", np.array([0.0, 1.5, 0.0]))
    with pytest.raises(ValueError):
        TomographySeries(np.arange(3.0), 0, "Z", np.zeros(4))
    # sampled values may overshoot by 3/sqrt(shots)
    TomographySeries(np.arange(3.0), 0, "Z", np.array([1.05, 0, 0]), shots=1024)


def test_empty_grid():
    with pytest.raises(ValueError):
        simulate_ht(default_coefficients(), [])


def test_round_trip_exact_table_iii():
    truth = default_coefficients()
    res = fit_cr_coefficients(simulate_ht(truth, GRID))
    assert res.converged
    assert res.residual_rms < 1e-6
    assert within(res.coefficients, truth, 0.01, 0.005)
    assert res.coefficients.f_zi == 0.0


def test_round_trip_shots():
    truth = default_coefficients()
    res = fit_cr_coefficients(simulate_ht(truth, GRID, shots=1024, seed=3))
    assert res.converged
    assert within(res.coefficients, truth, 0.10, 0.02)


def test_only_zx_gives_zero_rest():
    res = fit_cr_coefficients(simulate_ht(CRCoefficients(f_zx=0.69645487), GRID))
    for k in ("f_zy", "f_zz", "f_ix", "f_iy", "f_iz"):
        assert abs(getattr(res.coefficients, k)) < 1e-6
    assert res.coefficients.f_zx == pytest.approx(0.69645487, rel=1e-9)


def test_below_sensitivity_flag():
    res = fit_cr_coefficients(simulate_ht(CRCoefficients(), GRID))
    assert res.converged
    assert res.below_sensitivity == (True, True)
    assert all(getattr(res.coefficients, k) == 0 for k in SIX)


def test_f_zi_not_identifiable_from_ht():
    fits = [fit_cr_coefficients(simulate_ht(dataclasses.replace(default_coefficients(), f_zi=f),
                                            GRID)).coefficients for f in (0.0, 5.0, 15.0)]
    for other in fits[1:]:
        for k in SIX:
            assert abs(getattr(other, k) - getattr(fits[0], k)) < 1e-8


def test_round_trip_fifty_random_draws():
    rng = np.random.default_rng(2024)
    grid = default_durations(128, 1200.0)
    for _ in range(50):
        truth = CRCoefficients(rng.uniform(0, 20), *rng.uniform(-2, 2, size=6))
        res = full_fit(simulate_ht(truth, grid), simulate_ramsey_zi(truth, grid))
        assert res.residual_rms < 1e-6
        assert within(res.coefficients, truth, 0.01, 1e-6)
        assert res.coefficients.f_zi == pytest.approx(truth.f_zi, rel=0.01)


@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
@example([0.0, 0.0, 1.0, 0.0, 1.0, 2.0])  # z-heavy field tilted in the y-z plane
def test_round_trip_property(vals):
    truth = CRCoefficients(0.0, *vals)
    for p in (0, 1):
        assume(np.linalg.norm(truth.target_field(p)[:2]) > 0.05)
    res = fit_cr_coefficients(simulate_ht(truth, default_durations(128, 1200.0)))
    assert res.residual_rms < 1e-6
    assert within(res.coefficients, truth, 0.01, 1e-6)


def test_coarse_grid_refused():
    with pytest.raises(GridTooCoarseError, match="at least 8"):
        fit_cr_coefficients(simulate_ht(default_coefficients(), default_durations(4, 1200.0)))


def test_fast_field_refused():
    # 5 MHz needs dt <= 25 ns; a 50 ns grid must refuse
    with pytest.raises(GridTooCoarseError, match="per period"):
        fit_cr_coefficients(simulate_ht(CRCoefficients(f_zx=5.0), default_durations(25, 1200.0)))


def test_missing_series():
    with pytest.raises(ValueError, match="missing"):
        fit_cr_coefficients(simulate_ht(default_coefficients(), GRID)[:5])


# --- Ramsey ------------------------------------------------------------------------

def test_ramsey_zero():
    x, y = simulate_ramsey_zi(CRCoefficients(), GRID)
    np.testing.assert_allclose(x.values, 1.0)
    np.testing.assert_allclose(y.values, 0.0, atol=1e-15)


def test_ramsey_pure_zi():
    f = fit_zi(simulate_ramsey_zi(CRCoefficients(f_zi=14.5783), GRID))
    assert f == pytest.approx(14.5783, rel=0.01)


def test_ramsey_full_table_without_fields():
    f = fit_zi(simulate_ramsey_zi(default_coefficients(), GRID))
    assert f == pytest.approx(14.5783, rel=0.05)


def test_ramsey_full_table_with_fields():
    truth = default_coefficients()
    res = full_fit(simulate_ht(truth, GRID), simulate_ramsey_zi(truth, GRID))
    assert res.coefficients.f_zi == pytest.approx(14.5783, rel=1e-6)


def test_ramsey_sign():
    assert fit_zi(simulate_ramsey_zi(CRCoefficients(f_zi=-3.0), GRID)) == pytest.approx(-3.0, rel=1e-6)


def test_ramsey_slow_phase_under_strong_fields():
    truth = CRCoefficients(0.0926, 1.5, -0.8, 0.4, -1.2, 0.9, -0.3)
    grid = default_durations(128, 1200.0)
    res = full_fit(simulate_ht(truth, grid), simulate_ramsey_zi(truth, grid))
    assert res.coefficients.f_zi == pytest.approx(0.0926, rel=1e-6)


def test_ramsey_below_nyquist():
    # dt = 50 ns puts Nyquist at 10 MHz; 8 MHz is still recoverable
    f = fit_zi(simulate_ramsey_zi(CRCoefficients(f_zi=8.0), default_durations(25, 1200.0)))
    assert f == pytest.approx(8.0, rel=1e-6)


def test_csv_round_trip(tmp_path):
    truth = default_coefficients()
    series = simulate_ht(truth, GRID, shots=100, seed=1) + simulate_ramsey_zi(truth, GRID, 100, 2)
    p = tmp_path / "s.csv"
    write_series_csv(p, series)
    assert p.read_text().splitlines()[0] == "duration_ns,control_state,basis,value"
    back = read_series_csv(p, shots=100)
    assert series_map(back).keys() == series_map(series).keys()
    for k, v in series_map(series).items():
        np.testing.assert_array_equal(series_map(back)[k], v)


def test_csv_bad_row(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("duration_ns,control_state,basis,value\n0,0,Z,1\n10,2,Z,1\n")
    with pytest.raises(ValueError, match=":3:"):
        read_series_csv(p)


def test_full_fit_runtime():
    t0 = time.perf_counter()
    truth = default_coefficients()
    full_fit(simulate_ht(truth, GRID), simulate_ramsey_zi(truth, GRID))
    assert time.perf_counter() - t0 < 10
