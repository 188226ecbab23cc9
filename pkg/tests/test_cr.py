import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import logm

from pulsepqc.cr import (CALIBRATION_ENV, CRCoefficients, Entangler, build_cr_hamiltonian,
                         cnot_unitary, cr_unitary, default_coefficients, duration_for_zx_angle,
                         entangler_unitary, load_calibration, parse_calibration, rzx)
from pulsepqc.sim import H, I2, X, Z, basis_state, entanglement_entropy, kron

TABLE_III = dict(f_zi=14.5783, f_zx=0.69645487, f_zy=-0.0112463, f_zz=-0.04056,
                 f_ix=-0.1102794, f_iy=0.03167672, f_iz=0.03557382)
ZX = kron(Z, X)
ZI = kron(Z, I2)

coeff = st.floats(-2.0, 2.0)
coefficients = st.builds(CRCoefficients, f_zi=st.floats(-20, 20), f_zx=coeff, f_zy=coeff,
                         f_zz=coeff, f_ix=coeff, f_iy=coeff, f_iz=coeff)
durations = st.floats(0.0, 2000.0)


def expm_oracle(h, t):
    """exp(-i h t) from a dense Hermitian eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def test_default_coefficients_match_table():
    assert default_coefficients().as_dict() == TABLE_III


def test_coefficient_bounds():
    with pytest.raises(ValueError):
        CRCoefficients(f_zx=1000.0)
    with pytest.raises(ValueError):
        CRCoefficients(f_ix=float("nan"))


def test_zero_hamiltonian():
    np.testing.assert_array_equal(build_cr_hamiltonian(CRCoefficients()), np.zeros((4, 4)))


def test_pure_zx_hamiltonian():
    h = build_cr_hamiltonian(CRCoefficients(f_zx=1.0))
    np.testing.assert_allclose(h, 2 * np.pi * 1e-3 * ZX / 2, atol=1e-15)
    assert np.linalg.norm(h @ ZI - ZI @ h) == 0


def test_table_iii_hamiltonian_structure():
    h = build_cr_hamiltonian(CRCoefficients(**TABLE_III))
    np.testing.assert_allclose(h, h.conj().T, atol=1e-12)
    np.testing.assert_allclose(h[:2, 2:], 0, atol=1e-12)
    np.testing.assert_allclose(h[2:, :2], 0, atol=1e-12)


def test_zero_duration_identity():
    np.testing.assert_allclose(cr_unitary(CRCoefficients(**TABLE_III), 0.0), np.eye(4), atol=1e-15)


def test_pure_zx_eighth_cycle_is_rzx_quarter_pi():
    c = CRCoefficients(f_zx=0.69645487)
    t = 1 / (8 * c.f_zx * 1e-3)
    assert t == pytest.approx(179.48, abs=0.01)
    expected = np.cos(np.pi / 8) * np.eye(4) - 1j * np.sin(np.pi / 8) * ZX
    np.testing.assert_allclose(cr_unitary(c, t), expected, atol=1e-6)
    np.testing.assert_allclose(rzx(np.pi / 4), expected, atol=1e-15)


def test_table_iii_matches_dense_expm():
    c = CRCoefficients(**TABLE_III)
    np.testing.assert_allclose(cr_unitary(c, 150.0), expm_oracle(build_cr_hamiltonian(c), 150.0),
                               atol=1e-8)


@given(coefficients, durations)
def test_unitary_matches_oracle_and_is_unitary(c, t):
    u = cr_unitary(c, t)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-9)
    np.testing.assert_allclose(u, expm_oracle(build_cr_hamiltonian(c), t), atol=1e-8)


@given(coefficients, durations)
def test_commutes_with_control_z(c, t):
    u = cr_unitary(c, t)
    np.testing.assert_allclose(u @ ZI, ZI @ u, atol=1e-9)


@given(coefficients, durations, durations)
def test_composition(c, t1, t2):
    np.testing.assert_allclose(cr_unitary(c, t1) @ cr_unitary(c, t2), cr_unitary(c, t1 + t2),
                               atol=1e-8)


@pytest.mark.parametrize("t", [-1.0, float("inf"), float("nan")])
def test_bad_duration(t):
    with pytest.raises(ValueError):
        cr_unitary(CRCoefficients(f_zx=1.0), t)


def test_duration_for_angle():
    c = CRCoefficients(**TABLE_III)
    t4 = duration_for_zx_angle(c, np.pi / 4)
    assert t4 == pytest.approx(1 / (8 * 0.69645487e-3))
    assert t4 == pytest.approx(179.48, abs=0.01)
    assert duration_for_zx_angle(c, np.pi / 2) == pytest.approx(2 * t4)
    assert duration_for_zx_angle(c, 2 * np.pi * c.f_zx * 1e-3 * 150) == pytest.approx(150.0)


def test_duration_for_angle_errors():
    with pytest.raises(ValueError):
        duration_for_zx_angle(CRCoefficients(), np.pi / 4)
    with pytest.raises(ValueError):
        duration_for_zx_angle(CRCoefficients(f_zx=1.0), 0.0)


def test_cnot_identities():
    cx = cnot_unitary()
    np.testing.assert_array_equal(cx @ basis_state("10"), basis_state("11"))
    np.testing.assert_array_equal(cx @ cx, np.eye(4))
    ih = kron(I2, H)
    np.testing.assert_allclose(cx, ih @ np.diag([1, 1, 1, -1]) @ ih, atol=1e-15)


def test_cr_angle_entangler_pure_zx():
    e = Entangler.cr_angle(CRCoefficients(f_zx=0.69645487), np.pi / 4)
    np.testing.assert_allclose(entangler_unitary(e), rzx(np.pi / 4), atol=1e-12)


def test_cr_duration_zx_angle():
    # strip the ZI phase (it commutes with every other term), then read the
    # ZX component off the principal logarithm
    c = CRCoefficients(**TABLE_III)
    u = entangler_unitary(Entangler.cr_duration(c, 150.0))
    phase = np.exp(1j * np.pi * 1e-3 * c.f_zi * 150.0 * np.array([1, 1, -1, -1]))
    ht = 1j * logm(u @ np.diag(phase))
    angle = np.trace(ht @ ZX).real / 2
    assert angle == pytest.approx(2 * np.pi * c.f_zx * 0.150, rel=1e-9)
    assert angle == pytest.approx(0.656, abs=1e-3)


def test_cnot_ignores_coefficients():
    e = Entangler("cnot", coefficients=CRCoefficients(**TABLE_III))
    np.testing.assert_array_equal(entangler_unitary(e), cnot_unitary())


def test_maximal_entanglement_at_quarter_turn():
    c = CRCoefficients(f_zx=0.5)
    plus0 = kron(H, I2) @ basis_state("00")
    t_half = (np.pi / 2) / (2 * np.pi * c.f_zx * 1e-3)
    assert entanglement_entropy(cr_unitary(c, t_half) @ plus0, [0]) == pytest.approx(1.0, abs=1e-9)
    assert entanglement_entropy(cr_unitary(c, t_half / 2) @ plus0, [0]) < 0.9


@pytest.mark.parametrize("kind,kw", [("cr_angle", {"angle": 0.0}), ("cr_angle", {"angle": 4.0}),
                                     ("cr_duration", {"duration": 0.0}),
                                     ("cr_duration", {"duration": 2e4}), ("swap", {})])
def test_entangler_validation(kind, kw):
    with pytest.raises(ValueError):
        Entangler(kind, **kw)


def test_entangler_dict_round_trip():
    for e in (Entangler.cnot(), Entangler.cr_angle(), Entangler.cr_duration(duration=120.0)):
        assert Entangler.from_dict(e.to_dict()) == e


def test_target_field_round_trip():
    c = CRCoefficients(**TABLE_III)
    back = CRCoefficients.from_target_fields(c.target_field(0), c.target_field(1), c.f_zi)
    for k, v in c.as_dict().items():
        assert getattr(back, k) == pytest.approx(v, abs=1e-15)


# --- calibration files -----------------------------------------------------------

def test_bundled_calibration():
    cal = load_calibration()
    assert (0, 1) in cal
    rec = cal[(0, 1)]
    assert rec.coefficients == default_coefficients()
    assert (rec.single_qubit_duration_ns, rec.cnot_duration_ns) == (35.0, 390.0)
    assert (rec.cr_ang_duration_ns, rec.cr_dur_duration_ns) == (170.0, 135.0)


def test_calibration_env_var(tmp_path, monkeypatch):
    rec = {"pair": [0, 1], **TABLE_III, "f_zx": 0.5, "cnot_duration_ns": 300,
           "single_qubit_duration_ns": 30}
    p = tmp_path / "cal.json"
    p.write_text(json.dumps([rec]))
    monkeypatch.setenv(CALIBRATION_ENV, str(p))
    cal = load_calibration()
    assert cal[(0, 1)].coefficients.f_zx == 0.5
    assert cal[(0, 1)].cr_ang_duration_ns is None


@pytest.mark.parametrize("records,match", [
    ({"pair": [0, 1]}, "list"),
    ([{"pair": [0, 0]}], "record 0"),
    ([{"pair": [0, 1], "f_zx": 1.0}], "record 0"),
])
def test_calibration_errors(records, match):
    with pytest.raises(ValueError, match=match):
        parse_calibration(records)


def test_calibration_duplicate_pair():
    rec = {"pair": [0, 1], **TABLE_III, "cnot_duration_ns": 300, "single_qubit_duration_ns": 30}
    with pytest.raises(ValueError, match="duplicate"):
        parse_calibration([rec, rec])
