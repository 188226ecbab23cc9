import numpy as np
import pytest
from hypothesis import given, strategies as st

from pulsepqc.pauli import (PauliParseError, PauliSum, diagonal, load_hamiltonian, pauli_action,
                            pauli_matrix, to_matrix)
from pulsepqc.sim import I2, X, Y, Z, kron

MATS = {"I": I2, "X": X, "Y": Y, "Z": Z}
strings = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def dense(string):
    return kron(*[MATS[c] for c in string])


def test_from_text_two_terms():
    h = PauliSum.from_text("1.0 ZZ\n0.5 XI")
    assert len(h) == 2
    assert h.n_qubits == 2
    assert h.terms == ((1.0, "ZZ"), (0.5, "XI"))


def test_duplicates_merge():
    h = PauliSum([(1.0, "ZZ"), (0.25, "XI"), (0.5, "zz")])
    assert dict((s, c) for c, s in h.terms) == {"ZZ": 1.5, "XI": 0.25}


def test_comments_and_blank_lines():
    h = PauliSum.from_text("# header\n\n-1.5 IZ  # trailing\n")
    assert h.terms == ((-1.5, "IZ"),)


@pytest.mark.parametrize("text,line", [
    ("1.0 ZZ\n0.5 XQ", 2),
    ("1.0 ZZ\n0.5 XIZ", 2),
    ("abc ZZ", 1),
    ("1.0", 1),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(PauliParseError) as exc:
        PauliSum.from_text(text, path="h.txt")
    assert exc.value.line == line
    assert f"h.txt:{line}:" in str(exc.value)


def test_load_hamiltonian_error_names_file(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1.0 ZZ\n2.0 ZA\n")
    with pytest.raises(PauliParseError, match="bad.txt:2"):
        load_hamiltonian(p)


def test_empty_is_error():
    with pytest.raises(PauliParseError):
        PauliSum.from_text("# nothing\n")


@given(strings)
def test_pauli_action_matches_dense(string):
    perm, phase = pauli_action(string)
    np.testing.assert_allclose(pauli_matrix(string), dense(string), atol=1e-12)
    psi = np.exp(1j * np.arange(2 ** len(string))) * np.arange(1, 2 ** len(string) + 1)
    assert np.isclose(np.vdot(psi[perm], phase * psi), np.vdot(psi, dense(string) @ psi))


@given(st.lists(st.tuples(st.floats(-3, 3), st.text("IXYZ", min_size=3, max_size=3)), min_size=1,
                max_size=6))
def test_diagonal_matches_matrix(terms):
    h = PauliSum(terms)
    np.testing.assert_allclose(diagonal(h), np.diag(to_matrix(h)).real, atol=1e-12)


@given(st.lists(st.tuples(st.floats(-5, 5), st.text("IXYZ", min_size=2, max_size=2)), min_size=1,
                max_size=5))
def test_text_round_trip(terms):
    h = PauliSum(terms)
    assert PauliSum.from_text(h.to_text()) == h
