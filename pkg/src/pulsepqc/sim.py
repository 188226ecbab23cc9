"""Dense statevector kernels.

States are complex numpy arrays of length ``2**n`` (optionally with leading
batch axes). Qubit 0 is the most significant bit of the basis index, so
``|q0 q1 ... q_{n-1}>`` reads left to right like the bitstring.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .pauli import PauliSum, pauli_action, pauli_masks, to_matrix

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_DAG = np.diag([1, -1j]).astype(complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

MAX_DENSE_QUBITS = 12


def n_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[-1]
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def zero_state(n: int) -> np.ndarray:
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    return state


def basis_state(bits: str) -> np.ndarray:
    """Computational basis state from a qubit-0-first bitstring like ``"10"``."""
    state = np.zeros(2 ** len(bits), dtype=complex)
    state[int(bits, 2)] = 1.0
    return state


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state."""
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product, first factor acting on the lowest-numbered qubit."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _axis(axis: str) -> np.ndarray:
    a = axis.upper()
    if a not in ("X", "Y", "Z"):
        raise ValueError(f"rotation axis must be X, Y or Z, got {axis!r}")
    return PAULIS[a]


def rotation_gate(axis: str, angle: float) -> np.ndarray:
    """``exp(-i angle P / 2)`` for P in {X, Y, Z}."""
    if not np.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * _axis(axis)


def rotation_gates(axis: str, angles: np.ndarray) -> np.ndarray:
    """Stack of rotation matrices, shape ``angles.shape + (2, 2)``."""
    angles = np.asarray(angles, dtype=float)
    c = np.cos(angles / 2)[..., None, None]
    s = np.sin(angles / 2)[..., None, None]
    return c * I2 - 1j * s * _axis(axis)


def _check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"target qubit {t} out of range for {n} qubits")
    return targets


def apply_unitary(state: np.ndarray, u: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply ``u`` to ``targets`` (first target = most significant factor of ``u``).

    Leading axes of ``state`` are treated as a batch. Returns a new array.
    """
    n = n_qubits_of(state)
    targets = _check_targets(targets, n)
    k = len(targets)
    if u.shape != (2**k, 2**k):
        raise ValueError(f"unitary of shape {u.shape} does not match {k} target(s)")
    batch = state.shape[:-1]
    nb = len(batch)
    psi = state.reshape(batch + (2,) * n)
    axes = [nb + t for t in targets]
    out = np.tensordot(u.reshape((2,) * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return np.ascontiguousarray(out).reshape(state.shape)


def apply_single_batched(states: np.ndarray, mats: np.ndarray, target: int) -> np.ndarray:
    """Apply a different 2x2 matrix to ``target`` of each state in a batch.

    ``states`` has shape (B, 2**n) and ``mats`` shape (B, 2, 2).
    """
    b, dim = states.shape
    n = n_qubits_of(states)
    _check_targets([target], n)
    psi = states.reshape(b, 2**target, 2, 2 ** (n - target - 1))
    return np.einsum("bij,bajc->baic", mats, psi).reshape(b, dim)


@lru_cache(maxsize=4096)
def _cached_action(string: str) -> tuple[np.ndarray, np.ndarray]:
    perm, phase = pauli_action(string)
    perm.setflags(write=False)
    phase.setflags(write=False)
    return perm, phase


def pauli_expectation(state: np.ndarray, string: str) -> np.ndarray | float:
    """``<psi|P|psi>`` for a single Pauli string (batched over leading axes)."""
    perm, phase = _cached_action(string)
    val = np.einsum("...i,...i->...", state[..., perm].conj(), phase * state)
    return val.real


def expectation(state: np.ndarray, obs: PauliSum):
    """Exact ``<psi|obs|psi>``; supports a leading batch axis."""
    n = n_qubits_of(state)
    if obs.n_qubits != n:
        raise ValueError(f"observable acts on {obs.n_qubits} qubits, state has {n}")
    total = 0.0
    for coeff, string in obs.terms:
        total = total + coeff * pauli_expectation(state, string)
    if np.ndim(total) == 0:
        return float(total)
    return total


def measurement_rotation(state: np.ndarray, string: str) -> np.ndarray:
    """Rotate so that measuring Z on every non-identity qubit measures ``string``."""
    n = n_qubits_of(state)
    if len(string) != n:
        raise ValueError(f"basis string {string!r} does not match {n} qubits")
    out = state
    for q, ch in enumerate(string.upper()):
        if ch == "X":
            out = apply_unitary(out, H, [q])
        elif ch == "Y":
            out = apply_unitary(out, H @ S_DAG, [q])
    return out


def sample_counts(state: np.ndarray, basis: str, shots: int, rng_seed) -> dict[str, int]:
    """Sample ``shots`` bitstrings after rotating into the basis of a Pauli string.

    Returns qubit-0-first bitstrings mapped to counts (zero counts omitted).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1; use expectation() for exact values")
    n = n_qubits_of(state)
    rotated = measurement_rotation(state, basis)
    probs = np.abs(rotated) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(rng_seed)
    counts = rng.multinomial(shots, probs)
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(counts) if c}


def expectation_from_counts(counts: dict[str, int], string: str) -> float:
    """Estimate ``<P>`` from counts taken in the basis of ``string``."""
    _, z_like, _ = pauli_masks(string.upper().replace("X", "Z").replace("Y", "Z"))
    total = 0
    signed = 0
    for bits, c in counts.items():
        parity = bin(int(bits, 2) & z_like).count("1") & 1
        signed += c * (1 - 2 * parity)
        total += c
    return signed / total


def sampled_expectation(state: np.ndarray, obs: PauliSum, shots: int, seed) -> float:
    """Shot-noise estimate of ``<obs>``, each term measured separately."""
    value = 0.0
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(len(obs.terms))
    for (coeff, string), child in zip(obs.terms, children):
        if set(string) == {"I"}:
            value += coeff
            continue
        counts = sample_counts(state, string, shots, child)
        value += coeff * expectation_from_counts(counts, string)
    return value


def partial_trace(state: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of the qubits in ``keep`` (ordered ascending)."""
    n = n_qubits_of(state)
    keep = sorted(set(int(q) for q in keep))
    if not keep or len(keep) >= n:
        raise ValueError("keep must be a nonempty proper subset of the qubits")
    _check_targets(keep, n)
    rest = [q for q in range(n) if q not in keep]
    psi = state.reshape((2,) * n).transpose(keep + rest).reshape(2 ** len(keep), -1)
    return psi @ psi.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits, ``-sum(l * log2 l)`` over eigenvalues, 0 log 0 = 0."""
    if not np.allclose(rho, rho.conj().T, atol=1e-8):
        raise ValueError("density matrix is not Hermitian")
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-15]
    s = float(-np.sum(evals * np.log2(evals)))
    return max(s, 0.0)


def entanglement_entropy(state: np.ndarray, keep: Sequence[int]) -> float:
    return von_neumann_entropy(partial_trace(state, keep))


def exact_minimum_eigenvalue(h: PauliSum) -> tuple[float, np.ndarray]:
    """Ground energy and an eigenvector by dense diagonalization (n <= 12)."""
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(
            f"{h.n_qubits} qubits exceeds the dense diagonalization limit of {MAX_DENSE_QUBITS}")
    evals, evecs = np.linalg.eigh(to_matrix(h))
    return float(evals[0]), evecs[:, 0]
