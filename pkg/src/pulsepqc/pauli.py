"""Weighted Pauli-string sums and their text format.

A file holds one term per line, ``<coefficient> <pauli_string>``; ``#`` starts
a comment. Qubit 0 is the leftmost character of each string.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

PAULI_CHARS = frozenset("IXYZ")


class PauliParseError(ValueError):
    """Malformed Pauli-sum text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings with merged duplicates.

    ``terms`` is a tuple of ``(coefficient, string)`` pairs in first-seen order.
    """

    terms: tuple[tuple[float, str], ...]

    def __init__(self, terms: Iterable[tuple[float, str]]):
        merged: dict[str, float] = {}
        width = None
        for coeff, string in terms:
            string = str(string).upper()
            if not string or set(string) - PAULI_CHARS:
                raise ValueError(f"invalid Pauli string {string!r}")
            if width is None:
                width = len(string)
            elif len(string) != width:
                raise ValueError(
                    f"Pauli string {string!r} has length {len(string)}, expected {width}"
                )
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValueError(f"non-finite coefficient for {string!r}")
            merged[string] = merged.get(string, 0.0) + coeff
        if width is None:
            raise ValueError("PauliSum needs at least one term")
        object.__setattr__(self, "terms", tuple((c, s) for s, c in merged.items()))

    @property
    def n_qubits(self) -> int:
        return len(self.terms[0][1])

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    @property
    def strings(self) -> list[str]:
        return [s for _, s in self.terms]

    def norm_bound(self) -> float:
        """Sum of absolute coefficients; bounds every expectation value."""
        return float(np.sum(np.abs(self.coefficients)))

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def to_text(self) -> str:
        return "".join(f"{c!r} {s}\n" for c, s in self.terms)

    @classmethod
    def from_text(cls, text: str, path: str | None = None) -> "PauliSum":
        terms = []
        width = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise PauliParseError(
                    f"expected '<coefficient> <pauli_string>', got {raw.strip()!r}",
                    lineno, path)
            try:
                coeff = float(parts[0])
            except ValueError:
                raise PauliParseError(f"bad coefficient {parts[0]!r}", lineno, path) from None
            if not np.isfinite(coeff):
                raise PauliParseError(f"non-finite coefficient {parts[0]!r}", lineno, path)
            string = parts[1].upper()
            bad = sorted(set(string) - PAULI_CHARS)
            if bad:
                raise PauliParseError(
                    f"bad Pauli character(s) {''.join(bad)!r} in {parts[1]!r}", lineno, path)
            if width is None:
                width = len(string)
            elif len(string) != width:
                raise PauliParseError(
                    f"string {parts[1]!r} has length {len(string)}, expected {width}",
                    lineno, path)
            terms.append((coeff, string))
        if not terms:
            raise PauliParseError("no terms found", None, path)
        return cls(terms)


def load_hamiltonian(path: str | Path) -> PauliSum:
    path = Path(path)
    return PauliSum.from_text(path.read_text(), path=str(path))


def pauli_masks(string: str) -> tuple[int, int, int]:
    """Return (x_mask, z_mask, n_y) for a string; qubit 0 is the top bit."""
    n = len(string)
    x_mask = z_mask = 0
    n_y = 0
    for q, ch in enumerate(string):
        bit = 1 << (n - 1 - q)
        if ch in "XY":
            x_mask |= bit
        if ch in "ZY":
            z_mask |= bit
        if ch == "Y":
            n_y += 1
    return x_mask, z_mask, n_y


def _parity(values: np.ndarray) -> np.ndarray:
    """Popcount parity of non-negative integers (elementwise)."""
    values = values.copy()
    parity = np.zeros(values.shape, dtype=np.int64)
    while np.any(values):
        parity ^= values & 1
        values >>= 1
    return parity


def pauli_action(string: str) -> tuple[np.ndarray, np.ndarray]:
    """Index permutation and phases with ``(P psi)[perm[x]] = phase[x] * psi[x]``."""
    n = len(string)
    x_mask, z_mask, n_y = pauli_masks(string)
    idx = np.arange(2**n, dtype=np.int64)
    sign = 1 - 2 * _parity(idx & z_mask)
    phase = (1j) ** n_y * sign
    return idx ^ x_mask, phase


def pauli_matrix(string: str) -> np.ndarray:
    """Dense matrix of one Pauli string."""
    perm, phase = pauli_action(string)
    dim = perm.size
    mat = np.zeros((dim, dim), dtype=complex)
    mat[perm, np.arange(dim)] = phase
    return mat


def to_matrix(h: PauliSum) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli sum."""
    dim = 2**h.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for coeff, string in h.terms:
        perm, phase = pauli_action(string)
        mat[perm, cols] += coeff * phase
    return mat


def diagonal(h: PauliSum) -> np.ndarray:
    """Diagonal of ``h`` in the computational basis (only Z/I strings contribute)."""
    dim = 2**h.n_qubits
    diag = np.zeros(dim)
    idx = np.arange(dim, dtype=np.int64)
    for coeff, string in h.terms:
        x_mask, z_mask, _ = pauli_masks(string)
        if x_mask:
            continue
        diag += coeff * (1 - 2 * _parity(idx & z_mask))
    return diag
