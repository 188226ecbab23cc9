"""Expressibility, entanglement and gradient-variance descriptors for PQCs.

Every sampled quantity draws sample ``k`` from its own RNG stream derived
from ``(seed, ..., k)`` and is evaluated in fixed-size chunks, so results are
bit-identical whatever the worker count.
"""
from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .cr import Entangler
from .pqc import PQCSpec, build_pqc, prepare_states

CHUNK = 128
TWO_PI = 2 * np.pi


def sample_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _chunked(fn: Callable[[int, int], np.ndarray], n_total: int, workers: int = 1) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over fixed chunks and concatenate in order."""
    bounds = [(s, min(s + CHUNK, n_total)) for s in range(0, n_total, CHUNK)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    else:
        parts = [fn(*b) for b in bounds]
    return np.concatenate(parts)


# --- expressibility -----------------------------------------------------------

@dataclass(frozen=True)
class ExpressibilityResult:
    expr: float
    n_samples: int
    n_bins: int
    seed: int


def haar_bin_probability(dim: int, f_lo: float, f_hi: float) -> float:
    """Haar mass of fidelities in ``[f_lo, f_hi]`` for a ``dim``-dimensional space."""
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    if not 0 <= f_lo < f_hi <= 1:
        raise ValueError(f"invalid fidelity bin [{f_lo}, {f_hi}]")
    return (1 - f_lo) ** (dim - 1) - (1 - f_hi) ** (dim - 1)


def haar_bin_masses(dim: int, n_bins: int) -> np.ndarray:
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    return np.array([haar_bin_probability(dim, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])


def kl_to_haar(fidelities: np.ndarray, dim: int, n_bins: int = 75) -> float:
    """KL divergence (nats) of the fidelity histogram from the Haar bin masses."""
    counts, _ = np.histogram(np.clip(fidelities, 0.0, 1.0), bins=n_bins, range=(0.0, 1.0))
    p = counts / counts.sum()
    q = haar_bin_masses(dim, n_bins)
    mask = p > 0
    return float(max(np.sum(p[mask] * np.log(p[mask] / q[mask])), 0.0))


def fidelity_samples(spec: PQCSpec, n_samples: int, seed: int = 0, workers: int = 1) -> np.ndarray:
    """``|<psi(t1)|psi(t2)>|^2`` for parameter pairs drawn uniformly in [0, 2pi)."""
    n_par = spec.parameter_count

    def chunk(start, stop):
        draws = np.array([sample_rng(seed, k).uniform(0, TWO_PI, size=2 * n_par)
                          for k in range(start, stop)])
        a = prepare_states(spec, draws[:, :n_par])
        b = prepare_states(spec, draws[:, n_par:])
        return np.abs(np.einsum("bi,bi->b", a.conj(), b)) ** 2

    return _chunked(chunk, n_samples, workers)


def expressibility(spec: PQCSpec, n_samples: int = 5000, n_bins: int = 75, seed: int = 0,
                   workers: int = 1) -> ExpressibilityResult:
    if n_samples < 1000:
        raise ValueError("expressibility needs at least 1000 fidelity samples")
    if n_bins < 10:
        raise ValueError("expressibility needs at least 10 histogram bins")
    fids = fidelity_samples(spec, n_samples, seed, workers)
    return ExpressibilityResult(kl_to_haar(fids, 2**spec.n_qubits, n_bins), n_samples, n_bins, seed)


# --- entanglement -------------------------------------------------------------

def bipartite_entropies(states: np.ndarray, cut: int) -> np.ndarray:
    """Entropy (bits) across the split ``[0, cut) | [cut, n)`` for a batch of states."""
    b, dim = states.shape
    n = dim.bit_length() - 1
    if not 0 < cut < n:
        raise ValueError(f"cut {cut} does not split {n} qubits")
    s = np.linalg.svd(states.reshape(b, 2**cut, 2 ** (n - cut)), compute_uv=False)
    lam = s**2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 1e-15, -lam * np.log2(lam), 0.0)
    return np.maximum(terms.sum(axis=1), 0.0)


def default_cut(n: int) -> int:
    return (n - 1) // 2


def entropy_scan(template: PQCSpec, layer_range: Iterable[int], n_samples: int = 100,
                 bipartition: int | None = None, seed: int = 0,
                 workers: int = 1) -> list[tuple[int, float]]:
    """Mean bipartite entropy over random parameters, one row per layer count.

    ``bipartition`` is the size of the leading block ``0..k-1``; by default
    ``(n-1)//2`` qubits, e.g. a 4-5 split for 9 qubits.
    """
    n = template.n_qubits
    if n < 3:
        raise ValueError("entropy scans need at least 3 qubits")
    cut = default_cut(n) if bipartition is None else int(bipartition)
    rows = []
    for L in layer_range:
        spec = dataclasses.replace(template, n_layers=int(L))
        n_par = spec.parameter_count

        def chunk(start, stop, spec=spec, L=L, n_par=n_par):
            draws = np.array([sample_rng(seed, L, k).uniform(0, TWO_PI, size=n_par)
                              for k in range(start, stop)])
            return bipartite_entropies(prepare_states(spec, draws), cut)

        vals = _chunked(chunk, n_samples, workers)
        rows.append((int(L), float(np.mean(vals))))
    return rows


# --- trainability -------------------------------------------------------------

def parse_cost(cost: str) -> tuple[str, int | None]:
    """``"global"`` or ``"local:N_C"`` (``"local"`` alone means N_C = 1)."""
    if cost == "global":
        return "global", None
    if cost.startswith("local"):
        _, _, nc = cost.partition(":")
        return "local", int(nc) if nc else 1
    raise ValueError(f"unknown cost {cost!r}; use 'global' or 'local:N_C'")


def cost_global(state: np.ndarray):
    """One minus the all-zeros probability."""
    return 1.0 - np.abs(state[..., 0]) ** 2


def cost_local(state: np.ndarray, n_c: int):
    """One minus the probability that qubits ``0..n_c-1`` all read 0."""
    n = state.shape[-1].bit_length() - 1
    if not 1 <= n_c <= n:
        raise ValueError(f"N_C={n_c} out of range for {n} qubits")
    return 1.0 - np.sum(np.abs(state[..., : 2 ** (n - n_c)]) ** 2, axis=-1)


def cost_value(state: np.ndarray, cost: str):
    kind, n_c = parse_cost(cost)
    return cost_global(state) if kind == "global" else cost_local(state, n_c)


def shifted_derivatives(spec: PQCSpec, params: np.ndarray, index: int, cost: str) -> np.ndarray:
    """Parameter-shift derivative for a batch of parameter vectors (B, P)."""
    params = np.asarray(params, dtype=float)
    if not 0 <= index < spec.parameter_count:
        raise IndexError(f"parameter index {index} out of range")
    plus = params.copy()
    minus = params.copy()
    plus[:, index] += np.pi / 2
    minus[:, index] -= np.pi / 2
    states = prepare_states(spec, np.concatenate([plus, minus]))
    c = cost_value(states, cost)
    b = params.shape[0]
    return (c[:b] - c[b:]) / 2


def partial_derivative(spec: PQCSpec, params, index: int, cost: str = "global") -> float:
    return float(shifted_derivatives(spec, np.asarray(params, dtype=float)[None, :], index, cost)[0])


def depth_for(n: int, rule: str) -> int:
    if rule == "shallow":
        return max(1, math.ceil(math.log2(n)))
    if rule == "deep":
        return 10 * n
    raise ValueError(f"unknown depth rule {rule!r}")


@dataclass(frozen=True)
class VarianceRow:
    kind: str
    n_qubits: int
    n_layers: int
    cost: str
    variance: float
    n_samples: int


def gradient_samples(spec: PQCSpec, n_samples: int, cost: str, seed: int = 0, index: int = 0,
                     workers: int = 1) -> np.ndarray:
    n_par = spec.parameter_count

    def chunk(start, stop):
        draws = np.array([sample_rng(seed, spec.n_qubits, k).uniform(0, TWO_PI, size=n_par)
                          for k in range(start, stop)])
        return shifted_derivatives(spec, draws, index, cost)

    return _chunked(chunk, n_samples, workers)


def variance_scan(kinds: Sequence[Entangler], n_range: Iterable[int], depth_rule: str,
                  cost: str, n_samples: int = 200, seed: int = 0, rotation_set: str = "RY",
                  workers: int = 1) -> list[VarianceRow]:
    """Variance of the first parameter's derivative across circuit sizes."""
    parse_cost(cost)
    rows = []
    for kind in kinds:
        for n in n_range:
            if not 2 <= n <= 10:
                raise ValueError("variance scans are limited to 2..10 qubits")
            L = depth_for(n, depth_rule)
            spec = build_pqc(n, L, rotation_set, kind)
            grads = gradient_samples(spec, n_samples, cost, seed, 0, workers)
            rows.append(VarianceRow(kind.label, n, L, cost, float(np.var(grads)), n_samples))
    return rows


def log_linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Slope and R^2 of ``log(y)`` against ``x``."""
    x = np.asarray(x, dtype=float)
    ly = np.log(np.asarray(y, dtype=float))
    slope, icpt = np.polyfit(x, ly, 1)
    pred = slope * x + icpt
    ss_res = np.sum((ly - pred) ** 2)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    return float(slope), float(1 - ss_res / ss_tot) if ss_tot > 0 else 1.0


# --- output -------------------------------------------------------------------

DESCRIPTOR_HEADER = ["kind", "n", "L", "metric", "value", "samples", "seed"]


def write_rows_csv(path: str | Path, rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DESCRIPTOR_HEADER)
        for kind, n, L, metric, value, samples, seed in rows:
            w.writerow([kind, n, L, metric, repr(float(value)), samples, seed])
