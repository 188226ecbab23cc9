"""SPSA-driven VQE, MaxCut encodings and solution ranking."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .pauli import PauliSum
from .pqc import PQCSpec, prepare_state
from .sim import expectation, sampled_expectation

MAX_BRUTE_FORCE_NODES = 20


@dataclass(frozen=True)
class SPSAConfig:
    """SPSA gains.

    ``a=None`` calibrates ``a`` so an update moves each coordinate by about
    ``first_step`` radians: the scale is the running mean of the gradient
    estimate magnitude over the first ``calibration_steps`` iterations (the
    very first step is exactly ``first_step``). No extra evaluations are spent.
    ``stability_A=None`` means ``0.1 * max_iterations``.
    """

    max_iterations: int = 100
    a: float | None = None
    c: float = 0.1
    alpha: float = 0.602
    gamma: float = 0.101
    stability_A: float | None = None
    seed: int = 0
    first_step: float = 0.1
    calibration_steps: int = 10

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.a is not None and self.a <= 0:
            raise ValueError("a must be positive")

    @property
    def A(self) -> float:
        return 0.1 * self.max_iterations if self.stability_A is None else self.stability_A


@dataclass
class VQETrace:
    records: list[tuple[int, np.ndarray, float]] = field(default_factory=list)
    best_params: np.ndarray | None = None
    best_value: float = np.inf
    final_params: np.ndarray | None = None

    def add(self, params: np.ndarray, value: float) -> None:
        self.records.append((len(self.records), params.copy(), float(value)))
        if value < self.best_value:
            self.best_value = float(value)
            self.best_params = params.copy()

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, _, v in self.records])


def spsa_minimize(objective: Callable[[np.ndarray], float], init, cfg: SPSAConfig) -> VQETrace:
    """Two-evaluation SPSA; every objective call is recorded in the trace."""
    theta = np.array(init, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    trace = VQETrace()
    a = cfg.a
    magnitudes = []
    for k in range(cfg.max_iterations):
        ck = cfg.c / (k + 1) ** cfg.gamma
        delta = rng.choice([-1.0, 1.0], size=theta.size)
        tp, tm = theta + ck * delta, theta - ck * delta
        fp = objective(tp)
        trace.add(tp, fp)
        fm = objective(tm)
        trace.add(tm, fm)
        g = (fp - fm) / (2 * ck) * delta
        if cfg.a is None and k < cfg.calibration_steps:
            # every component of g has the same magnitude |fp - fm| / (2 ck)
            magnitudes.append(abs(fp - fm) / (2 * ck))
            scale = float(np.mean(magnitudes))
            a = cfg.first_step * (1 + cfg.A) ** cfg.alpha / scale if scale > 0 else cfg.first_step
        theta = theta - a / (k + 1 + cfg.A) ** cfg.alpha * g
    trace.final_params = theta
    return trace


def vqe_objective(spec: PQCSpec, h: PauliSum, shots: int = 0, seed: int = 0):
    """``theta -> <h>`` on the prepared state; sampled when ``shots > 0``."""
    if h.n_qubits != spec.n_qubits:
        raise ValueError(f"Hamiltonian acts on {h.n_qubits} qubits, PQC has {spec.n_qubits}")
    counter = [0]

    def f(theta):
        psi = prepare_state(spec, theta)
        if shots == 0:
            return expectation(psi, h)
        counter[0] += 1
        return sampled_expectation(psi, h, shots, np.random.SeedSequence(seed, spawn_key=(2, counter[0])))

    return f


def vqe_run(spec: PQCSpec, h: PauliSum, cfg: SPSAConfig | None = None,
            shots: int = 0) -> tuple[VQETrace, np.ndarray]:
    """Minimise ``<h>`` from a seeded random start; returns the trace and best state.

    The trace holds ``2 * max_iterations`` SPSA evaluations plus one overhead
    evaluation at the final (unperturbed) iterate.
    """
    cfg = cfg or SPSAConfig()
    objective = vqe_objective(spec, h, shots, cfg.seed)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    init = rng.uniform(0, 2 * np.pi, size=spec.parameter_count)
    trace = spsa_minimize(objective, init, cfg)
    trace.add(trace.final_params, objective(trace.final_params))
    return trace, prepare_state(spec, trace.best_params)


# --- MaxCut -------------------------------------------------------------------

@dataclass(frozen=True)
class MaxCutProblem:
    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]

    def __init__(self, n_nodes: int, edges: Iterable[Sequence]):
        norm = []
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise ValueError(f"edge ({u}, {v}) outside nodes 0..{n_nodes - 1}")
            if not w > 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            norm.append((u, v, w))
        if n_nodes < 1:
            raise ValueError("graph needs at least one node")
        object.__setattr__(self, "n_nodes", int(n_nodes))
        object.__setattr__(self, "edges", tuple(norm))


def cut_value(p: MaxCutProblem, bits: str) -> float:
    return sum(w for u, v, w in p.edges if bits[u] != bits[v])


def maxcut_hamiltonian(p: MaxCutProblem) -> PauliSum:
    """``sum (w/2)(Z_u Z_v - I)``: energy of bitstring z equals ``-cut(z)``."""
    n = p.n_nodes
    terms = [(0.0, "I" * n)]
    for u, v, w in p.edges:
        s = ["I"] * n
        s[u] = s[v] = "Z"
        terms.append((w / 2, "".join(s)))
        terms.append((-w / 2, "I" * n))
    return PauliSum(terms)


def brute_force_maxcut(p: MaxCutProblem) -> tuple[float, set[str]]:
    n = p.n_nodes
    if n > MAX_BRUTE_FORCE_NODES:
        raise ValueError(f"{n} nodes exceeds the brute-force limit of {MAX_BRUTE_FORCE_NODES}")
    idx = np.arange(2**n, dtype=np.int64)
    cuts = np.zeros(2**n)
    for u, v, w in p.edges:
        bu = (idx >> (n - 1 - u)) & 1
        bv = (idx >> (n - 1 - v)) & 1
        cuts += w * (bu != bv)
    best = float(cuts.max())
    opt = {format(int(i), f"0{n}b") for i in np.flatnonzero(np.isclose(cuts, best, atol=1e-9))}
    return best, opt


@dataclass(frozen=True)
class SolutionRanking:
    top_k: tuple[tuple[str, float], ...]
    correct_count: int
    roca: int


def rank_solutions(state: np.ndarray, k: int) -> list[tuple[str, float]]:
    """Top-``k`` bitstrings by probability; ties broken lexicographically."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = state.shape[-1].bit_length() - 1
    probs = np.abs(state) ** 2
    # rounding makes numerically equal probabilities tie exactly
    order = np.lexsort((np.arange(probs.size), -np.round(probs, 12)))
    return [(format(int(i), f"0{n}b"), float(probs[i])) for i in order[:k]]


def roca(top_k: Sequence[tuple[str, float]], optimal: set[str]) -> int:
    """1-based rank of the first optimal bitstring in ``top_k``, 0 if absent."""
    for rank, (bits, _) in enumerate(top_k, start=1):
        if bits in optimal:
            return rank
    return 0


def evaluate_ranking(state: np.ndarray, optimal: set[str], k: int = 5) -> SolutionRanking:
    top = rank_solutions(state, k)
    return SolutionRanking(tuple(top), sum(b in optimal for b, _ in top), roca(top, optimal))


def load_graph(path: str | Path) -> MaxCutProblem:
    """Read ``u v [weight]`` lines; ``#`` starts a comment."""
    path = Path(path)
    edges = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if len(parts) not in (2, 3):
                raise ValueError
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected 'u v weight', got {raw.strip()!r}") from None
        edges.append((u, v, w, lineno))
    if not edges:
        raise ValueError(f"{path}: no edges found")
    n = max(max(u, v) for u, v, _, _ in edges) + 1
    seen = {}
    for u, v, w, lineno in edges:
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"{path}:{lineno}: duplicate edge {key} (first on line {seen[key]})")
        if u < 0 or v < 0 or u == v or not w > 0:
            raise ValueError(f"{path}:{lineno}: invalid edge ({u}, {v}, {w})")
        seen[key] = lineno
    return MaxCutProblem(n, [(u, v, w) for u, v, w, _ in edges])


# --- output -------------------------------------------------------------------

def write_trace_csv(path: str | Path, trace: VQETrace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eval", "value"])
        for i, _, v in trace.records:
            w.writerow([i, repr(v)])


def summary_json(trace: VQETrace, exact_reference: float, ranking: SolutionRanking | None = None,
                 extra: dict | None = None) -> str:
    d = {
        "best_value": trace.best_value,
        "best_params": [float(x) for x in trace.best_params],
        "exact_reference": exact_reference,
        "evaluations": len(trace.records),
        "roca": ranking.roca if ranking else None,
        "correct_count": ranking.correct_count if ranking else None,
    }
    if ranking:
        d["top_k"] = [{"bitstring": b, "probability": p} for b, p in ranking.top_k]
    if extra:
        d.update(extra)
    return json.dumps(d, indent=2, sort_keys=True) + "\n"
