"""Hardware-efficient ansatz families and their duration model.

A layer is one rotation per qubit per axis followed by entanglers along a
linear chain; a final rotation layer closes the circuit. Parameters are
ordered layer-major, then qubit, then axis (RY before RZ).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Literal, Mapping

import numpy as np

from .cr import (CRCoefficients, Entangler, PairCalibration, duration_for_zx_angle,
                 entangler_unitary, load_calibration)
from .sim import apply_single_batched, apply_unitary, rotation_gates

RotationSet = Literal["RY", "RY_RZ"]
ROTATION_AXES = {"RY": ("Y",), "RY_RZ": ("Y", "Z")}


def linear_map(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(n - 1))


@dataclass(frozen=True)
class PQCSpec:
    n_qubits: int
    n_layers: int
    rotation_set: RotationSet = "RY"
    entangler: Entangler = field(default_factory=Entangler.cnot)
    entanglement_map: tuple[tuple[int, int], ...] = ()
    # per-pair overrides of the entangler's shared coefficients
    pair_coefficients: tuple[tuple[tuple[int, int], CRCoefficients], ...] = ()

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("a PQC needs at least 2 qubits")
        if self.n_layers < 1:
            raise ValueError("a PQC needs at least 1 layer")
        if self.rotation_set not in ROTATION_AXES:
            raise ValueError(f"unknown rotation set {self.rotation_set!r}")
        if not self.entanglement_map:
            object.__setattr__(self, "entanglement_map", linear_map(self.n_qubits))
        for c, t in self.entanglement_map:
            if c == t or not (0 <= c < self.n_qubits and 0 <= t < self.n_qubits):
                raise ValueError(f"invalid entangling pair {(c, t)}")

    @property
    def axes(self) -> tuple[str, ...]:
        return ROTATION_AXES[self.rotation_set]

    @property
    def parameter_count(self) -> int:
        return parameter_count(self)

    def pair_unitaries(self) -> tuple[np.ndarray, ...]:
        return _pair_unitaries(self)


def parameter_count(spec: PQCSpec) -> int:
    return spec.n_qubits * (spec.n_layers + 1) * len(spec.axes)


def build_pqc(n: int, n_layers: int, rotation_set: RotationSet = "RY",
              entangler: Entangler | None = None,
              calibration: Mapping[tuple[int, int], PairCalibration] | None = None) -> PQCSpec:
    """Linear-chain PQC; ``calibration`` overrides CR coefficients per pair."""
    entangler = entangler or Entangler.cnot()
    overrides = ()
    if calibration and entangler.kind != "cnot":
        overrides = tuple((p, calibration[p].coefficients)
                          for p in linear_map(n) if p in calibration)
    return PQCSpec(n, n_layers, rotation_set, entangler, linear_map(n), overrides)


@lru_cache(maxsize=256)
def _pair_unitaries(spec: PQCSpec) -> tuple[np.ndarray, ...]:
    overrides = dict(spec.pair_coefficients)
    shared = entangler_unitary(spec.entangler)
    out = []
    for pair in spec.entanglement_map:
        if pair in overrides:
            u = entangler_unitary(spec.entangler.with_coefficients(overrides[pair]))
        else:
            u = shared
        u.setflags(write=False)
        out.append(u)
    return tuple(out)


def prepare_states(spec: PQCSpec, params: np.ndarray) -> np.ndarray:
    """Batched state preparation; ``params`` has shape (B, P), result (B, 2**n)."""
    params = np.asarray(params, dtype=float)
    if params.ndim != 2 or params.shape[1] != spec.parameter_count:
        raise ValueError(
            f"expected parameters of shape (B, {spec.parameter_count}), got {params.shape}")
    n = spec.n_qubits
    states = np.zeros((params.shape[0], 2**n), dtype=complex)
    states[:, 0] = 1.0
    unitaries = spec.pair_unitaries()
    idx = 0
    for layer in range(spec.n_layers + 1):
        for q in range(n):
            for axis in spec.axes:
                states = apply_single_batched(states, rotation_gates(axis, params[:, idx]), q)
                idx += 1
        if layer < spec.n_layers:
            for pair, u in zip(spec.entanglement_map, unitaries):
                states = apply_unitary(states, u, pair)
    return states


def prepare_state(spec: PQCSpec, params) -> np.ndarray:
    """``U(theta)|0...0>`` for one parameter vector."""
    params = np.asarray(params, dtype=float)
    if params.shape != (spec.parameter_count,):
        raise ValueError(
            f"expected {spec.parameter_count} parameters, got {params.size}")
    return prepare_states(spec, params[None, :])[0]


def gate_counts(spec: PQCSpec) -> dict[str, int]:
    return {
        "single_qubit": spec.n_qubits * (spec.n_layers + 1) * len(spec.axes),
        "two_qubit": spec.n_layers * len(spec.entanglement_map),
    }


def circuit_depth(spec: PQCSpec) -> int:
    """Depth with the entangling chain executed serially."""
    slots = len(spec.axes)
    return spec.n_layers * (slots + len(spec.entanglement_map)) + slots


@dataclass(frozen=True)
class DurationModel:
    single_qubit_ns: float
    entangler_ns_per_pair: float
    scheduling: Literal["serial_layers"] = "serial_layers"

    def __post_init__(self):
        if self.single_qubit_ns <= 0 or self.entangler_ns_per_pair <= 0:
            raise ValueError("gate durations must be positive")

    @classmethod
    def from_calibration(cls, calibration: Mapping[tuple[int, int], PairCalibration],
                         entangler: Entangler, pairs=None) -> "DurationModel":
        """Average single-qubit and entangler durations over ``pairs``."""
        pairs = list(pairs) if pairs is not None else list(calibration)
        recs = [calibration[p] for p in pairs]
        if not recs:
            raise ValueError("no calibration records for the requested pairs")
        ent = []
        for r in recs:
            if entangler.kind == "cnot":
                ent.append(r.cnot_duration_ns)
            elif entangler.kind == "cr_angle":
                ent.append(r.cr_ang_duration_ns if r.cr_ang_duration_ns is not None
                           else duration_for_zx_angle(r.coefficients, entangler.angle))
            else:
                ent.append(r.cr_dur_duration_ns if r.cr_dur_duration_ns is not None
                           else entangler.duration)
        return cls(float(np.mean([r.single_qubit_duration_ns for r in recs])), float(np.mean(ent)))


def estimate_duration(spec: PQCSpec, model: DurationModel) -> float:
    """Schedule length in ns, measurement excluded."""
    slots = len(spec.axes)
    per_layer = slots * model.single_qubit_ns + len(spec.entanglement_map) * model.entangler_ns_per_pair
    return spec.n_layers * per_layer + slots * model.single_qubit_ns


# --- JSON ---------------------------------------------------------------------

def spec_to_dict(spec: PQCSpec) -> dict:
    d = {
        "n": spec.n_qubits,
        "layers": spec.n_layers,
        "rotations": spec.rotation_set,
        "entangler": spec.entangler.to_dict(),
    }
    if spec.pair_coefficients:
        d["pair_coefficients"] = [
            {"pair": list(p), **c.as_dict()} for p, c in spec.pair_coefficients]
    return d


def spec_from_dict(d: Mapping, base_dir: str | Path | None = None) -> PQCSpec:
    ent = d.get("entangler", "cnot")
    entangler = Entangler.from_dict({"kind": ent} if isinstance(ent, str) else ent)
    calibration = None
    if d.get("calibration"):
        path = Path(d["calibration"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        calibration = load_calibration(path)
    spec = build_pqc(int(d["n"]), int(d["layers"]), d.get("rotations", "RY"), entangler, calibration)
    if d.get("pair_coefficients"):
        overrides = tuple(
            (tuple(rec["pair"]), CRCoefficients(**{k: v for k, v in rec.items() if k != "pair"}))
            for rec in d["pair_coefficients"])
        spec = PQCSpec(spec.n_qubits, spec.n_layers, spec.rotation_set, spec.entangler,
                       spec.entanglement_map, overrides)
    return spec


def load_spec(path: str | Path) -> PQCSpec:
    path = Path(path)
    return spec_from_dict(json.loads(path.read_text()), base_dir=path.parent)
