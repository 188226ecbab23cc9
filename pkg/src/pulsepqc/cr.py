"""Cross-resonance effective Hamiltonian and the entanglers built from it.

Coefficients are frequencies in MHz; durations are in ns. The Hamiltonian
carries the 2*pi factor, so ``exp(-i H t)`` with ``t`` in ns and ``H`` in
rad/ns needs the 1e-3 MHz*ns conversion applied in :func:`build_cr_hamiltonian`.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Literal, Mapping

import numpy as np

from .sim import I2, X, Y, Z, kron

# 1 MHz * 1 ns = 1e-3 cycles
MHZ_NS = 1e-3
FREQ_BOUND_MHZ = 1000.0
MAX_DURATION_NS = 10000.0
DEFAULT_CR_DURATION_NS = 150.0
CALIBRATION_ENV = "PULSEPQC_CALIBRATION"

COEFF_NAMES = ("f_zi", "f_zx", "f_zy", "f_zz", "f_ix", "f_iy", "f_iz")


@dataclass(frozen=True)
class CRCoefficients:
    """The seven CR Hamiltonian strengths, in MHz."""

    f_zi: float = 0.0
    f_zx: float = 0.0
    f_zy: float = 0.0
    f_zz: float = 0.0
    f_ix: float = 0.0
    f_iy: float = 0.0
    f_iz: float = 0.0

    def __post_init__(self):
        for name in COEFF_NAMES:
            v = getattr(self, name)
            if not math.isfinite(v) or abs(v) >= FREQ_BOUND_MHZ:
                raise ValueError(f"{name}={v!r} MHz outside the sanity bound")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def target_field(self, control: int) -> np.ndarray:
        """Effective target-qubit field (MHz) with the control fixed in ``|control>``."""
        s = 1.0 if control == 0 else -1.0
        return np.array([
            self.f_ix + s * self.f_zx,
            self.f_iy + s * self.f_zy,
            self.f_iz + s * self.f_zz,
        ])

    @classmethod
    def from_target_fields(cls, field0, field1, f_zi: float = 0.0) -> "CRCoefficients":
        f0 = np.asarray(field0, dtype=float)
        f1 = np.asarray(field1, dtype=float)
        zx, zy, zz = (f0 - f1) / 2
        ix, iy, iz = (f0 + f1) / 2
        return cls(f_zi=float(f_zi), f_zx=float(zx), f_zy=float(zy), f_zz=float(zz),
                   f_ix=float(ix), f_iy=float(iy), f_iz=float(iz))


def build_cr_hamiltonian(c: CRCoefficients) -> np.ndarray:
    """``2*pi*(Z(x)A/2 + I(x)B/2)`` in rad/ns, control qubit first."""
    a = c.f_zi * I2 + c.f_zx * X + c.f_zy * Y + c.f_zz * Z
    b = c.f_ix * X + c.f_iy * Y + c.f_iz * Z
    return 2 * np.pi * MHZ_NS * (kron(Z, a) + kron(I2, b)) / 2


def _block(phase_freq: float, fld: np.ndarray, duration: float) -> np.ndarray:
    # exp(-i*pi*t*(f*I + fld.sigma)), t in ns and frequencies in MHz
    t = np.pi * MHZ_NS * duration
    norm = float(np.linalg.norm(fld))
    out = np.cos(norm * t) * I2
    if norm > 0:
        nx, ny, nz = fld / norm
        out = out - 1j * np.sin(norm * t) * (nx * X + ny * Y + nz * Z)
    return np.exp(-1j * phase_freq * t) * out


def cr_unitary(c: CRCoefficients, duration: float) -> np.ndarray:
    """``exp(-i H t)`` assembled from the two control-Z blocks in closed form."""
    if not (math.isfinite(duration) and duration >= 0):
        raise ValueError(f"duration must be finite and non-negative, got {duration!r}")
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = _block(c.f_zi, c.target_field(0), duration)
    u[2:, 2:] = _block(-c.f_zi, c.target_field(1), duration)
    return u


def duration_for_zx_angle(c: CRCoefficients, theta: float) -> float:
    """CR tone length (ns) whose ZX term alone rotates by ``theta``."""
    if c.f_zx == 0:
        raise ValueError("f_zx is zero: no entangling rate to time against")
    if theta <= 0:
        raise ValueError("theta must be positive")
    return abs(theta / (2 * np.pi * c.f_zx * MHZ_NS))


def cnot_unitary() -> np.ndarray:
    u = np.eye(4, dtype=complex)
    u[2:, 2:] = X
    return u


def rzx(theta: float) -> np.ndarray:
    """``exp(-i theta ZX / 2)``."""
    zx = kron(Z, X)
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * zx


EntanglerName = Literal["cnot", "cr_angle", "cr_duration"]


@dataclass(frozen=True)
class Entangler:
    """Which two-qubit gate a PQC uses between neighbours.

    ``angle`` applies to ``cr_angle`` and ``duration`` to ``cr_duration``.
    ``coefficients`` is the shared CR record; CNOT ignores it.
    """

    kind: EntanglerName
    angle: float = np.pi / 4
    duration: float = DEFAULT_CR_DURATION_NS
    coefficients: CRCoefficients = field(default_factory=CRCoefficients)

    def __post_init__(self):
        if self.kind not in ("cnot", "cr_angle", "cr_duration"):
            raise ValueError(f"unknown entangler kind {self.kind!r}")
        if self.kind == "cr_angle" and not 0 < self.angle <= np.pi:
            raise ValueError("cr_angle angle must lie in (0, pi]")
        if self.kind == "cr_duration" and not 0 < self.duration <= MAX_DURATION_NS:
            raise ValueError(f"cr_duration must lie in (0, {MAX_DURATION_NS}] ns")

    @classmethod
    def cnot(cls) -> "Entangler":
        return cls("cnot")

    @classmethod
    def cr_angle(cls, coefficients: CRCoefficients | None = None,
                 angle: float = np.pi / 4) -> "Entangler":
        return cls("cr_angle", angle=angle,
                   coefficients=coefficients or default_coefficients())

    @classmethod
    def cr_duration(cls, coefficients: CRCoefficients | None = None,
                    duration: float = DEFAULT_CR_DURATION_NS) -> "Entangler":
        return cls("cr_duration", duration=duration,
                   coefficients=coefficients or default_coefficients())

    @property
    def label(self) -> str:
        return {"cnot": "base", "cr_angle": "cp_ang", "cr_duration": "cp_dur"}[self.kind]

    def with_coefficients(self, coefficients: CRCoefficients) -> "Entangler":
        return Entangler(self.kind, self.angle, self.duration, coefficients)

    def gate_time(self) -> float:
        """Duration of the CR tone that produces the unitary (0 for CNOT)."""
        if self.kind == "cnot":
            return 0.0
        if self.kind == "cr_angle":
            return duration_for_zx_angle(self.coefficients, self.angle)
        return self.duration

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "cr_angle":
            d["angle"] = self.angle
        if self.kind == "cr_duration":
            d["duration"] = self.duration
        if self.kind != "cnot":
            d["coefficients"] = self.coefficients.as_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Entangler":
        coeffs = d.get("coefficients")
        if d["kind"] == "cnot":
            return cls.cnot()
        return cls(
            d["kind"],
            angle=float(d.get("angle", np.pi / 4)),
            duration=float(d.get("duration", DEFAULT_CR_DURATION_NS)),
            coefficients=CRCoefficients(**coeffs) if coeffs else default_coefficients(),
        )


def entangler_unitary(kind: Entangler) -> np.ndarray:
    if kind.kind == "cnot":
        return cnot_unitary()
    return cr_unitary(kind.coefficients, kind.gate_time())


# --- calibration files -------------------------------------------------------

@dataclass(frozen=True)
class PairCalibration:
    pair: tuple[int, int]
    coefficients: CRCoefficients
    cnot_duration_ns: float
    single_qubit_duration_ns: float
    cr_ang_duration_ns: float | None = None
    cr_dur_duration_ns: float | None = None


def parse_calibration(records: list, source: str = "<calibration>") -> dict[tuple[int, int], PairCalibration]:
    if not isinstance(records, list):
        raise ValueError(f"{source}: expected a JSON list of pair records")
    out: dict[tuple[int, int], PairCalibration] = {}
    for i, rec in enumerate(records):
        try:
            pair = tuple(int(q) for q in rec["pair"])
            if len(pair) != 2 or pair[0] == pair[1]:
                raise ValueError(f"bad pair {rec['pair']!r}")
            coeffs = CRCoefficients(**{k: float(rec[k]) for k in COEFF_NAMES})
            cal = PairCalibration(
                pair=pair,
                coefficients=coeffs,
                cnot_duration_ns=float(rec["cnot_duration_ns"]),
                single_qubit_duration_ns=float(rec["single_qubit_duration_ns"]),
                cr_ang_duration_ns=_opt_float(rec.get("cr_ang_duration_ns")),
                cr_dur_duration_ns=_opt_float(rec.get("cr_dur_duration_ns")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{source}: record {i}: {exc}") from None
        if pair in out:
            raise ValueError(f"{source}: duplicate record for pair {pair}")
        out[pair] = cal
    return out


def _opt_float(v) -> float | None:
    return None if v is None else float(v)


def load_calibration(path: str | Path | None = None) -> dict[tuple[int, int], PairCalibration]:
    """Load a calibration file; ``None`` means $PULSEPQC_CALIBRATION or the bundled default."""
    if path is None:
        path = os.environ.get(CALIBRATION_ENV)
    if path is None:
        text = resources.files("pulsepqc").joinpath("data/calibration_default.json").read_text()
        return parse_calibration(json.loads(text), "calibration_default.json")
    path = Path(path)
    return parse_calibration(json.loads(path.read_text()), str(path))


def default_coefficients() -> CRCoefficients:
    """Device-average CR strengths shipped with the package."""
    return _DEFAULT


_DEFAULT = CRCoefficients(
    f_zi=14.5783,
    f_zx=0.69645487,
    f_zy=-0.0112463,
    f_zz=-0.04056,
    f_ix=-0.1102794,
    f_iy=0.03167672,
    f_iz=0.03557382,
)
