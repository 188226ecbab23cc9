"""``pulsepqc`` command line: tomography, descriptor scans and VQE runs.

Each run writes into its own directory: data CSVs, a JSON result and a
``manifest.json`` describing how it was produced. Exit codes: 0 success,
2 invalid input, 3 fit non-convergence.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path

from . import __version__
from .cr import CALIBRATION_ENV, Entangler, load_calibration
from .descriptors import (default_cut, entropy_scan, expressibility, log_linear_fit, variance_scan,
                          write_rows_csv)
from .pauli import PauliParseError, load_hamiltonian
from .pqc import build_pqc
from .sim import exact_minimum_eigenvalue
from .tomography import (FitResult, default_durations, full_fit, read_series_csv, simulate_ht,
                         simulate_ramsey_zi, write_series_csv)
from .vqe import (SPSAConfig, brute_force_maxcut, evaluate_ranking, load_graph, maxcut_hamiltonian,
                  summary_json, vqe_run, write_trace_csv)

EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
ROTATIONS = {"ry": "RY", "ryrz": "RY_RZ"}
ENTANGLERS = ("cnot", "cr-ang", "cr-dur")

class InputError(Exception):
    """Invalid flags or input files; maps to exit code 2."""

def parse_range(text: str) -> list[int]:
    """``"3"``, ``"1..6"`` (inclusive) or ``"1,2,4"``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use N, A..B or A,B,C") from None

def make_entangler(name: str) -> Entangler:
    return {"cnot": Entangler.cnot, "cr-ang": Entangler.cr_angle,
            "cr-dur": Entangler.cr_duration}[name]()

def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()

def calibration_source(flag: str | None) -> tuple[str, str]:
    """(label, sha256) of the calibration the run will use."""
    path = flag or os.environ.get(CALIBRATION_ENV)
    if path:
        return str(path), file_digest(path)
    data = resources.files("pulsepqc").joinpath("data/calibration_default.json").read_bytes()
    return "<bundled>calibration_default.json", hashlib.sha256(data).hexdigest()

def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")

def write_manifest(out: Path, args, inputs: dict[str, str], started: float) -> None:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    _dump(out / "manifest.json", {
        "command": args.command,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "input_digests": inputs,
        "wall_time_s": round(time.perf_counter() - started, 3),
    })

# --- commands -----------------------------------------------------------------

def cmd_tomo(args, out: Path) -> tuple[dict, int]:
    inputs = {}
    if args.series:
        inputs[str(args.series)] = file_digest(args.series)
        series = read_series_csv(args.series, shots=args.shots)
        ht = [s for s in series if s.control_state != "+"]
        ramsey = [s for s in series if s.control_state == "+"]
    else:
        label, digest = calibration_source(args.calibration)
        inputs[label] = digest
        cal = load_calibration(args.calibration)
        pair = tuple(args.pair) if args.pair else next(iter(cal))
        if pair not in cal:
            raise InputError(f"pair {pair} not in calibration {label}")
        coeffs = cal[pair].coefficients
        grid = default_durations(args.durations, args.t_max)
        ht = simulate_ht(coeffs, grid, args.shots, args.seed)
        ramsey = simulate_ramsey_zi(coeffs, grid, args.shots, args.seed + 1)
    write_series_csv(out / "series.csv", ht + ramsey)
    res: FitResult = full_fit(ht, ramsey)
    (out / "fit.json").write_text(res.to_json())
    if not res.converged:
        print(f"fit did not converge: {res.message}", file=sys.stderr)
        return inputs, EXIT_NOT_CONVERGED
    return inputs, 0

def _specs(args, n: int, layers: int):
    cal = load_calibration(args.calibration)
    return [build_pqc(n, layers, ROTATIONS[args.rotations], make_entangler(e), cal)
            for e in args.entangler]

def cmd_expr(args, out: Path) -> tuple[dict, int]:
    label, digest = calibration_source(args.calibration)
    rows = []
    for n in args.qubits:
        for L in args.layers:
            for spec in _specs(args, n, L):
                r = expressibility(spec, args.samples, args.bins, args.seed, args.workers)
                rows.append((spec.entangler.label, n, L, "expr_kl_nats", r.expr, args.samples, args.seed))
    write_rows_csv(out / "expr.csv", rows)
    return {label: digest}, 0

def cmd_entropy(args, out: Path) -> tuple[dict, int]:
    label, digest = calibration_source(args.calibration)
    rows = []
    for n in args.qubits:
        cut = default_cut(n) if args.bipartition is None else args.bipartition
        for spec in _specs(args, n, 1):
            for L, s in entropy_scan(spec, args.layers, args.samples, cut, args.seed, args.workers):
                rows.append((spec.entangler.label, n, L, f"entropy_bits_cut{cut}", s, args.samples, args.seed))
    write_rows_csv(out / "entropy.csv", rows)
    return {label: digest}, 0

def cmd_variance(args, out: Path) -> tuple[dict, int]:
    label, digest = calibration_source(args.calibration)
    kinds = [make_entangler(e) for e in args.entangler]
    res = variance_scan(kinds, args.qubits, args.depth, args.cost, args.samples, args.seed,
                        ROTATIONS[args.rotations], args.workers)
    write_rows_csv(out / "variance.csv", [
        (r.kind, r.n_qubits, r.n_layers, f"grad_variance_{r.cost}", r.variance, r.n_samples, args.seed)
        for r in res])
    fits = {}
    for kind in dict.fromkeys(r.kind for r in res):
        pts = [(r.n_qubits, r.variance) for r in res if r.kind == kind]
        if len(pts) >= 2 and all(v > 0 for _, v in pts):
            slope, r2 = log_linear_fit(*zip(*pts))
            fits[kind] = {"slope_ln_per_qubit": slope, "r2": r2}
    _dump(out / "variance_fit.json", {"cost": args.cost, "depth": args.depth, "fits": fits})
    return {label: digest}, 0

def cmd_vqe(args, out: Path) -> tuple[dict, int]:
    inputs = {}
    ranking = None
    extra = {"problem": args.problem}
    if args.problem == "maxcut":
        if not args.graph:
            raise InputError("--problem maxcut needs --graph FILE")
        inputs[str(args.graph)] = file_digest(args.graph)
        problem = load_graph(args.graph)
        h = maxcut_hamiltonian(problem)
        best_cut, optimal = brute_force_maxcut(problem)
        exact = -best_cut
        extra["max_cut"] = best_cut
    else:
        if not args.ham:
            raise InputError("--problem hamiltonian needs --ham FILE")
        inputs[str(args.ham)] = file_digest(args.ham)
        h = load_hamiltonian(args.ham)
        exact, _ = exact_minimum_eigenvalue(h)
    label, digest = calibration_source(args.calibration)
    inputs[label] = digest
    spec = build_pqc(h.n_qubits, args.layers, ROTATIONS[args.rotations],
                     make_entangler(args.entangler), load_calibration(args.calibration))
    trace, state = vqe_run(spec, h, SPSAConfig(max_iterations=args.iters, seed=args.seed), args.shots)
    if args.problem == "maxcut":
        ranking = evaluate_ranking(state, optimal, args.top_k)
    extra.update(entangler=spec.entangler.label, layers=args.layers, rotations=spec.rotation_set,
                 iterations=args.iters, shots=args.shots, error=trace.best_value - exact)
    write_trace_csv(out / "trace.csv", trace)
    (out / "summary.json").write_text(summary_json(trace, exact, ranking, extra))
    return inputs, 0

# --- parser -------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, command: str) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help=f"output directory (default runs/{command})")
    p.add_argument("--calibration", default=None,
                   help=f"calibration JSON (default ${CALIBRATION_ENV} or the bundled file)")

def _scan(p: argparse.ArgumentParser, qubits: str, layers: str | None, samples: int) -> None:
    p.add_argument("--qubits", type=parse_range, default=parse_range(qubits))
    if layers is not None:
        p.add_argument("--layers", "--layer-range", dest="layers", type=parse_range,
                       default=parse_range(layers))
    p.add_argument("--entangler", nargs="+", choices=ENTANGLERS, default=["cnot"])
    p.add_argument("--rotations", choices=sorted(ROTATIONS), default="ry")
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pulsepqc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tomo", help="CR Hamiltonian tomography round trip")
    _common(p, "tomo")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--synthetic", action="store_true",
                     help="simulate from the default calibration (the default source)")
    src.add_argument("--series", type=Path, help="fit measured series from a CSV file")
    p.add_argument("--pair", type=int, nargs=2, default=None, help="calibration pair to simulate")
    p.add_argument("--durations", type=int, default=64)
    p.add_argument("--t-max", type=float, default=1200.0, help="ns")
    p.add_argument("--shots", type=int, default=0, help="0 means exact expectation values")
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("expr", help="expressibility scan")
    _common(p, "expr")
    _scan(p, "4", "1..6", 5000)
    p.add_argument("--bins", type=int, default=75)
    p.set_defaults(func=cmd_expr)

    p = sub.add_parser("entropy", help="entanglement entropy scan")
    _common(p, "entropy")
    _scan(p, "9", "1..8", 100)
    p.add_argument("--bipartition", type=int, default=None,
                   help="size of the leading block (default (n-1)//2)")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("variance", help="gradient variance scan")
    _common(p, "variance")
    _scan(p, "2..8", None, 200)
    p.add_argument("--cost", default="global", help="global or local:N_C")
    p.add_argument("--depth", choices=("shallow", "deep"), default="deep")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("vqe", help="VQE with SPSA on MaxCut or a Pauli-sum Hamiltonian")
    _common(p, "vqe")
    p.add_argument("--problem", choices=("maxcut", "hamiltonian"), default="maxcut")
    p.add_argument("--graph", type=Path)
    p.add_argument("--ham", type=Path)
    p.add_argument("--entangler", choices=ENTANGLERS, default="cnot")
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--rotations", choices=sorted(ROTATIONS), default="ry")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--shots", type=int, default=0, help="0 means exact expectation values")
    p.add_argument("--top-k", type=int, default=5)
    p.set_defaults(func=cmd_vqe)
    return ap

def _validate(args) -> None:
    for name in ("samples", "workers", "durations", "iters", "top_k", "bins"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise InputError(f"--{name.replace('_', '-')} must be >= 1")
    if getattr(args, "shots", 0) < 0:
        raise InputError("--shots must be >= 0")
    for name in ("calibration", "series", "graph", "ham"):
        v = getattr(args, name, None)
        if v is not None and not Path(v).is_file():
            raise InputError(f"no such file: {v}")

def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    out = args.out or Path("runs") / args.command
    args.out = str(out)
    try:
        _validate(args)
        out.mkdir(parents=True, exist_ok=True)
        inputs, code = args.func(args, out)
    except (InputError, PauliParseError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"pulsepqc {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    write_manifest(out, args, inputs, started)
    return code

if __name__ == "__main__":
    sys.exit(main())
