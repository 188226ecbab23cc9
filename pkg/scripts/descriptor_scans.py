"""Expressibility, entanglement and gradient-variance scans for the three entangler kinds.

    python3 scripts/descriptor_scans.py --out results/descriptors --workers 4
"""
import argparse
from pathlib import Path

from pulsepqc.cr import Entangler
from pulsepqc.descriptors import (entropy_scan, expressibility, log_linear_fit, variance_scan,
                                  write_rows_csv)
from pulsepqc.pqc import build_pqc

KINDS = (Entangler.cnot(), Entangler.cr_angle(), Entangler.cr_duration())


def expr_rows(args):
    rows = []
    for kind in KINDS:
        for L in range(1, 7):
            spec = build_pqc(4, L, args.rotations, kind)
            r = expressibility(spec, args.expr_samples, 75, args.seed, args.workers)
            rows.append((kind.label, 4, L, "expr_kl_nats", r.expr, args.expr_samples, args.seed))
    return rows


def entropy_rows(args):
    rows = []
    for kind in KINDS:
        for L, s in entropy_scan(build_pqc(9, 1, args.rotations, kind), range(1, 9), 100,
                                 seed=args.seed, workers=args.workers):
            rows.append((kind.label, 9, L, "entropy_bits_cut4", s, 100, args.seed))
    return rows


def variance_rows(args):
    rows = []
    for depth, cost in (("deep", "global"), ("shallow", "local:1")):
        for r in variance_scan(KINDS, range(2, 9), depth, cost, 200, args.seed, args.rotations,
                               args.workers):
            rows.append((r.kind, r.n_qubits, r.n_layers, f"grad_variance_{depth}_{cost}", r.variance,
                         r.n_samples, args.seed))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("results/descriptors"))
    p.add_argument("--rotations", choices=("RY", "RY_RZ"), default="RY")
    p.add_argument("--expr-samples", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    results = {}
    for name, fn in (("expr", expr_rows), ("entropy", entropy_rows), ("variance", variance_rows)):
        rows = results[name] = fn(args)
        write_rows_csv(args.out / f"{name}.csv", rows)
        print(f"\n{name}")
        for kind, n, L, metric, value, *_ in rows:
            print(f"  {kind:7s} n={n} L={L:<3d} {metric:32s} {value:.5g}")

    print("\nlog-variance slopes")
    rows = results["variance"]
    for metric in sorted({r[3] for r in rows}):
        for kind in (k.label for k in KINDS):
            pts = [(r[1], r[4]) for r in rows if r[0] == kind and r[3] == metric]
            slope, r2 = log_linear_fit(*zip(*pts))
            print(f"  {metric:32s} {kind:7s} slope {slope:+.3f}/qubit  R2 {r2:.3f}")


if __name__ == "__main__":
    main()
