"""VQE over seeds: H2 ground energy and MaxCut fixtures for each entangler kind.

    python3 scripts/vqe_benchmarks.py --seeds 10
"""
import argparse
from pathlib import Path

import numpy as np

from pulsepqc.cr import Entangler
from pulsepqc.pauli import load_hamiltonian
from pulsepqc.pqc import build_pqc
from pulsepqc.sim import exact_minimum_eigenvalue
from pulsepqc.vqe import SPSAConfig, brute_force_maxcut, evaluate_ranking, load_graph, maxcut_hamiltonian, vqe_run

DATA = Path(__file__).resolve().parents[1] / "src" / "pulsepqc" / "data"
KINDS = (Entangler.cnot(), Entangler.cr_angle(), Entangler.cr_duration())
CHEMICAL_ACCURACY = 0.0016


def chemistry(args):
    h = load_hamiltonian(DATA / "h2_parity_2q.txt")
    exact, _ = exact_minimum_eigenvalue(h)
    print(f"H2 (2 qubits, RY_RZ, L={args.layers}), exact {exact:.6f} Ha")
    for kind in KINDS:
        errs = np.array([vqe_run(build_pqc(2, args.layers, "RY_RZ", kind), h,
                                 SPSAConfig(args.iters, seed=s), args.shots)[0].best_value - exact
                         for s in range(args.seeds)])
        hits = int(np.sum(np.abs(errs) < CHEMICAL_ACCURACY))
        print(f"  {kind.label:7s} median error {np.median(errs):.2e}  "
              f"within chemical accuracy {hits}/{args.seeds}")


def maxcut(args):
    for name in ("k3.txt", "ring5.txt", "near3reg9.txt"):
        problem = load_graph(DATA / name)
        best, optimal = brute_force_maxcut(problem)
        h = maxcut_hamiltonian(problem)
        print(f"MaxCut {name} ({problem.n_nodes} nodes), max cut {best:g}")
        for kind in KINDS:
            spec = build_pqc(problem.n_nodes, args.layers, "RY", kind)
            found, roca = [], []
            for s in range(args.seeds):
                tr, state = vqe_run(spec, h, SPSAConfig(args.iters, seed=s), args.shots)
                found.append(-tr.best_value)
                roca.append(evaluate_ranking(state, optimal, 5).roca)
            print(f"  {kind.label:7s} mean best cut {np.mean(found):.3f}  "
                  f"roca=1 in {roca.count(1)}/{args.seeds}  roca=0 in {roca.count(0)}/{args.seeds}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--shots", type=int, default=0)
    args = p.parse_args()
    chemistry(args)
    maxcut(args)


if __name__ == "__main__":
    main()
