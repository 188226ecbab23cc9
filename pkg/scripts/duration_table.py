"""Estimated schedule length of each entangler kind on linear chains.

    python3 scripts/duration_table.py --layers 5
"""
import argparse

from pulsepqc.cr import Entangler, load_calibration
from pulsepqc.pqc import DurationModel, build_pqc, estimate_duration, linear_map

KINDS = (Entangler.cnot(), Entangler.cr_angle(), Entangler.cr_duration())


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--rotations", choices=("RY", "RY_RZ"), default="RY")
    p.add_argument("--calibration", default=None, help="calibration JSON (default: bundled)")
    args = p.parse_args()
    cal = load_calibration(args.calibration)

    print(f"{'n':>2}  " + "  ".join(f"{k.label + ' ns':>10s}" for k in KINDS) + "  speedup(cp_dur)")
    for n in range(3, 10):
        t = [estimate_duration(build_pqc(n, args.layers, args.rotations, k),
                               DurationModel.from_calibration(cal, k, linear_map(n))) for k in KINDS]
        print(f"{n:>2}  " + "  ".join(f"{x:10.0f}" for x in t) + f"  {t[0] / t[2]:15.2f}")


if __name__ == "__main__":
    main()
