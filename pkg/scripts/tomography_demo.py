"""Synthesize CR tomography data for a calibration pair and fit it back.

    python3 scripts/tomography_demo.py --shots 1024
"""
import argparse

from pulsepqc.cr import load_calibration
from pulsepqc.tomography import default_durations, full_fit, simulate_ht, simulate_ramsey_zi

TERMS = ("f_zx", "f_zy", "f_zz", "f_ix", "f_iy", "f_iz", "f_zi")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--calibration", default=None)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--t-max", type=float, default=1200.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    grid = default_durations(args.points, args.t_max)
    for pair, rec in load_calibration(args.calibration).items():
        truth = rec.coefficients
        res = full_fit(simulate_ht(truth, grid, args.shots, args.seed),
                       simulate_ramsey_zi(truth, grid, args.shots, args.seed + 1))
        fit = res.coefficients
        errs = "  ".join(f"{k[2:]}:{getattr(fit, k) - getattr(truth, k):+.1e}" for k in TERMS)
        print(f"{pair}  converged={res.converged}  {errs}")


if __name__ == "__main__":
    main()
