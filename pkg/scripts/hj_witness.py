"""Generalized Hamilton-Jacobi check for a free particle with linear drag:
S = exp(-gamma t) x solves the drag-corrected system but not the classical
equation. Prints both residuals for a few drag rates."""
import argparse

from hamflow import hj
from hamflow.mechanics import NormalForm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.0, 0.1, 0.5, 2.0])
    ap.add_argument("--points", type=int, default=128)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()

    pts = hj.sample_tx(1, args.points, args.seed)
    print(f"{'gamma':>6} {'generalized':>12} {'classical':>10}")
    for gamma in args.gammas:
        S = hj.GeneratingFunction.from_text(f"exp(-{gamma!r}*t)*x1")
        drag = NormalForm.from_text("p1^2/2", [(f"-{gamma!r}*p1", "x1")])
        generalized = hj.gradient_hj_residual(S, drag, pts)
        classical = hj.gradient_hj_residual(S, NormalForm.from_text("p1^2/2"), pts)
        print(f"{gamma:6.2f} {generalized:12.2e} {classical:10.2e}")


if __name__ == "__main__":
    main()
