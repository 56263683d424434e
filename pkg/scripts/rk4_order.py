"""Endpoint error of RK4 on the harmonic oscillator over one period for a
sequence of halved steps, with observed convergence order."""
import argparse
import math

import numpy as np

from hamflow.mechanics import NormalForm, integrate_hamilton


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h0", type=float, default=0.2)
    ap.add_argument("--levels", type=int, default=6)
    args = ap.parse_args()

    nf = NormalForm.from_text("(x1^2+p1^2)/2")
    prev = None
    print(f"{'h':>10} {'error':>12} {'ratio':>8} {'order':>6}")
    for k in range(args.levels):
        h = args.h0 / 2 ** k
        traj = integrate_hamilton(nf, (0.0, [1.0], [0.0]), 2 * math.pi, h)
        err = float(np.linalg.norm(traj.states[-1] - [1.0, 0.0]))
        if prev is None:
            print(f"{traj.step:10.5f} {err:12.3e}")
        else:
            ratio = prev / err
            print(f"{traj.step:10.5f} {err:12.3e} {ratio:8.2f} {math.log2(ratio):6.2f}")
        prev = err


if __name__ == "__main__":
    main()
