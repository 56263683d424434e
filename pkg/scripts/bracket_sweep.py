"""Sweep the generalized bracket decomposition over random normal-form
fields: worst deviation from the direct Lie bracket per (n, p, p') cell."""
import argparse
import itertools

import numpy as np

from hamflow import geometry as G
from hamflow.expr import ChartSpec
from hamflow.sampling import point_dicts, random_polynomial, sample_points


def random_field(chart, rng, n_terms, degree):
    def poly():
        return random_polynomial(chart, rng, degree=degree, n_terms=3)
    return G.NormalFormVectorField(poly(), tuple((poly(), poly()) for _ in range(n_terms)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-terms", type=int, default=3)
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--trials", type=int, default=4)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--seed", type=int, default=1729)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>2} {'p':>2} {'q':>2} {'max dev':>10}")
    for n in args.dims:
        chart = ChartSpec.momentum(n)
        pts = point_dicts(chart, sample_points(chart, 64, args.seed))
        for p, q in itertools.product(range(args.max_terms + 1), repeat=2):
            worst = 0.0
            for _ in range(args.trials):
                a = random_field(chart, rng, p, args.degree)
                b = random_field(chart, rng, q, args.degree)
                lhs = G.bracket_decomposition(a, b)
                rhs = G.lie_bracket(G.realize(a), G.realize(b))
                worst = max(worst, G.max_componentwise_difference(lhs, rhs, pts))
            print(f"{n:2d} {p:2d} {q:2d} {worst:10.2e}")


if __name__ == "__main__":
    main()
