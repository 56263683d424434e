"""Seeded sample points and random polynomial fields for pointwise checks."""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from hamflow import expr as E
from hamflow.expr import ChartSpec, ScalarField

DEFAULT_SEED = 1729
DEFAULT_COUNT = 64


def sample_points(chart: ChartSpec, count: int = DEFAULT_COUNT, seed: int = DEFAULT_SEED,
                  box: Mapping[str, tuple[float, float]] | None = None) -> np.ndarray:
    """Uniform points in a coordinate box, one row per point in chart order.

    Coordinates absent from ``box`` are drawn from [-1, 1].
    """
    rng = np.random.default_rng(seed)
    box = box or {}
    unknown = set(box) - set(chart.coordinates)
    if unknown:
        raise ValueError(f"sample box names unknown coordinates {sorted(unknown)}")
    lo = np.array([box.get(c, (-1.0, 1.0))[0] for c in chart.coordinates], dtype=float)
    hi = np.array([box.get(c, (-1.0, 1.0))[1] for c in chart.coordinates], dtype=float)
    return lo + (hi - lo) * rng.random((count, len(chart.coordinates)))


def point_dicts(chart: ChartSpec, points: np.ndarray) -> list[dict[str, float]]:
    return [dict(zip(chart.coordinates, row)) for row in np.asarray(points, dtype=float).tolist()]


def random_polynomial(chart: ChartSpec, rng: np.random.Generator, degree: int = 2,
                      n_terms: int = 4, include_t: bool = False, scale: float = 1.0) -> ScalarField:
    """Sum of ``n_terms`` random monomials of total degree <= ``degree``."""
    names = [c for c in chart.coordinates if include_t or c != "t"]
    body = E.ZERO
    for _ in range(n_terms):
        coeff = float(np.round(rng.uniform(-scale, scale), 3))
        term = E.Const(coeff)
        for _ in range(int(rng.integers(0, degree + 1))):
            term = E.mul(term, E.Var(str(rng.choice(names))))
        body = E.add(body, term)
    return ScalarField(chart, body)


_LEAF_CONSTANTS = (0.5, 1.0, 1.5, 2.0, 3.0)


def random_expression(chart: ChartSpec, rng: np.random.Generator, depth: int = 3) -> ScalarField:
    """Random expression tree using the full operator and function set.

    Divisions, logarithms, roots and reciprocal powers get arguments of the form ``c + e^2`` so
    most of [-1, 1]^(2n+1) is admissible; the remaining domain errors are left
    for callers to skip.
    """
    return ScalarField(chart, _random_node(chart, rng, depth))


def _random_node(chart, rng, depth):
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            return E.Var(str(rng.choice(chart.coordinates)))
        return E.Const(float(rng.choice(_LEAF_CONSTANTS)))
    kind = rng.choice(["+", "-", "*", "/", "^", "neg", "sin", "cos", "exp", "ln", "sqrt"])
    sub = lambda: _random_node(chart, rng, depth - 1)  # noqa: E731
    if kind in ("+", "-", "*"):
        return E.BinOp(kind, sub(), sub())
    if kind == "/":
        return E.BinOp("/", sub(), _positive(sub()))
    if kind == "^":
        exponent = float(rng.choice([2.0, 3.0, 0.5, -1.0]))
        base = sub() if exponent > 1 else _positive(sub())
        return E.BinOp("^", base, E.Const(exponent))
    if kind == "neg":
        return E.Neg(sub())
    if kind in ("ln", "sqrt"):
        return E.Call(str(kind), _positive(sub()))
    if kind == "exp":
        return E.Call("exp", E.BinOp("*", E.Const(0.5), sub()))
    return E.Call(str(kind), sub())


def _positive(node):
    return E.BinOp("+", E.Const(1.0), E.BinOp("^", node, E.Const(2.0)))
