"""Canonical symplectic structure on the momentum chart (t, x, p).

Sign conventions: the symplectic form is ``dp_i ^ dx^i`` and the interior
product is ``i_X Omega = X_i dx^i - X^i dp_i``.  The symplectic gradient is the
vector field dual to ``df`` under that pairing,

    grad f = -(df/dp_i) d/dx^i + (df/dx^i) d/dp_i,

so that ``grad x^i = d/dp_i``, ``grad p_i = -d/dx^i`` and
``grad {f, g} = [grad f, grad g]`` with
``{f, g} = df/dx^i dg/dp_i - df/dp_i dg/dx^i``.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from hamflow.errors import ChartMismatchError, NonZeroDtError
from hamflow.expr import ChartKind, ChartSpec, ScalarField, as_field
from hamflow.sampling import DEFAULT_SEED, point_dicts, sample_points


def _require_momentum(chart: ChartSpec):
    if chart.kind is not ChartKind.MOMENTUM:
        raise ChartMismatchError(f"expected a momentum chart, got {chart}")


def _same_chart(*items):
    charts = {item.chart for item in items}
    if len(charts) != 1:
        raise ChartMismatchError(f"fields live on different charts: {sorted(map(str, charts))}")
    return charts.pop()


class _Components:
    """Shared plumbing for objects with (t, x_1..x_n, p_1..p_n) components."""

    chart: ChartSpec
    t: ScalarField
    x: tuple[ScalarField, ...]
    p: tuple[ScalarField, ...]

    def _check(self):
        _require_momentum(self.chart)
        n = self.chart.dimension
        if len(self.x) != n or len(self.p) != n:
            raise ValueError(f"expected {n} x and p components, got {len(self.x)} and {len(self.p)}")
        _same_chart(self.t, *self.x, *self.p)

    @property
    def components(self) -> tuple[ScalarField, ...]:
        return (self.t,) + tuple(self.x) + tuple(self.p)

    def eval(self, point) -> np.ndarray:
        env = point if isinstance(point, dict) else self.chart.point(point)
        return np.array([c.eval(env) for c in self.components])

    def _rebuild(self, comps):
        n = self.chart.dimension
        return type(self)(self.chart, comps[0], tuple(comps[1:n + 1]), tuple(comps[n + 1:]))

    def __add__(self, other):
        _same_chart(self, other)
        return self._rebuild([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        _same_chart(self, other)
        return self._rebuild([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return self._rebuild([-a for a in self.components])

    def scale(self, factor: Union[ScalarField, float]):
        return self._rebuild([factor * a for a in self.components])

    __rmul__ = scale

    def __str__(self):
        return ", ".join(f"{name}: {c}" for name, c in zip(self.chart.coordinates, self.components))


@dataclass(frozen=True)
class PhaseVectorField(_Components):
    """X = X^t d/dt + X^i d/dx^i + X_i d/dp_i."""

    chart: ChartSpec
    t: ScalarField
    x: tuple[ScalarField, ...]
    p: tuple[ScalarField, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "p", tuple(self.p))
        self._check()

    @classmethod
    def from_components(cls, chart: ChartSpec, t=0.0, x=None, p=None) -> "PhaseVectorField":
        n = chart.dimension
        x = x if x is not None else [0.0] * n
        p = p if p is not None else [0.0] * n
        return cls(chart, as_field(t, chart), tuple(as_field(c, chart) for c in x),
                   tuple(as_field(c, chart) for c in p))

    @classmethod
    def zero(cls, chart: ChartSpec) -> "PhaseVectorField":
        return cls.from_components(chart)

    @classmethod
    def basis(cls, chart: ChartSpec, coord: str) -> "PhaseVectorField":
        comps = [0.0] * len(chart.coordinates)
        comps[chart.index[coord]] = 1.0
        n = chart.dimension
        return cls.from_components(chart, comps[0], comps[1:n + 1], comps[n + 1:])

    def apply(self, f: ScalarField) -> ScalarField:
        """Directional derivative X(f) = sum_k X^k df/dcoord_k."""
        _same_chart(self, f)
        total = ScalarField.constant(self.chart, 0.0)
        for coord, comp in zip(self.chart.coordinates, self.components):
            if comp.is_zero:
                continue
            total = total + comp * f.diff(coord)
        return total


@dataclass(frozen=True)
class OneForm(_Components):
    """alpha = a_t dt + a_i dx^i + a^i dp_i."""

    chart: ChartSpec
    t: ScalarField
    x: tuple[ScalarField, ...]
    p: tuple[ScalarField, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "p", tuple(self.p))
        self._check()

    @classmethod
    def from_components(cls, chart: ChartSpec, t=0.0, x=None, p=None) -> "OneForm":
        return PhaseVectorField.from_components.__func__(cls, chart, t, x, p)

    def pair(self, X: PhaseVectorField) -> ScalarField:
        """alpha(X) as a scalar field."""
        _same_chart(self, X)
        total = ScalarField.constant(self.chart, 0.0)
        for a, b in zip(self.components, X.components):
            total = total + a * b
        return total


def exterior_derivative(f: ScalarField) -> OneForm:
    _require_momentum(f.chart)
    c = f.chart
    return OneForm(c, f.diff("t"), tuple(f.diff(x) for x in c.x_names),
                   tuple(f.diff(p) for p in c.fiber_names))


def interior_product(X: PhaseVectorField) -> OneForm:
    """i_X Omega = X_i dx^i - X^i dp_i; the d/dt component drops out."""
    zero = ScalarField.constant(X.chart, 0.0)
    return OneForm(X.chart, zero, X.p, tuple(-c for c in X.x))


def iota_inverse(alpha: OneForm, seed: int = DEFAULT_SEED) -> PhaseVectorField:
    """The unique X with t-component 0 and i_X Omega = alpha."""
    if not alpha.t.is_zero:
        for env in point_dicts(alpha.chart, sample_points(alpha.chart, 16, seed)):
            try:
                value = alpha.t.eval(env)
            except ArithmeticError:
                continue
            if value != 0.0:
                raise NonZeroDtError(
                    f"1-form has a dt component ({alpha.t}) that is outside the image of iota"
                )
    zero = ScalarField.constant(alpha.chart, 0.0)
    return PhaseVectorField(alpha.chart, zero, tuple(-c for c in alpha.p), alpha.x)


def symplectic_gradient(f: ScalarField) -> PhaseVectorField:
    _require_momentum(f.chart)
    c = f.chart
    zero = ScalarField.constant(c, 0.0)
    return PhaseVectorField(c, zero, tuple(-f.diff(p) for p in c.fiber_names),
                            tuple(f.diff(x) for x in c.x_names))


def poisson_bracket(f: ScalarField, g: ScalarField) -> ScalarField:
    """{f, g} = df/dx^i dg/dp_i - df/dp_i dg/dx^i."""
    chart = _same_chart(f, g)
    _require_momentum(chart)
    total = ScalarField.constant(chart, 0.0)
    for x, p in zip(chart.x_names, chart.fiber_names):
        total = total + (f.diff(x) * g.diff(p) - f.diff(p) * g.diff(x))
    return total


def omega(X: PhaseVectorField, Y: PhaseVectorField, point) -> float:
    """Omega(X, Y) = (i_X Omega)(Y) at a point."""
    _same_chart(X, Y)
    n = X.chart.dimension
    a, b = X.eval(point), Y.eval(point)
    return float(a[n + 1:] @ b[1:n + 1] - a[1:n + 1] @ b[n + 1:])


def poisson_via_omega(f: ScalarField, g: ScalarField, point) -> float:
    """{f, g} through the 2-form: Omega(grad g, grad f) = dg(grad f).

    The argument order is forced by the sign conventions in the module
    docstring.
    """
    _same_chart(f, g)
    return omega(symplectic_gradient(g), symplectic_gradient(f), point)


def lie_bracket(X: PhaseVectorField, Y: PhaseVectorField) -> PhaseVectorField:
    """[X, Y]^k = X(Y^k) - Y(X^k) over all 2n+1 coordinates."""
    _same_chart(X, Y)
    comps = [X.apply(yk) - Y.apply(xk) for xk, yk in zip(X.components, Y.components)]
    return X._rebuild(comps)


@dataclass(frozen=True)
class NormalFormVectorField:
    """a = grad f + sum_a mu_a grad v^a."""

    f: ScalarField
    terms: tuple[tuple[ScalarField, ScalarField], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((mu, v) for mu, v in self.terms))
        _same_chart(self.f, *[g for pair in self.terms for g in pair])
        _require_momentum(self.f.chart)

    @property
    def chart(self) -> ChartSpec:
        return self.f.chart


def realize(a: NormalFormVectorField) -> PhaseVectorField:
    X = symplectic_gradient(a.f)
    for mu, v in a.terms:
        X = X + symplectic_gradient(v).scale(mu)
    return X


def bracket_decomposition(a: NormalFormVectorField, b: NormalFormVectorField) -> PhaseVectorField:
    """Right-hand side of the generalized bracket decomposition of [a, b].

    With a = grad f + mu_a grad v^a and b = grad g + rho_A grad sigma^A:

        [a, b] = grad{f,g} + rho_A grad{f,sigma^A} + mu_a grad{v^a,g}
                 + mu_a rho_A grad{v^a,sigma^A}
                 - ((grad g) mu_a + rho_A (grad sigma^A) mu_a) grad v^a
                 + ((grad f) rho_A + mu_a (grad v^a) rho_A) grad sigma^A
    """
    _same_chart(a.f, b.f)
    grad = symplectic_gradient
    pb = poisson_bracket
    f, g = a.f, b.f
    result = grad(pb(f, g))
    for rho, sigma in b.terms:
        result = result + grad(pb(f, sigma)).scale(rho)
    for mu, v in a.terms:
        result = result + grad(pb(v, g)).scale(mu)
        for rho, sigma in b.terms:
            result = result + grad(pb(v, sigma)).scale(mu * rho)
    grad_f, grad_g = grad(f), grad(g)
    for mu, v in a.terms:
        coeff = grad_g.apply(mu)
        for rho, sigma in b.terms:
            coeff = coeff + rho * grad(sigma).apply(mu)
        result = result - grad(v).scale(coeff)
    for rho, sigma in b.terms:
        coeff = grad_f.apply(rho)
        for mu, v in a.terms:
            coeff = coeff + mu * grad(v).apply(rho)
        result = result + grad(sigma).scale(coeff)
    return result


def max_componentwise_difference(X: PhaseVectorField, Y: PhaseVectorField,
                                 points: Sequence) -> float:
    """Max |X - Y| over components and points, skipping domain errors."""
    _same_chart(X, Y)
    worst = 0.0
    for env in points:
        try:
            worst = max(worst, float(np.max(np.abs(X.eval(env) - Y.eval(env)))))
        except ArithmeticError:
            continue
    return worst
