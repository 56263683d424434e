"""Contact fields p_i(t, x) and Hamilton-Jacobi residuals, classical and
generalized (pullback of Theta = dp_i ^ dx^i - eta ^ dt).

Derivatives written d_i below are total x-derivatives of composites such as
H(t, x, p(t, x)); they are assembled by the chain rule from symbolic partials
and evaluated numerically.
"""
from __future__ import annotations

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from hamflow.errors import ChartMismatchError
from hamflow.expr import ChartKind, ChartSpec, ScalarField, as_field, fd_step
from hamflow.mechanics.hamiltonian import NormalForm
from hamflow.mechanics.trajectory import Trajectory
from hamflow.sampling import DEFAULT_SEED

DEFAULT_POINTS = 128


def sample_tx(n: int, count: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED,
              box: Mapping[str, tuple[float, float]] | None = None,
              avoid_t_zero: bool = False) -> np.ndarray:
    """Seeded uniform (t, x1..xn) rows; t defaults to [0, 1], x to [-1, 1].

    With ``avoid_t_zero`` the default t range becomes [1, 2].
    """
    rng = np.random.default_rng(seed)
    box = dict(box or {})
    names = ["t"] + [f"x{i}" for i in range(1, n + 1)]
    unknown = set(box) - set(names)
    if unknown:
        raise ValueError(f"sample box names unknown coordinates {sorted(unknown)}")
    box.setdefault("t", (1.0, 2.0) if avoid_t_zero else (0.0, 1.0))
    lo = np.array([box.get(c, (-1.0, 1.0))[0] for c in names], dtype=float)
    hi = np.array([box.get(c, (-1.0, 1.0))[1] for c in names], dtype=float)
    return lo + (hi - lo) * rng.random((count, n + 1))


def _rows(points) -> np.ndarray:
    return np.atleast_2d(np.asarray(points, dtype=float))


@dataclass(frozen=True)
class ContactField:
    """p = p_i(t, x) dx^i, stored as fields on the momentum chart that do
    not depend on any momentum coordinate."""

    components: tuple[ScalarField, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("a contact field needs at least one component")
        chart = comps[0].chart
        if chart.kind is not ChartKind.MOMENTUM or len(comps) != chart.dimension:
            raise ValueError(f"need {chart.dimension} components on a momentum chart")
        for c in comps:
            if c.chart != chart:
                raise ChartMismatchError("contact field components are on different charts")
            if c.free_variables & set(chart.fiber_names):
                raise ValueError(f"contact field component {c} depends on a momentum coordinate")

    @classmethod
    def from_text(cls, components: Sequence[str], chart: ChartSpec | None = None) -> "ContactField":
        chart = chart or ChartSpec.momentum(len(components))
        return cls(tuple(as_field(c, chart) for c in components))

    @classmethod
    def gradient_of(cls, S: "GeneratingFunction") -> "ContactField":
        return cls(tuple(S.S.diff(x) for x in S.chart.x_names))

    @property
    def chart(self) -> ChartSpec:
        return self.components[0].chart

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    def env(self, row) -> dict[str, float]:
        """Phase-space point (t, x, p(t, x)) over an event (t, x)."""
        c = self.chart
        row = np.asarray(row, dtype=float).ravel()
        env = {"t": float(row[0])}
        env.update(zip(c.x_names, row[1:].tolist()))
        env.update(dict.fromkeys(c.fiber_names, 0.0))
        env.update(zip(c.fiber_names, [f.eval(env) for f in self.components]))
        return env

    def __call__(self, row) -> np.ndarray:
        env = self.env(row)
        return np.array([env[p] for p in self.chart.fiber_names])

    def compose(self, f: ScalarField, row) -> float:
        return f.eval(self.env(row))

    def total_dx(self, f: ScalarField, i: int, row) -> float:
        """d_i of f(t, x, p(t, x)) at an event, via the chain rule."""
        c = self.chart
        env = self.env(row)
        x = c.x_names[i]
        total = f.diff(x).eval(env)
        for pj_name, pj in zip(c.fiber_names, self.components):
            df = f.diff(pj_name)
            if df.is_zero:
                continue
            total += df.eval(env) * pj.diff(x).eval(env)
        return total


@dataclass(frozen=True)
class GeneratingFunction:
    """S(t, x); induces the contact field p_i = dS/dx^i."""

    S: ScalarField

    def __post_init__(self):
        if self.S.chart.kind is not ChartKind.MOMENTUM:
            raise ChartMismatchError("generating functions are parsed on the momentum chart")
        if self.S.free_variables & set(self.S.chart.fiber_names):
            raise ValueError(f"S = {self.S} depends on a momentum coordinate")

    @classmethod
    def from_text(cls, source: str, n: int = 1) -> "GeneratingFunction":
        return cls(as_field(source, ChartSpec.momentum(n)))

    @property
    def chart(self) -> ChartSpec:
        return self.S.chart

    @property
    def contact_field(self) -> ContactField:
        return ContactField.gradient_of(self)

    def value(self, row) -> float:
        return self.contact_field.compose(self.S, row)


def _as_contact(p) -> ContactField:
    return p.contact_field if isinstance(p, GeneratingFunction) else p


def closure_coefficients(p: ContactField, row) -> np.ndarray:
    """d_i p_j - d_j p_i for i < j, in lexicographic pair order."""
    c = p.chart
    env = p.env(row)
    grads = [[pj.diff(x).eval(env) for x in c.x_names] for pj in p.components]
    return np.array([grads[j][i] - grads[i][j] for i, j in itertools.combinations(range(c.dimension), 2)])


def closure_residual(p, points) -> float:
    p = _as_contact(p)
    if p.dimension == 1:
        return 0.0
    return max(float(np.max(np.abs(closure_coefficients(p, row)))) for row in _rows(points))


def _check_nf(p: ContactField, H_chart: ChartSpec):
    if p.chart != H_chart:
        raise ChartMismatchError(f"contact field chart {p.chart} does not match {H_chart}")


def hj_integrand(S: GeneratingFunction, H: ScalarField, row) -> float:
    """dS/dt + H(t, x, dS/dx) at an event."""
    p = S.contact_field
    _check_nf(p, H.chart)
    env = p.env(row)
    return S.S.diff("t").eval(env) + H.eval(env)


def hj_residual(S: GeneratingFunction, H: ScalarField, points) -> float:
    return max(abs(hj_integrand(S, H, row)) for row in _rows(points))


@dataclass(frozen=True)
class ThetaPullback:
    """Coefficients of p*Theta on (t, x) space.

    ``dt_dx(row)[i]`` is the coefficient of dt ^ dx^i,
        d p_i/dt + d_i H - mu_a d_i v^a;
    ``dx_dx(row)`` lists d_i p_j - d_j p_i for i < j.
    """

    p: ContactField
    nf: NormalForm

    def dt_dx(self, row) -> np.ndarray:
        p, nf = self.p, self.nf
        env = p.env(row)
        out = np.empty(p.dimension)
        for i in range(p.dimension):
            value = p.components[i].diff("t").eval(env) + p.total_dx(nf.H, i, row)
            for mu, v in nf.terms:
                value -= mu.eval(env) * p.total_dx(v, i, row)
            out[i] = value
        return out

    def dx_dx(self, row) -> np.ndarray:
        return closure_coefficients(self.p, row)


def pullback_theta(p, nf: NormalForm) -> ThetaPullback:
    p = _as_contact(p)
    _check_nf(p, nf.chart)
    return ThetaPullback(p, nf)


def generalized_hj_residual(p, nf: NormalForm, points) -> tuple[float, float]:
    """(max |dt ^ dx coefficients|, max |dx ^ dx coefficients|) of p*Theta."""
    theta = pullback_theta(p, nf)
    rows = _rows(points)
    a_max = max(float(np.max(np.abs(theta.dt_dx(row)))) for row in rows)
    return a_max, closure_residual(theta.p, rows)


def _fd_x_gradient(func, row) -> np.ndarray:
    row = np.asarray(row, dtype=float)
    out = np.empty(row.shape[0] - 1)
    for i in range(1, row.shape[0]):
        h = fd_step(row[i])
        hi, lo = row.copy(), row.copy()
        hi[i] += h
        lo[i] -= h
        out[i - 1] = (func(hi) - func(lo)) / (hi[i] - lo[i])
    return out


def gradient_hj_residual(S: GeneratingFunction, nf: NormalForm, points) -> float:
    """max |d_i(dS/dt + H) - mu_a d_i v^a| with p = grad_x S.

    Both x-derivatives are central finite differences of the composite
    functions, so this is independent of the chain-rule route in
    ``pullback_theta``.
    """
    p = S.contact_field
    _check_nf(p, nf.chart)
    worst = 0.0
    for row in _rows(points):
        lhs = _fd_x_gradient(lambda r: hj_integrand(S, nf.H, r), row)
        env = p.env(row)
        for mu, v in nf.terms:
            lhs -= mu.eval(env) * _fd_x_gradient(lambda r, v=v: p.compose(v, r), row)
        worst = max(worst, float(np.max(np.abs(lhs))))
    return worst


def dtheta_pullback_fd(p, H: ScalarField, row) -> np.ndarray:
    """dt ^ dx^i coefficients of d(p*theta), theta = p_i dx^i - H dt, by
    finite differences of the pulled-back 1-form."""
    p = _as_contact(p)
    row = np.asarray(row, dtype=float)
    h = fd_step(row[0])
    hi, lo = row.copy(), row.copy()
    hi[0] += h
    lo[0] -= h
    dp_dt = (p(hi) - p(lo)) / (hi[0] - lo[0])
    # d(a_t dt + a_i dx^i) has dt^dx^i coefficient d_t a_i - d_i a_t, a_t = -H(p)
    return dp_dt + _fd_x_gradient(lambda r: p.compose(H, r), row)


@dataclass(frozen=True)
class XiGroup:
    t: float
    values: np.ndarray

    @property
    def spread(self) -> float:
        return float(np.max(self.values) - np.min(self.values))


def xi_extraction(S: GeneratingFunction, H: ScalarField, points) -> list[XiGroup]:
    """dS/dt + H grouped by time; a zero spread in every group means the
    residual is a function of t alone."""
    groups: dict[float, list[float]] = {}
    for row in _rows(points):
        groups.setdefault(float(row[0]), []).append(hj_integrand(S, H, row))
    return [XiGroup(t, np.array(vals)) for t, vals in sorted(groups.items())]


def characteristics_residual(p, traj: Trajectory) -> float:
    """max |p(t) - p(t, x(t))| along a momentum-chart trajectory."""
    p = _as_contact(p)
    if traj.kind is not ChartKind.MOMENTUM or traj.dimension != p.dimension:
        raise ChartMismatchError("need a momentum-chart trajectory of matching dimension")
    field_values = np.array([p(np.concatenate([[t], x])) for t, x in zip(traj.times, traj.x)])
    return float(np.max(np.abs(traj.fiber - field_values)))
