"""Normal forms eta = dH - mu_a dv^a and the generalized Hamilton equations
they generate."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from hamflow.errors import ChartMismatchError
from hamflow.expr import ChartKind, ChartSpec, ScalarField, as_field
from hamflow.geometry import OneForm, poisson_bracket
from hamflow.mechanics.numerics import rk4
from hamflow.mechanics.trajectory import Trajectory, time_derivative


@dataclass(frozen=True)
class NormalForm:
    """Hamiltonian H plus ordered correction pairs (mu_a, v^a)."""

    H: ScalarField
    terms: tuple[tuple[ScalarField, ScalarField], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((mu, v) for mu, v in self.terms))
        if self.H.chart.kind is not ChartKind.MOMENTUM:
            raise ChartMismatchError("a normal form lives on the momentum chart")
        for mu, v in self.terms:
            if mu.chart != self.H.chart or v.chart != self.H.chart:
                raise ChartMismatchError(f"term ({mu}, {v}) is not on {self.H.chart}")

    @classmethod
    def from_text(cls, H: str, terms: Sequence[tuple[str, str]] = (), n: int = 1) -> "NormalForm":
        chart = ChartSpec.momentum(n)
        return cls(as_field(H, chart), tuple((as_field(mu, chart), as_field(v, chart)) for mu, v in terms))

    @property
    def chart(self) -> ChartSpec:
        return self.H.chart

    def classical(self) -> "NormalForm":
        return NormalForm(self.H)

    def _corrected(self, coord: str) -> ScalarField:
        """dH/dcoord - mu_a dv^a/dcoord."""
        out = self.H.diff(coord)
        for mu, v in self.terms:
            out = out - mu * v.diff(coord)
        return out


def eta_components(nf: NormalForm) -> OneForm:
    c = nf.chart
    return OneForm(c, nf._corrected("t"), tuple(nf._corrected(x) for x in c.x_names),
                   tuple(nf._corrected(p) for p in c.fiber_names))


def eta_from_components(chart: ChartSpec, P, F: Sequence, v: Sequence) -> OneForm:
    """eta = -P dt - F_i dx^i + v^i dp_i from power, forces and velocities."""
    return OneForm(chart, -as_field(P, chart), tuple(-as_field(f, chart) for f in F),
                   tuple(as_field(w, chart) for w in v))


def normal_form_consistency(nf: NormalForm, eta_given: OneForm, points) -> float:
    if eta_given.chart != nf.chart:
        raise ChartMismatchError("given 1-form and normal form are on different charts")
    eta = eta_components(nf)
    worst = 0.0
    for row in points:
        worst = max(worst, float(np.max(np.abs(eta.eval(row) - eta_given.eval(row)))))
    return worst


class HamiltonSystem:
    """dx^i/dt = dH/dp_i - mu_a dv^a/dp_i,  dp_i/dt = -dH/dx^i + mu_a dv^a/dx^i."""

    def __init__(self, nf: NormalForm):
        c = nf.chart
        self.nf = nf
        self.chart = c
        self.xdot = tuple(nf._corrected(p) for p in c.fiber_names)
        self.pdot = tuple(-nf._corrected(x) for x in c.x_names)
        self._fields = [f.evaluator for f in self.xdot + self.pdot]

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        c = self.chart
        n = c.dimension
        env = {"t": t}
        env.update(zip(c.x_names, y[:n].tolist()))
        env.update(zip(c.fiber_names, y[n:].tolist()))
        return np.array([f(env) for f in self._fields])


def hamilton_rhs(nf: NormalForm, state) -> tuple[np.ndarray, np.ndarray]:
    """(dx/dt, dp/dt) at a state (t, x, p)."""
    t, x, p = state
    n = nf.chart.dimension
    y = np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)), np.atleast_1d(np.asarray(p, dtype=float))])
    dy = HamiltonSystem(nf).rhs(float(t), y)
    return dy[:n], dy[n:]


def classical_rhs(H: ScalarField, state) -> tuple[np.ndarray, np.ndarray]:
    """(dH/dp, -dH/dx) evaluated directly, for reduction checks."""
    t, x, p = state
    c = H.chart
    env = c.point(np.concatenate([[t], np.atleast_1d(x), np.atleast_1d(p)]))
    return (np.array([H.diff(q).eval(env) for q in c.fiber_names]),
            np.array([-H.diff(q).eval(env) for q in c.x_names]))


def integrate_hamilton(nf: NormalForm, initial: tuple, t1: float, h: float) -> Trajectory:
    """Fixed-step RK4 on the generalized Hamilton equations from (t0, x0, p0)."""
    t0, x0, p0 = initial
    n = nf.chart.dimension
    y0 = np.concatenate([np.atleast_1d(np.asarray(x0, dtype=float)), np.atleast_1d(np.asarray(p0, dtype=float))])
    if y0.shape[0] != 2 * n:
        raise ValueError(f"initial state needs {n} positions and {n} momenta")
    times, states, step = rk4(HamiltonSystem(nf).rhs, t0, y0, t1, h)
    return Trajectory(ChartKind.MOMENTUM, times, states, step)


def energy_rate_prediction(nf: NormalForm) -> ScalarField:
    """dH/dt = dH/dt(explicit) - mu_a {H, v^a} as a scalar field."""
    predicted = nf.H.diff("t")
    for mu, v in nf.terms:
        predicted = predicted - mu * poisson_bracket(nf.H, v)
    return predicted


def energy_balance_residual(nf: NormalForm, traj: Trajectory) -> float:
    """Max over interior samples of |measured dH/dt - predicted dH/dt|."""
    if traj.chart != nf.chart:
        raise ChartMismatchError("trajectory and normal form are on different charts")
    measured = time_derivative(traj.along(nf.H), traj.step)
    predicted = traj.along(energy_rate_prediction(nf))
    return float(np.max(np.abs(measured - predicted)[1:-1]))
