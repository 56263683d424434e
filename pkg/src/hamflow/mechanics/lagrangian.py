"""Velocity-chart mechanics: action, first variation, Euler-Lagrange and
energy along sampled curves; fundamental 1-forms and the virtual work they
do; Newtonian / Lagrange-first-form equations of motion."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from hamflow.errors import ChartMismatchError, NonIntegrableTrajectoryError
from hamflow.expr import ChartKind, ChartSpec, ScalarField, as_field
from hamflow.mechanics.numerics import rk4, solve_checked
from hamflow.mechanics.trajectory import (
    Trajectory,
    VariationField,
    time_derivative,
    trapezoid,
)

INTEGRABILITY_TOL = 1e-4


def _require_velocity(f: ScalarField):
    if f.chart.kind is not ChartKind.VELOCITY:
        raise ChartMismatchError(f"expected a velocity chart, got {f.chart}")


def _check_traj(f: ScalarField, traj: Trajectory):
    _require_velocity(f)
    if traj.chart != f.chart:
        raise ChartMismatchError(f"trajectory chart {traj.chart} does not match {f.chart}")


def momentum_map(L: ScalarField) -> tuple[ScalarField, ...]:
    """p_i = dL/dv^i."""
    _require_velocity(L)
    return tuple(L.diff(v) for v in L.chart.fiber_names)


def mass_matrix(L: ScalarField) -> tuple[tuple[ScalarField, ...], ...]:
    """m_ij = d^2 L / dv^i dv^j."""
    return tuple(tuple(p.diff(v) for v in L.chart.fiber_names) for p in momentum_map(L))


def integrability_residual(traj: Trajectory) -> np.ndarray:
    """r^i(t_k) = v^i(t_k) - dx^i/dt(t_k), shape (K, n)."""
    if traj.kind is not ChartKind.VELOCITY:
        raise ChartMismatchError("integrability is defined for velocity-chart trajectories")
    return traj.fiber - time_derivative(traj.x, traj.step)


def action_value(L: ScalarField, traj: Trajectory, tol: float = INTEGRABILITY_TOL) -> float:
    """Trapezoid quadrature of L along an integrable curve."""
    _check_traj(L, traj)
    worst = float(np.max(np.abs(integrability_residual(traj))))
    if worst > tol:
        raise NonIntegrableTrajectoryError(
            f"trajectory is not integrable: max |v - dx/dt| = {worst:.3g} > {tol:.3g}"
        )
    return trapezoid(traj.along(L), traj.step)


def variational_derivative(L: ScalarField, traj: Trajectory) -> np.ndarray:
    """d/dt(dL/dv^i) - dL/dx^i at every sample, shape (K, n)."""
    _check_traj(L, traj)
    momenta = np.column_stack([traj.along(p) for p in momentum_map(L)])
    forces = np.column_stack([traj.along(L.diff(x)) for x in L.chart.x_names])
    return time_derivative(momenta, traj.step) - forces


def euler_lagrange_residual(L: ScalarField, traj: Trajectory) -> float:
    return float(np.max(np.abs(variational_derivative(L, traj)[1:-1])))


class Variation(NamedTuple):
    interior: float
    boundary: float

    @property
    def total(self) -> float:
        return self.interior + self.boundary


def _check_endpoints(endpoint, dx_values, bracket, tol):
    if endpoint is None:
        return
    if endpoint == "fixed":
        ends = np.abs(dx_values[[0, -1]])
        if np.max(ends) > tol:
            raise ValueError(f"fixed-endpoint variation does not vanish at the ends (max {np.max(ends):.3g})")
    elif endpoint == "transversality":
        ends = np.abs(bracket[[0, -1]])
        if np.max(ends) > tol:
            raise ValueError(f"boundary bracket does not vanish at the ends (max {np.max(ends):.3g})")
    else:
        raise ValueError(f"unknown endpoint condition {endpoint!r}")


def first_variation(L: ScalarField, traj: Trajectory, dx: VariationField,
                    endpoint: str | None = None, tol: float = 1e-12) -> Variation:
    """-int (dL/dx) . dx dt and [dL/dv . dx] from t0 to t1.

    ``endpoint`` may be "fixed" or "transversality" to require that the
    variation, respectively the boundary bracket, vanishes at both ends.
    """
    dx.check_span(traj)
    el = variational_derivative(L, traj)
    momenta = np.column_stack([traj.along(p) for p in momentum_map(L)])
    bracket = np.sum(momenta * dx.values, axis=1)
    _check_endpoints(endpoint, dx.values, bracket, tol)
    interior = -trapezoid(np.sum(el * dx.values, axis=1), traj.step)
    return Variation(interior, float(bracket[-1] - bracket[0]))


def total_energy(L: ScalarField, traj: Trajectory) -> np.ndarray:
    """E = dL/dv^i * v^i - L at every sample."""
    _check_traj(L, traj)
    momenta = np.column_stack([traj.along(p) for p in momentum_map(L)])
    return np.sum(momenta * traj.fiber, axis=1) - traj.along(L)


def energy_theorem_residual(L: ScalarField, traj: Trajectory) -> float:
    """max over interior samples of |dE/dt + dL/dt (explicit)|."""
    rate = time_derivative(total_energy(L, traj), traj.step)
    return float(np.max(np.abs(rate + traj.along(L.diff("t")))[1:-1]))


@dataclass(frozen=True)
class FundamentalForm:
    """phi = P dt + F_i dx^i + p_i dv^i on the velocity chart."""

    chart: ChartSpec
    P: ScalarField
    F: tuple[ScalarField, ...]
    p: tuple[ScalarField, ...]

    def __post_init__(self):
        object.__setattr__(self, "F", tuple(self.F))
        object.__setattr__(self, "p", tuple(self.p))
        if self.chart.kind is not ChartKind.VELOCITY:
            raise ChartMismatchError("a fundamental form lives on the velocity chart")
        n = self.chart.dimension
        if len(self.F) != n or len(self.p) != n:
            raise ValueError(f"expected {n} force and momentum components")
        for f in (self.P, *self.F, *self.p):
            if f.chart != self.chart:
                raise ChartMismatchError(f"component {f} is not on {self.chart}")

    @classmethod
    def from_components(cls, chart: ChartSpec, P, F: Sequence, p: Sequence) -> "FundamentalForm":
        return cls(chart, as_field(P, chart), tuple(as_field(f, chart) for f in F),
                   tuple(as_field(q, chart) for q in p))

    @classmethod
    def from_lagrangian(cls, L: ScalarField) -> "FundamentalForm":
        """phi = dL."""
        _require_velocity(L)
        c = L.chart
        return cls(c, L.diff("t"), tuple(L.diff(x) for x in c.x_names), momentum_map(L))

    @classmethod
    def lagrange_first_form(cls, T: ScalarField, Q: Sequence) -> "FundamentalForm":
        """F_i = Q_i + dT/dx^i, p_i = dT/dv^i."""
        _require_velocity(T)
        c = T.chart
        Q = [as_field(q, c) for q in Q]
        if len(Q) != c.dimension:
            raise ValueError(f"expected {c.dimension} generalized forces")
        return cls(c, T.diff("t"), tuple(q + T.diff(x) for q, x in zip(Q, c.x_names)), momentum_map(T))


def virtual_work_total(phi: FundamentalForm, traj: Trajectory, dx: VariationField) -> Variation:
    """int (F_i - dp_i/dt) dx^i dt and [p_i dx^i] along the 1-jet prolongation."""
    if traj.chart != phi.chart:
        raise ChartMismatchError("trajectory and fundamental form are on different charts")
    dx.check_span(traj)
    forces = np.column_stack([traj.along(f) for f in phi.F])
    momenta = np.column_stack([traj.along(q) for q in phi.p])
    unbalanced = forces - time_derivative(momenta, traj.step)
    interior = trapezoid(np.sum(unbalanced * dx.values, axis=1), traj.step)
    bracket = np.sum(momenta * dx.values, axis=1)
    return Variation(interior, float(bracket[-1] - bracket[0]))


def newtonian_residual(phi: FundamentalForm, traj: Trajectory) -> float:
    """max over interior samples of |F_i - dp_i/dt|."""
    if traj.chart != phi.chart:
        raise ChartMismatchError("trajectory and fundamental form are on different charts")
    forces = np.column_stack([traj.along(f) for f in phi.F])
    momenta = np.column_stack([traj.along(q) for q in phi.p])
    return float(np.max(np.abs(forces - time_derivative(momenta, traj.step))[1:-1]))


class NewtonianSystem:
    """Equations of motion F_i = dp_i/dt for a fundamental form.

    Expanding dp_i/dt along an integrable curve gives the linear system
    (dp_i/dv^j) a^j = F_i - dp_i/dt - (dp_i/dx^j) v^j for the accelerations.
    """

    def __init__(self, phi: FundamentalForm):
        c = phi.chart
        self.phi = phi
        self.chart = c
        self._force = [f.evaluator for f in phi.F]
        self._p_t = [q.diff("t").evaluator for q in phi.p]
        self._p_x = [[q.diff(x).evaluator for x in c.x_names] for q in phi.p]
        self._p_v = [[q.diff(v).evaluator for v in c.fiber_names] for q in phi.p]

    def env(self, t: float, x, v) -> dict[str, float]:
        c = self.chart
        env = {"t": float(t)}
        env.update(zip(c.x_names, map(float, x)))
        env.update(zip(c.fiber_names, map(float, v)))
        return env

    def accelerations(self, t: float, x, v) -> np.ndarray:
        env = self.env(t, x, v)
        v = np.asarray(v, dtype=float)
        m = np.array([[f(env) for f in row] for row in self._p_v])
        p_x = np.array([[f(env) for f in row] for row in self._p_x])
        rhs = np.array([f(env) for f in self._force]) - np.array([f(env) for f in self._p_t]) - p_x @ v
        return solve_checked(m, rhs)

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        n = self.chart.dimension
        return np.concatenate([y[n:], self.accelerations(t, y[:n], y[n:])])


def lagrange_first_form_rhs(T: ScalarField, Q: Sequence, t: float, x, v) -> np.ndarray:
    """Accelerations from d/dt(dT/dv^i) - dT/dx^i = Q_i."""
    return NewtonianSystem(FundamentalForm.lagrange_first_form(T, Q)).accelerations(t, x, v)


def integrate_newtonian(phi: FundamentalForm, initial: tuple, t1: float, h: float) -> Trajectory:
    """RK4 on (x, v) for F_i = dp_i/dt; ``initial`` is (t0, x0, v0)."""
    t0, x0, v0 = initial
    system = NewtonianSystem(phi)
    y0 = np.concatenate([np.atleast_1d(np.asarray(x0, dtype=float)),
                         np.atleast_1d(np.asarray(v0, dtype=float))])
    if y0.shape[0] != 2 * phi.chart.dimension:
        raise ValueError(f"initial state needs {phi.chart.dimension} positions and velocities")
    times, states, step = rk4(system.rhs, t0, y0, t1, h)
    return Trajectory(ChartKind.VELOCITY, times, states, step)


def integrate_lagrange(T: ScalarField, Q: Sequence, initial: tuple, t1: float, h: float) -> Trajectory:
    """Integrate the Lagrange equations in the first form with RK4."""
    return integrate_newtonian(FundamentalForm.lagrange_first_form(T, Q), initial, t1, h)
