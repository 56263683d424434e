"""Numeric Legendre transform L(t, x, v) -> H(t, x, p)."""
from __future__ import annotations

import numpy as np

from hamflow.errors import NewtonDivergenceError, SingularMassMatrixError
from hamflow.expr import ChartSpec, ScalarField, fd_step
from hamflow.mechanics.lagrangian import _require_velocity, mass_matrix, momentum_map
from hamflow.mechanics.numerics import solve_checked
from hamflow.sampling import DEFAULT_SEED, sample_points

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


class Legendre:
    """Point-evaluable v(t, x, p) and H(t, x, p) for a Lagrangian.

    ``v_of_p`` inverts p_i = dL/dv^i by Newton iteration starting from v = p;
    ``H`` is p_i v^i - L at that velocity.
    """

    def __init__(self, L: ScalarField):
        _require_velocity(L)
        self.lagrangian = L
        self.velocity_chart = L.chart
        self.momentum_chart = ChartSpec.momentum(L.chart.dimension)
        self._momenta = [p.evaluator for p in momentum_map(L)]
        self._mass = [[m.evaluator for m in row] for row in mass_matrix(L)]
        self._L = L.evaluator

    def _env(self, t, x, v):
        c = self.velocity_chart
        env = {"t": float(t)}
        env.update(zip(c.x_names, map(float, x)))
        env.update(zip(c.fiber_names, map(float, v)))
        return env

    def mass(self, t, x, v) -> np.ndarray:
        env = self._env(t, x, v)
        return np.array([[m(env) for m in row] for row in self._mass])

    def momenta(self, t, x, v) -> np.ndarray:
        env = self._env(t, x, v)
        return np.array([p(env) for p in self._momenta])

    def _split(self, point):
        n = self.momentum_chart.dimension
        values = np.asarray([point[c] for c in self.momentum_chart.coordinates] if isinstance(point, dict)
                            else point, dtype=float).ravel()
        return values[0], values[1:n + 1], values[n + 1:]

    def v_of_p(self, point) -> np.ndarray:
        t, x, p = self._split(point)
        v = p.copy()
        tol = NEWTON_TOL * max(1.0, float(np.max(np.abs(p))))
        for _ in range(NEWTON_MAX_ITER):
            env = self._env(t, x, v)
            residual = np.array([f(env) for f in self._momenta]) - p
            if not np.all(np.isfinite(residual)):
                break
            if np.max(np.abs(residual)) <= tol:
                return v
            m = np.array([[f(env) for f in row] for row in self._mass])
            v = v - solve_checked(m, residual)
        raise NewtonDivergenceError(
            f"momentum map inversion did not converge within {NEWTON_MAX_ITER} iterations at p={p}"
        )

    def H(self, point) -> float:
        t, x, p = self._split(point)
        v = self.v_of_p(point)
        return float(p @ v - self._L(self._env(t, x, v)))

    __call__ = H


def legendre_transform(L: ScalarField, seed: int = DEFAULT_SEED) -> Legendre:
    """Build the transform, rejecting Lagrangians whose mass matrix is
    singular at every one of 8 seeded probe points."""
    leg = Legendre(L)
    n = L.chart.dimension
    last = None
    for row in sample_points(L.chart, 8, seed):
        try:
            solve_checked(leg.mass(row[0], row[1:n + 1], row[n + 1:]), np.zeros(n))
            return leg
        except SingularMassMatrixError as exc:
            last = exc
    raise last


def legendre_consistency(L: ScalarField, points) -> float:
    """Compare a finite-difference dH with -dL/dt dt - dL/dx^i dx^i + v^i dp_i.

    This is eta = d(p_i v^i) - phi for phi = dL; returns the max deviation
    over points and components.
    """
    leg = legendre_transform(L)
    chart = leg.momentum_chart
    n = chart.dimension
    L_t = L.diff("t").evaluator
    L_x = [L.diff(x).evaluator for x in L.chart.x_names]
    worst = 0.0
    for row in np.asarray(points, dtype=float):
        t, x, p = row[0], row[1:n + 1], row[n + 1:]
        v = leg.v_of_p(row)
        env = leg._env(t, x, v)
        expected = np.concatenate([[-L_t(env)], [-f(env) for f in L_x], v])
        numeric = np.empty_like(expected)
        for k in range(row.shape[0]):
            h = fd_step(row[k])
            hi, lo = row.copy(), row.copy()
            hi[k] += h
            lo[k] -= h
            numeric[k] = (leg.H(hi) - leg.H(lo)) / (hi[k] - lo[k])
        worst = max(worst, float(np.max(np.abs(numeric - expected))))
    return worst
