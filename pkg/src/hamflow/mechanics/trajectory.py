"""Sampled curves on a chart, variation fields along them, and the finite
difference and quadrature rules used on sampled data."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from hamflow.expr import ChartKind, ChartSpec, ScalarField, parse

MAX_STEPS = 10_000_000


def time_grid(t0: float, t1: float, h: float) -> tuple[np.ndarray, float]:
    """Uniform grid from t0 to t1 with spacing at most h.

    The step is shrunk to (t1 - t0)/N, N = ceil((t1 - t0)/h), so the grid
    lands exactly on t1.
    """
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")
    n_steps = int(np.ceil((t1 - t0) / h - 1e-9))
    if n_steps > MAX_STEPS:
        raise ValueError(f"{n_steps} steps exceeds the limit of {MAX_STEPS}")
    n_steps = max(n_steps, 1)
    step = (t1 - t0) / n_steps
    times = t0 + step * np.arange(n_steps + 1)
    times[-1] = t1
    return times, step


def time_derivative(values: np.ndarray, step: float) -> np.ndarray:
    """Central differences inside, second-order one-sided at the two ends."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 3:
        raise ValueError("need at least 3 samples to differentiate in time")
    return np.gradient(values, step, axis=0, edge_order=2)


def trapezoid(values: np.ndarray, step: float) -> float:
    return float(np.trapezoid(np.asarray(values, dtype=float), dx=step, axis=0))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of a curve (t, x(t), v(t)) or (t, x(t), p(t)).

    ``states`` has one row per time with the n configuration coordinates
    followed by the n velocity or momentum coordinates.
    """

    kind: ChartKind
    times: np.ndarray
    states: np.ndarray
    step: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if states.shape[0] != times.shape[0] or states.shape[1] % 2:
            raise ValueError(f"states of shape {states.shape} do not match {times.shape[0]} times")
        if times.shape[0] >= 2 and np.max(np.abs(np.diff(times) - self.step)) > 1e-12 * max(1.0, abs(times[-1])):
            raise ValueError("sample times are not uniformly spaced by the step")
        if not np.all(np.isfinite(states)):
            raise ValueError("trajectory contains non-finite states")

    @property
    def dimension(self) -> int:
        return self.states.shape[1] // 2

    @cached_property
    def chart(self) -> ChartSpec:
        return ChartSpec(self.dimension, self.kind)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, : self.dimension]

    @property
    def fiber(self) -> np.ndarray:
        """Velocity or momentum samples."""
        return self.states[:, self.dimension:]

    def __len__(self):
        return self.times.shape[0]

    @cached_property
    def envs(self) -> list[dict[str, float]]:
        names = self.chart.coordinates
        rows = np.column_stack([self.times, self.states]).tolist()
        return [dict(zip(names, row)) for row in rows]

    def along(self, f: ScalarField) -> np.ndarray:
        """Values of a field at every sample."""
        if f.chart != self.chart:
            raise ValueError(f"field chart {f.chart} does not match trajectory chart {self.chart}")
        return _along(f, self.envs)

    @classmethod
    def prolong(cls, x_of_t: Sequence[str], t0: float, t1: float, h: float,
                v_of_t: Sequence[str] | None = None) -> "Trajectory":
        """Sample the 1-jet prolongation (t, x(t), dx/dt) of a curve given as
        expressions in t; pass ``v_of_t`` to sample a non-integrable curve."""
        n = len(x_of_t)
        chart = ChartSpec.velocity(n)
        xs = [_time_function(s, chart) for s in x_of_t]
        vs = [f.diff("t") for f in xs] if v_of_t is None else [_time_function(s, chart) for s in v_of_t]
        times, step = time_grid(t0, t1, h)
        states = np.array([[f.eval(_time_env(chart, t)) for f in xs + vs] for t in times])
        return cls(ChartKind.VELOCITY, times, states, step)


def _along(f: ScalarField, envs) -> np.ndarray:
    return np.array([f.eval(env) for env in envs])


def _time_env(chart: ChartSpec, t: float) -> dict[str, float]:
    env = dict.fromkeys(chart.coordinates, 0.0)
    env["t"] = float(t)
    return env


def _time_function(source, chart: ChartSpec) -> ScalarField:
    f = source if isinstance(source, ScalarField) else parse(str(source), chart)
    if f.free_variables - {"t"}:
        raise ValueError(f"{f} must depend on t only")
    return f


@dataclass(frozen=True, eq=False)
class VariationField:
    """delta x^i sampled at the times of a trajectory, shape (K, n)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, dtype=float)))

    @classmethod
    def from_expressions(cls, exprs: Sequence[str], traj: Trajectory) -> "VariationField":
        if len(exprs) != traj.dimension:
            raise ValueError(f"need {traj.dimension} variation components, got {len(exprs)}")
        fs = [_time_function(s, traj.chart) for s in exprs]
        return cls(np.array([[f.eval(_time_env(traj.chart, t)) for f in fs] for t in traj.times]))

    @classmethod
    def zero(cls, traj: Trajectory) -> "VariationField":
        return cls(np.zeros((len(traj), traj.dimension)))

    def check_span(self, traj: Trajectory):
        if self.values.shape != (len(traj), traj.dimension):
            raise ValueError(
                f"variation of shape {self.values.shape} does not cover a trajectory "
                f"with {len(traj)} samples in dimension {traj.dimension}"
            )

    def velocity(self, step: float) -> np.ndarray:
        """The prolongation d(delta x)/dt by finite differences."""
        return time_derivative(self.values, step)
