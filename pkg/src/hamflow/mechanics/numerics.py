"""Fixed-step RK4 and a pivot-checked dense linear solve."""
from __future__ import annotations

from typing import Callable

import warnings

import numpy as np
import scipy.linalg

from hamflow.errors import NonFiniteStateError, SingularMassMatrixError
from hamflow.mechanics.trajectory import time_grid

PIVOT_TOL = 1e-12


def solve_checked(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve m y = rhs by LU, rejecting pivots below PIVOT_TOL in magnitude."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with warnings.catch_warnings():
        # an exactly singular factor is reported below as our own error
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=True)
    smallest = float(np.min(np.abs(np.diag(lu))))
    if smallest < PIVOT_TOL:
        raise SingularMassMatrixError(f"mass matrix is singular (smallest LU pivot {smallest:.3g})")
    return scipy.linalg.lu_solve((lu, piv), np.asarray(rhs, dtype=float))


def rk4(rhs: Callable[[float, np.ndarray], np.ndarray], t0: float, y0, t1: float,
        h: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Classical fixed-step RK4 from t0 to t1.

    Returns (times, states, step); see ``time_grid`` for how the step is fit
    to the interval.
    """
    times, step = time_grid(t0, t1, h)
    y = np.asarray(y0, dtype=float).copy()
    states = np.empty((times.shape[0], y.shape[0]))
    states[0] = y
    half = 0.5 * step
    for k in range(times.shape[0] - 1):
        t = times[k]
        k1 = rhs(t, y)
        k2 = rhs(t + half, y + half * k1)
        k3 = rhs(t + half, y + half * k2)
        k4 = rhs(t + step, y + step * k3)
        y_next = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y_next)):
            raise NonFiniteStateError(f"state became non-finite after t={t}", t, y.copy())
        y = y_next
        states[k + 1] = y
    return times, states, step
