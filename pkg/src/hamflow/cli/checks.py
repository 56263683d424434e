"""Named checks that a scenario can request, with default tolerances."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from hamflow import geometry as G
from hamflow import hj
from hamflow.cli.scenario import ConfigError, Scenario
from hamflow.expr import ChartSpec, ScalarField, fd_check
from hamflow.mechanics import (
    FundamentalForm,
    HamiltonSystem,
    Trajectory,
    classical_rhs,
    energy_balance_residual,
    energy_theorem_residual,
    euler_lagrange_residual,
    integrability_residual,
    legendre_transform,
    momentum_map,
    newtonian_residual,
    normal_form_consistency,
)
from hamflow.mechanics.trajectory import time_derivative
from hamflow.sampling import point_dicts, random_polynomial, sample_points

POINTWISE = "pointwise"
TRAJECTORY = "trajectory"


@dataclass
class Context:
    scenario: Scenario
    trajectory: Trajectory | None = None

    @property
    def seed(self) -> int:
        return self.scenario.seed

    def points(self, chart: ChartSpec | None = None, count: int = 64) -> list[dict]:
        chart = chart or self.scenario.chart
        box = {k: v for k, v in self.scenario.sample_box.items() if k in chart.coordinates}
        return point_dicts(chart, sample_points(chart, count, self.seed, box))

    def tx_points(self, count: int = hj.DEFAULT_POINTS) -> np.ndarray:
        names = {"t", *ChartSpec.momentum(self.scenario.dimension).x_names}
        box = {k: v for k, v in self.scenario.sample_box.items() if k in names}
        avoid = bool((self.scenario.hj or {}).get("avoid_t_zero", False))
        return hj.sample_tx(self.scenario.dimension, count, self.seed, box, avoid)


@dataclass(frozen=True)
class Check:
    name: str
    kind: str
    systems: tuple[str, ...]
    tolerance: float
    func: Callable[[Context], tuple[float, dict]]
    needs: tuple[str, ...] = ()


REGISTRY: dict[str, Check] = {}
ALL_SYSTEMS = ("lagrangian", "fundamental_form", "normal_form")


def check(name, kind, tolerance, systems=ALL_SYSTEMS, needs=()):
    def register(func):
        REGISTRY[name] = Check(name, kind, tuple(systems), tolerance, func, tuple(needs))
        return func
    return register


def validate_checks(scenario: Scenario):
    unknown = [c for c in scenario.checks if c not in REGISTRY]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; valid names: {', '.join(sorted(REGISTRY))}")
    for name in scenario.checks:
        c = REGISTRY[name]
        if scenario.system_kind not in c.systems:
            raise ConfigError(f"check {name!r} needs a {' or '.join(c.systems)} system")
        for need in c.needs:
            if need == "hj" and scenario.hj is None:
                raise ConfigError(f"check {name!r} needs an hj block")
            if need == "S" and scenario.generating_function is None:
                raise ConfigError(f"check {name!r} needs hj.S")
            if need == "eta" and scenario.eta_given is None:
                raise ConfigError(f"check {name!r} needs system.normal_form.eta")
            if need == "frame" and scenario.frame is None:
                raise ConfigError(f"check {name!r} needs a frame block")


def _max_abs(values) -> float:
    return float(np.max(np.abs(np.asarray(values, dtype=float)))) if np.size(values) else 0.0


# ---------------------------------------------------------------- pointwise

@check("canonical_relations", POINTWISE, 1e-12)
def canonical_relations(ctx):
    c = ChartSpec.momentum(ctx.scenario.dimension)
    xs = [ScalarField.coordinate(c, x) for x in c.x_names]
    ps = [ScalarField.coordinate(c, p) for p in c.fiber_names]
    pts = ctx.points(c, 16)
    worst = 0.0
    n = c.dimension
    for i in range(n):
        for j in range(n):
            delta = 1.0 if i == j else 0.0
            for bracket, expected in ((G.poisson_bracket(xs[i], xs[j]), 0.0),
                                      (G.poisson_bracket(ps[i], ps[j]), 0.0),
                                      (G.poisson_bracket(xs[i], ps[j]), delta)):
                worst = max(worst, max(abs(bracket.eval(e) - expected) for e in pts))
    return worst, {"pairs": 3 * n * n}


def _random_fields(ctx, count):
    c = ChartSpec.momentum(ctx.scenario.dimension)
    rng = np.random.default_rng(ctx.seed)
    return c, rng, [random_polynomial(c, rng, 3, 4) for _ in range(count)]


@check("poisson_identities", POINTWISE, 1e-9)
def poisson_identities(ctx):
    c, rng, fields = _random_fields(ctx, 15)
    if ctx.scenario.system_kind == "normal_form":
        fields[0] = ctx.scenario.system_object.H
    pts = ctx.points(c)
    pb, grad = G.poisson_bracket, G.symplectic_gradient
    anti = jacobi = hom = 0.0
    for f, g, h in zip(fields[0::3], fields[1::3], fields[2::3]):
        anti_f = pb(f, g) + pb(g, f)
        jac_f = pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))
        for e in pts:
            anti = max(anti, abs(anti_f.eval(e)))
            jacobi = max(jacobi, abs(jac_f.eval(e)))
        hom = max(hom, G.max_componentwise_difference(grad(pb(f, g)), G.lie_bracket(grad(f), grad(g)), pts))
    return max(anti, jacobi, hom), {"antisymmetry": anti, "jacobi": jacobi, "homomorphism": hom}


@check("bracket_decomposition", POINTWISE, 1e-9)
def bracket_decomposition(ctx):
    c = ChartSpec.momentum(ctx.scenario.dimension)
    rng = np.random.default_rng(ctx.seed)
    poly = lambda: random_polynomial(c, rng, 2, 3)  # noqa: E731

    def random_field():
        return G.NormalFormVectorField(poly(), tuple((poly(), poly()) for _ in range(int(rng.integers(0, 3)))))

    pairs = [(random_field(), random_field()) for _ in range(5)]
    if ctx.scenario.system_kind == "normal_form":
        nf = ctx.scenario.system_object
        # eta = dH - mu dv is dual to grad H - mu grad v
        a = G.NormalFormVectorField(nf.H, tuple((-mu, v) for mu, v in nf.terms))
        pairs.append((a, random_field()))
    pts = ctx.points(c)
    worst = 0.0
    for a, b in pairs:
        lhs = G.bracket_decomposition(a, b)
        rhs = G.lie_bracket(G.realize(a), G.realize(b))
        worst = max(worst, G.max_componentwise_difference(lhs, rhs, pts))
    return worst, {"pairs": len(pairs)}


@check("normal_form_consistency", POINTWISE, 1e-9, ("normal_form",), ("eta",))
def nf_consistency(ctx):
    s = ctx.scenario
    return normal_form_consistency(s.system_object, s.eta_given, ctx.points()), {}


@check("hj_residual", POINTWISE, 1e-10, ("normal_form",), ("S",))
def hj_residual(ctx):
    s = ctx.scenario
    return hj.hj_residual(s.generating_function, s.system_object.H, ctx.tx_points()), {}


@check("generalized_hj", POINTWISE, 1e-8, ("normal_form",), ("hj",))
def generalized_hj(ctx):
    s = ctx.scenario
    a_max, b_max = hj.generalized_hj_residual(s.contact_field, s.system_object, ctx.tx_points())
    return max(a_max, b_max), {"A_max": a_max, "B_max": b_max}


@check("closure", POINTWISE, 1e-10, needs=("hj",))
def closure(ctx):
    return hj.closure_residual(ctx.scenario.contact_field, ctx.tx_points()), {}


@check("legendre_roundtrip", POINTWISE, 1e-10, ("lagrangian",))
def legendre_roundtrip(ctx):
    L = ctx.scenario.system_object
    leg = legendre_transform(L)
    n = L.chart.dimension
    momenta = [p.evaluator for p in momentum_map(L)]
    worst = 0.0
    for e in ctx.points():
        p = [f(e) for f in momenta]
        t, x = e["t"], [e[k] for k in L.chart.x_names]
        v = np.array([e[k] for k in L.chart.fiber_names])
        back = leg.v_of_p(np.concatenate([[t], x, p]))
        worst = max(worst, _max_abs(back - v))
    return worst, {"points": 64, "dimension": n}


def _system_fields(s: Scenario):
    obj = s.system_object
    if s.system_kind == "lagrangian":
        return [obj]
    if s.system_kind == "fundamental_form":
        return [obj.P, *obj.F, *obj.p]
    return [obj.H, *[f for pair in obj.terms for f in pair]]


@check("symbolic_derivatives", POINTWISE, 1e-5)
def symbolic_derivatives(ctx):
    worst = 0.0
    for f in _system_fields(ctx.scenario):
        for e in ctx.points(count=16):
            for coord in f.chart.coordinates:
                try:
                    sym, num = fd_check(f, coord, e)
                except ArithmeticError:
                    continue
                worst = max(worst, abs(sym - num) / max(1.0, abs(sym)))
    return worst, {}


# --------------------------------------------------------------- trajectory

@check("energy_balance", TRAJECTORY, 1e-6, ("normal_form",))
def energy_balance(ctx):
    return energy_balance_residual(ctx.scenario.system_object, ctx.trajectory), {}


@check("energy_drift", TRAJECTORY, 1e-9, ("normal_form",))
def energy_drift(ctx):
    H = ctx.trajectory.along(ctx.scenario.system_object.H)
    return _max_abs(H - H[0]), {}


@check("classical_reduction", TRAJECTORY, 1e-12, ("normal_form",))
def classical_reduction(ctx):
    nf = ctx.scenario.system_object
    system = HamiltonSystem(nf.classical())
    traj = ctx.trajectory
    n = traj.dimension
    worst = 0.0
    for t, y in zip(traj.times[::10], traj.states[::10]):
        xdot, pdot = classical_rhs(nf.H, (t, y[:n], y[n:]))
        worst = max(worst, _max_abs(system.rhs(float(t), y) - np.concatenate([xdot, pdot])))
    return worst, {"terms_dropped": len(nf.terms)}


@check("characteristics", TRAJECTORY, 1e-6, ("normal_form",), ("hj",))
def characteristics(ctx):
    return hj.characteristics_residual(ctx.scenario.contact_field, ctx.trajectory), {}


@check("euler_lagrange", TRAJECTORY, 1e-4, ("lagrangian",))
def euler_lagrange(ctx):
    return euler_lagrange_residual(ctx.scenario.system_object, ctx.trajectory), {}


@check("energy_theorem", TRAJECTORY, 1e-4, ("lagrangian",))
def energy_theorem(ctx):
    return energy_theorem_residual(ctx.scenario.system_object, ctx.trajectory), {}


@check("newtonian", TRAJECTORY, 1e-6, ("lagrangian", "fundamental_form"))
def newtonian(ctx):
    obj = ctx.scenario.system_object
    phi = FundamentalForm.from_lagrangian(obj) if isinstance(obj, ScalarField) else obj
    return newtonian_residual(phi, ctx.trajectory), {}


@check("integrability", TRAJECTORY, 1e-5, ("lagrangian", "fundamental_form"))
def integrability(ctx):
    return _max_abs(integrability_residual(ctx.trajectory)), {}


@check("rotating_frame", TRAJECTORY, 1e-5, ("lagrangian", "fundamental_form"), ("frame",))
def rotating_frame(ctx):
    traj = ctx.trajectory
    omega = np.array(ctx.scenario.omega)
    frame_term = traj.x @ omega.T
    # the curve v = dx/dt + omega x is non-integrable by exactly omega x
    residual = traj.fiber + frame_term - time_derivative(traj.x, traj.step)
    return _max_abs(residual - frame_term), {"max_nonintegrability": _max_abs(residual)}
