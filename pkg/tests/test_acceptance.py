"""One test per acceptance criterion; each prints a PASS/FAIL line with the
measured quantity and wall time."""
import itertools
import math
import time

import numpy as np
import pytest

from hamflow import geometry as G
from hamflow import hj
from hamflow.errors import DomainError, SingularMassMatrixError
from hamflow.expr import ChartSpec, ScalarField, fd_check, parse
from hamflow.mechanics import (
    NormalForm,
    Trajectory,
    VariationField,
    energy_balance_residual,
    first_variation,
    integrate_hamilton,
    integrate_lagrange,
    legendre_transform,
    momentum_map,
)
from hamflow.sampling import point_dicts, random_expression, random_polynomial, sample_points

SEED = 1729
TWO_PI = 2 * math.pi


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def finish(acceptance, label, measured, ok, tolerance, timer, limit):
    acceptance(label, measured, tolerance, timer.elapsed, limit, ok)
    assert ok, f"{label}: measured {measured!r} outside {tolerance}"
    assert timer.elapsed < limit, f"{label}: took {timer.elapsed:.2f}s, limit {limit}s"


def test_01_canonical_relations(acceptance):
    with Timer() as timer:
        worst = 0.0
        for n in (1, 2, 3):
            c = ChartSpec.momentum(n)
            xs = [ScalarField.coordinate(c, x) for x in c.x_names]
            ps = [ScalarField.coordinate(c, p) for p in c.fiber_names]
            pts = point_dicts(c, sample_points(c, 16, SEED))
            for i, j in itertools.product(range(n), repeat=2):
                for f, g, expected in ((xs[i], xs[j], 0.0), (ps[i], ps[j], 0.0),
                                       (xs[i], ps[j], float(i == j))):
                    b = G.poisson_bracket(f, g)
                    worst = max(worst, max(abs(b.eval(e) - expected) for e in pts))
    finish(acceptance, "01 canonical relations n=1,2,3", worst, worst <= 1e-12, "<= 1e-12", timer, 1.0)


def _random_nf_field(c, rng, n_terms):
    def poly():
        return random_polynomial(c, rng, degree=2, n_terms=3)
    return G.NormalFormVectorField(poly(), tuple((poly(), poly()) for _ in range(n_terms)))


def test_02_bracket_decomposition(acceptance):
    rng = np.random.default_rng(SEED)
    combos = list(itertools.product(range(3), repeat=2))
    with Timer() as timer:
        worst = magnitude = 0.0
        for k in range(20):
            c = ChartSpec.momentum(1 + k % 2)
            p, q = combos[k % len(combos)]
            a, b = _random_nf_field(c, rng, p), _random_nf_field(c, rng, q)
            lhs = G.bracket_decomposition(a, b)
            rhs = G.lie_bracket(G.realize(a), G.realize(b))
            for e in point_dicts(c, sample_points(c, 64, SEED + k)):
                ref = rhs.eval(e)
                magnitude = max(magnitude, float(np.max(np.abs(ref))))
                worst = max(worst, float(np.max(np.abs(lhs.eval(e) - ref))))
    ok = worst <= 1e-9 and magnitude <= 10
    finish(acceptance, f"02 bracket decomposition (max |value| {magnitude:.2f})", worst, ok,
           "<= 1e-9", timer, 30.0)


def test_03_homomorphism_and_jacobi(acceptance):
    rng = np.random.default_rng(SEED)
    pb, grad = G.poisson_bracket, G.symplectic_gradient
    with Timer() as timer:
        hom = jac = 0.0
        for k in range(20):
            c = ChartSpec.momentum(1 + k % 2)
            f, g, h = (random_polynomial(c, rng, degree=3, n_terms=4) for _ in range(3))
            pts = point_dicts(c, sample_points(c, 64, SEED + k))
            hom = max(hom, G.max_componentwise_difference(grad(pb(f, g)), G.lie_bracket(grad(f), grad(g)), pts))
            cyc = pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))
            jac = max(jac, max(abs(cyc.eval(e)) for e in pts))
    worst = max(hom, jac)
    finish(acceptance, "03 homomorphism and Jacobi", worst, worst <= 1e-9, "<= 1e-9", timer, 10.0)


def test_04_classical_reduction(acceptance):
    with Timer() as timer:
        harmonic = NormalForm.from_text("(x1^2+p1^2)/2")
        undamped = NormalForm.from_text("(x1^2+p1^2)/2", [("-0*p1", "x1")])
        a = integrate_hamilton(harmonic, (0, [1], [0]), TWO_PI, 1e-3)
        b = integrate_hamilton(undamped, (0, [1], [0]), TWO_PI, 1e-3)
        diff = float(np.max(np.abs(a.states - b.states)))
        H = a.along(harmonic.H)
        drift = float(np.max(np.abs(H - H[0])))
    ok = diff <= 1e-12 and drift <= 1e-9
    finish(acceptance, f"04 classical reduction (drift {drift:.1e})", diff, ok,
           "traj <= 1e-12, drift <= 1e-9", timer, 5.0)


def _damped_closed_form(t, gamma=0.1):
    w = math.sqrt(1 - gamma ** 2 / 4)
    return np.exp(-gamma * t / 2) * (np.cos(w * t) + gamma / (2 * w) * np.sin(w * t))


def test_05_energy_balance(acceptance):
    with Timer() as timer:
        nf = NormalForm.from_text("(x1^2+p1^2)/2", [("-0.1*p1", "x1")])
        traj = integrate_hamilton(nf, (0, [1], [0]), 10, 1e-3)
        balance = energy_balance_residual(nf, traj)
        # independent of the bracket route: the predicted rate is -gamma p^2
        measured = np.gradient(traj.along(nf.H), traj.step, edge_order=2)
        hand = float(np.max(np.abs(measured + 0.1 * traj.fiber[:, 0] ** 2)[1:-1]))
        closed = float(np.max(np.abs(traj.x[:, 0] - _damped_closed_form(traj.times))))
    worst = max(balance, hand)
    ok = worst <= 1e-6 and closed <= 1e-6
    finish(acceptance, f"05 energy balance (closed-form error {closed:.1e})", worst, ok,
           "<= 1e-6 both", timer, 5.0)


def test_06_cross_picture(acceptance):
    with Timer() as timer:
        nf = NormalForm.from_text("(x1^2+p1^2)/2", [("-0.1*p1", "x1")])
        ham = integrate_hamilton(nf, (0, [1], [0]), 10, 1e-3)
        T = parse("v1^2/2", ChartSpec.velocity(1))
        lag = integrate_lagrange(T, ["-x1 - 0.1*v1"], (0, [1], [0]), 10, 1e-3)
        worst = float(np.max(np.abs(ham.x - lag.x)))
    finish(acceptance, "06 Lagrange vs Hamilton pictures", worst, worst <= 1e-6, "<= 1e-6", timer, 5.0)


def _quadratic_lagrangian(n, rng):
    """L = 1/2 v.Mv + v.Bx - 1/2 x.Kx and its hand-derived Hamiltonian."""
    A = rng.uniform(-1, 1, (n, n))
    M = A @ A.T + n * np.eye(n)
    B = rng.uniform(-1, 1, (n, n))
    K = rng.uniform(0, 1, (n, n))
    K = K + K.T
    terms = []
    for i, j in itertools.product(range(n), repeat=2):
        terms.append(f"{float(0.5 * M[i, j])!r}*v{i + 1}*v{j + 1}")
        terms.append(f"{float(B[i, j])!r}*v{i + 1}*x{j + 1}")
        terms.append(f"-({float(0.5 * K[i, j])!r})*x{i + 1}*x{j + 1}")
    L = parse(" + ".join(terms), ChartSpec.velocity(n))
    Minv = np.linalg.inv(M)

    def H(t, x, p):
        q = p - B @ x
        return 0.5 * q @ Minv @ q + 0.5 * x @ K @ x
    return L, H


def test_07_legendre(acceptance):
    rng = np.random.default_rng(SEED)
    with Timer() as timer:
        roundtrip = h_err = 0.0
        for k in range(10):
            n = 1 + k % 2
            L, H_hand = _quadratic_lagrangian(n, rng)
            leg = legendre_transform(L)
            momenta = momentum_map(L)
            for row in sample_points(L.chart, 64, SEED + k):
                t, x, v = row[0], row[1:n + 1], row[n + 1:]
                env = L.chart.point(row)
                p = np.array([f.eval(env) for f in momenta])
                mrow = np.concatenate([[t], x, p])
                roundtrip = max(roundtrip, float(np.max(np.abs(leg.v_of_p(mrow) - v))))
                h_err = max(h_err, abs(leg.H(mrow) - H_hand(t, x, p)))
        try:
            legendre_transform(parse("v1", ChartSpec.velocity(1)))
            singular = False
        except SingularMassMatrixError:
            singular = True
    worst = max(roundtrip, h_err)
    ok = worst <= 1e-10 and singular
    finish(acceptance, f"07 Legendre transform (L = v1 singular: {singular})", worst, ok,
           "<= 1e-10", timer, 5.0)


def test_08_first_variation(acceptance):
    rng = np.random.default_rng(SEED)
    v1 = ChartSpec.velocity(1)
    osc = parse("(v1^2 - x1^2)/2", v1)
    free = parse("v1^2/2", v1)
    with Timer() as timer:
        extremal = Trajectory.prolong(["cos(t)"], 0, math.pi, 1e-3)
        s = (extremal.times - extremal.times[0]) / (extremal.times[-1] - extremal.times[0])
        worst = 0.0
        for _ in range(10):
            coeffs = rng.normal(size=4)
            dx = sum(c * np.sin((k + 1) * math.pi * s) for k, c in enumerate(coeffs))
            var = first_variation(osc, extremal, VariationField(dx[:, None]), endpoint="fixed", tol=1e-12)
            worst = max(worst, abs(var.interior))
        parabola = Trajectory.prolong(["t^2"], 0, 1, 1e-3)
        nonext = first_variation(free, parabola, VariationField.from_expressions(["1"], parabola)).interior
    ok = worst <= 1e-5 and abs(nonext + 2) <= 1e-4
    finish(acceptance, f"08 first variation (non-extremal interior {nonext:.6f})", worst, ok,
           "extremal <= 1e-5, non-extremal -2 +/- 1e-4", timer, 5.0)


def test_09_hamilton_jacobi(acceptance):
    free = NormalForm.from_text("p1^2/2")
    drag = NormalForm.from_text("p1^2/2", [("-0.1*p1", "x1")])
    with Timer() as timer:
        pts = hj.sample_tx(1, 128, SEED)
        S = hj.GeneratingFunction.from_text("2*x1 - 2*t")
        classical = hj.hj_residual(S, free.H, pts)
        generalized = max(hj.generalized_hj_residual(S, free, pts))
        witness = hj.gradient_hj_residual(hj.GeneratingFunction.from_text("exp(-0.1*t)*x1"), drag, pts)
        curl = hj.ContactField.from_text(["x2", "-x1"])
        _, b_max = hj.generalized_hj_residual(curl, NormalForm.from_text("(p1^2+p2^2)/2", n=2),
                                              hj.sample_tx(2, 128, SEED))
    ok = classical <= 1e-10 and generalized <= 1e-10 and witness <= 1e-8 and abs(b_max - 2) <= 1e-12
    finish(acceptance, f"09 Hamilton-Jacobi (witness {witness:.1e}, B_max {b_max:g})",
           max(classical, generalized), ok, "<= 1e-10, witness <= 1e-8, B_max = 2", timer, 5.0)


def test_10_symbolic_vs_finite_difference(acceptance):
    rng = np.random.default_rng(SEED)
    with Timer() as timer:
        worst, checked = 0.0, 0
        for k in range(50):
            c = ChartSpec.momentum(2) if k % 2 else ChartSpec.velocity(2)
            f = random_expression(c, rng, depth=3)
            for e in point_dicts(c, sample_points(c, 16, SEED + k)):
                for coord in c.coordinates:
                    try:
                        s, num = fd_check(f, coord, e)
                    except DomainError:
                        continue
                    checked += 1
                    worst = max(worst, abs(s - num) / max(1.0, abs(s)))
    ok = worst <= 1e-5 and checked > 0
    finish(acceptance, f"10 symbolic vs finite difference ({checked} partials)", worst, ok,
           "<= 1e-5 relative", timer, 5.0)


def test_11_rk4_order(acceptance):
    nf = NormalForm.from_text("(x1^2+p1^2)/2")
    with Timer() as timer:
        errors = []
        for h in (0.1, 0.05):
            traj = integrate_hamilton(nf, (0, [1], [0]), TWO_PI, h)
            errors.append(float(np.linalg.norm(traj.states[-1] - [1.0, 0.0])))
        ratio = errors[0] / errors[1]
    finish(acceptance, "11 RK4 order (error ratio h -> h/2)", ratio, 12 <= ratio <= 20, "in [12, 20]", timer, 5.0)


@pytest.mark.parametrize("h", [0.1, 0.05])
def test_rk4_steps_halve_exactly(h):
    # the ratio test relies on the step really halving
    traj = integrate_hamilton(NormalForm.from_text("(x1^2+p1^2)/2"), (0, [1], [0]), TWO_PI, h)
    assert traj.step == pytest.approx(TWO_PI / math.ceil(TWO_PI / h))
