import math

import numpy as np
import pytest

from hamflow import hj
from hamflow.errors import ChartMismatchError
from hamflow.expr import ChartSpec, parse
from hamflow.mechanics import NormalForm, Trajectory, integrate_hamilton

FREE = NormalForm.from_text("p1^2/2")
PTS = hj.sample_tx(1, 128, 1729)
PTS2 = hj.sample_tx(2, 128, 1729)


def S(text, n=1):
    return hj.GeneratingFunction.from_text(text, n)


def test_contact_field_from_generating_function():
    p = S("x1^2*t + sin(x2)", 2).contact_field
    assert p([0.5, 2.0, 0.0]) == pytest.approx([2.0, 1.0])
    with pytest.raises(ValueError):
        S("p1*x1")
    with pytest.raises(ValueError):
        hj.ContactField.from_text(["p1"])


def test_closure_examples():
    assert hj.closure_residual(S("x1^2 + x2^2", 2), PTS2) == 0
    curl = hj.ContactField.from_text(["x2", "-x1"])
    assert hj.closure_residual(curl, PTS2) == 2
    assert hj.closure_residual(hj.ContactField.from_text(["x1*t + exp(x1)"]), PTS) == 0


def test_hj_residual_examples():
    assert hj.hj_residual(S("2*x1 - 2*t"), FREE.H, PTS) == 0
    late = hj.sample_tx(1, 128, 3, avoid_t_zero=True)
    assert late[:, 0].min() >= 1
    assert hj.hj_residual(S("x1^2/(2*t)"), FREE.H, late) <= 1e-10
    assert hj.hj_residual(S("0"), FREE.H, PTS) == 0
    assert hj.hj_residual(S("x1^2"), FREE.H, PTS) > 0.1


def test_pullback_theta_examples():
    theta = hj.pullback_theta(S("2*x1 - 2*t"), FREE)
    for row in PTS[:16]:
        assert theta.dt_dx(row) == pytest.approx([0.0])
    # with no terms the dt^dx coefficient is dp/dt + d(H o p)/dx
    p = hj.ContactField.from_text(["x1*t + x1^2"])
    classical = hj.pullback_theta(p, FREE)
    for row in PTS[:16]:
        t, x = row
        pv = x * t + x * x
        expected = x + pv * (t + 2 * x)
        assert classical.dt_dx(row)[0] == pytest.approx(expected, abs=1e-12)
        assert classical.dt_dx(row)[0] == pytest.approx(hj.dtheta_pullback_fd(p, FREE.H, row)[0], abs=1e-6)
    damped = hj.pullback_theta(p, NormalForm.from_text("p1^2/2", [("-0.1*p1", "x1")]))
    for row in PTS[:16]:
        shift = damped.dt_dx(row)[0] - classical.dt_dx(row)[0]
        assert shift == pytest.approx(0.1 * p(row)[0], abs=1e-12)


def test_generalized_hj_examples():
    a_max, b_max = hj.generalized_hj_residual(S("2*x1 - 2*t"), FREE, PTS)
    assert a_max <= 1e-10 and b_max == 0
    witness = S("exp(-0.1*t)*x1")
    drag = NormalForm.from_text("p1^2/2", [("-0.1*p1", "x1")])
    assert hj.gradient_hj_residual(witness, drag, PTS) <= 1e-8
    assert max(hj.generalized_hj_residual(witness, drag, PTS)) <= 1e-12
    # the same S fails the classical equation
    assert hj.gradient_hj_residual(witness, FREE, PTS) > 1e-2
    curl = hj.ContactField.from_text(["x2", "-x1"])
    _, b = hj.generalized_hj_residual(curl, NormalForm.from_text("p1^2/2 + p2^2/2", n=2), PTS2)
    assert b == pytest.approx(2, abs=1e-12)


def test_generalized_matches_gradient_of_classical_residual():
    # for mu = 0 the dt^dx coefficients are the x-gradient of dS/dt + H
    H = NormalForm.from_text("p1^2/2 + x1*p1 + t*x1^2")
    s = S("sin(x1)*t + x1^3/3")
    theta = hj.pullback_theta(s, H)
    for row in PTS[:32]:
        fd = hj._fd_x_gradient(lambda r: hj.hj_integrand(s, H.H, r), row)
        assert theta.dt_dx(row) == pytest.approx(fd, abs=1e-6)


def test_xi_extraction_examples():
    times = np.repeat([0.1, 0.5, 0.9], 8)
    xs = np.tile(np.linspace(-1, 1, 8), 3)
    rows = np.column_stack([times, xs])
    exact = hj.xi_extraction(S("2*x1 - 2*t"), FREE.H, rows)
    assert len(exact) == 3 and all(g.spread == 0 and np.all(g.values == 0) for g in exact)
    shifted = hj.xi_extraction(S("2*x1 - 2*t + 0.75*t"), FREE.H, rows)
    for g in shifted:
        assert g.spread <= 1e-12 and np.allclose(g.values, 0.75, atol=1e-12)
    wrong = hj.xi_extraction(S("x1*t"), FREE.H, rows)
    for g in wrong:
        assert np.allclose(g.values, xs[:8] + g.t ** 2 / 2)
        assert g.spread > 1


def test_characteristics_follow_the_contact_field():
    traj = integrate_hamilton(FREE, (0, [0], [2]), 1, 1e-3)
    assert hj.characteristics_residual(S("2*x1 - 2*t"), traj) <= 1e-12
    drag = NormalForm.from_text("p1^2/2", [("-0.1*p1", "x1")])
    traj = integrate_hamilton(drag, (0, [0.3], [1]), 2, 1e-3)
    assert hj.characteristics_residual(S("exp(-0.1*t)*x1"), traj) <= 1e-9
    with pytest.raises(ChartMismatchError):
        hj.characteristics_residual(S("x1"), Trajectory.prolong(["t"], 0, 1, 0.1))


def test_chart_mismatch():
    with pytest.raises(ChartMismatchError):
        hj.hj_residual(S("x1", 2), FREE.H, PTS2)
    with pytest.raises(ChartMismatchError):
        hj.GeneratingFunction(parse("x1", ChartSpec.velocity(1)))


def test_sample_tx_box():
    pts = hj.sample_tx(2, 50, 1, {"x2": (3.0, 4.0)})
    assert pts.shape == (50, 3) and pts[:, 2].min() >= 3 and pts[:, 0].max() <= 1
    with pytest.raises(ValueError):
        hj.sample_tx(1, 5, 1, {"p1": (0.0, 1.0)})
    assert math.isclose(float(pts[0, 0]), float(hj.sample_tx(2, 50, 1, {"x2": (3.0, 4.0)})[0, 0]))
