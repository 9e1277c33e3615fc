import math

import numpy as np
import pytest

from conftest import watson_lambda_origin
from friedrichs.errors import QuadratureError
from friedrichs.form_factor import FormFactor
from friedrichs.fredholm import _numerator
from friedrichs.lattice_dispersion import u0
from friedrichs.torus_quadrature import (
    DEFAULT_SPEC,
    CosineNumerator,
    IntegralValue,
    QuadratureSpec,
    integrate_outside_ball,
    integrate_peaked,
    integrate_smooth,
    midpoint_nodes,
    radial_panels,
    refine_until,
    tensor_sum,
)

ONE = CosineNumerator((1.0, 0.0, 0.0, 0.0), power=0)
VOL = (2 * math.pi) ** 3


def test_watson_oracle():
    val = integrate_peaked(ONE, (0, 0, 0), 0.0)
    assert val.value == pytest.approx(watson_lambda_origin(), rel=1e-10)
    assert 0 <= val.err_est < 1e-8 * val.value


def test_tensor_rule_exact_on_trig_polynomials():
    assert tensor_sum(lambda a, b, c: np.cos(a) ** 2 + 0 * b + 0 * c, 8) == pytest.approx(VOL / 2, rel=1e-14)
    assert abs(tensor_sum(lambda a, b, c: np.cos(a) * np.cos(b) + 0 * c, 8)) < 1e-12
    r = integrate_smooth(lambda a, b, c: 1.0 + np.cos(a + b) ** 2 + 0 * c)
    assert r.value == pytest.approx(1.5 * VOL, rel=1e-14) and r.err_est < 1e-10


def test_midpoint_nodes_symmetric():
    x = midpoint_nodes(8)
    np.testing.assert_allclose(x, -x[::-1], atol=1e-15)


@pytest.mark.parametrize("p", [(0.0, 0.0, 0.0), (1.0, 0.5, -2.0), (3.0, 0.1, 0.0)])
def test_peaked_rule_against_midpoint_reference(p):
    # far from the singular regime the integrand is analytic and the periodic
    # midpoint rule converges spectrally; it serves as an independent reference
    ff = FormFactor.cosine_poly(1.0, 0.5, -0.25, 0.1)
    g = _numerator(ff, p)
    w = 1.5
    ref = tensor_sum(lambda a, b, c: g(a, b, c) / (u0(p, np.stack(np.broadcast_arrays(a, b, c), -1)) + w * w), 96)
    assert integrate_peaked(g, p, w).value == pytest.approx(ref, rel=1e-11)


def test_symmetries_of_peaked_rule():
    g = _numerator(FormFactor.constant(1.0), (0.7, 0.2, -1.1))
    a = integrate_peaked(g, (0.7, 0.2, -1.1), 0.01).value
    g2 = _numerator(FormFactor.constant(1.0), (-0.7, -0.2, 1.1))
    assert integrate_peaked(g2, (-0.7, -0.2, 1.1), 0.01).value == pytest.approx(a, rel=1e-13)
    g3 = _numerator(FormFactor.constant(1.0), (0.2, -1.1, 0.7))
    assert integrate_peaked(g3, (0.2, -1.1, 0.7), 0.01).value == pytest.approx(a, rel=1e-13)


def test_monotone_in_w():
    vals = [integrate_peaked(ONE, (0.3, 0.0, 0.1), w).value for w in (0.0, 1e-3, 0.01, 0.1, 1.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_degenerate_direction_uses_line_rule():
    # p = (pi, 0, 0): u0 has no quadratic term along q1; the q1 integral of a
    # function independent of q1 is exactly 2 pi times the 2D integral
    g = CosineNumerator((1.0, 0.0, 0.0, 0.0), power=0)
    val = integrate_peaked(g, (math.pi, 0, 0), 0.5).value
    x = midpoint_nodes(128)
    A, B = np.meshgrid(x, x, indexing="ij")
    ref2d = (2 * math.pi / 128) ** 2 * np.sum(1.0 / (4 * np.sin(A / 2) ** 2 + 4 * np.sin(B / 2) ** 2 + 0.25))
    assert val == pytest.approx(2 * math.pi * ref2d, rel=1e-9)
    with pytest.raises(ValueError):
        integrate_peaked(g, (math.pi, 0, 0), 0.0)


def test_fully_degenerate_is_constant_denominator():
    val = integrate_peaked(ONE, (math.pi, math.pi, math.pi), 2.0).value
    assert val == pytest.approx(VOL / 4.0, rel=1e-13)


def test_rejects_negative_w_and_nonfinite_integrand():
    with pytest.raises(ValueError):
        integrate_peaked(ONE, (0, 0, 0), -1.0)
    with pytest.raises(QuadratureError):
        integrate_peaked(lambda a, b, c: np.full(np.broadcast(a, b, c).shape, np.nan), (0, 0, 0), 0.1)


def test_outside_ball_matches_ball_subtraction():
    # near q = 0, u(0, q) = |q|^2 + O(|q|^4), so the ball |q| < d carries 4 pi d + O(d^3)
    lam = watson_lambda_origin()
    for d in (0.05, 0.1):
        out = integrate_outside_ball(lambda a, b, c: np.ones_like(a), d)
        assert lam - out == pytest.approx(4 * math.pi * d, rel=2e-3)


def test_radial_panels_geometric():
    edges = radial_panels(1e-4)
    assert edges[0] == 0.0 and edges[-1] == pytest.approx(1.0)
    assert all(b > a for a, b in zip(edges, edges[1:]))


def test_spec_validation_and_ladder():
    with pytest.raises(ValueError):
        QuadratureSpec(n_grid=7)
    with pytest.raises(ValueError):
        QuadratureSpec(n_radial=2)
    with pytest.raises(ValueError):
        QuadratureSpec(target_rel_tol=0.5)
    s = DEFAULT_SPEC
    assert s.refined().n_grid == 2 * s.n_grid and s.refined().n_radial > s.n_radial
    assert s.coarsened().n_angular < s.n_angular
    assert s.scaled(2.0).n_angular == 2 * s.n_angular
    with pytest.raises(ValueError):
        IntegralValue(1.0, -1.0, 1)


def test_refine_until_converges_and_reports():
    r = refine_until(lambda spec: integrate_peaked(ONE, (0, 0, 0), 0.0, spec), tol=1e-9)
    assert r.value == pytest.approx(watson_lambda_origin(), rel=1e-10)
    assert r.levels >= 2 and r.n_evals > 0


def test_refine_until_divergent_probe():
    # a job whose value keeps growing with resolution never meets the tolerance
    with pytest.raises(QuadratureError) as info:
        refine_until(lambda spec: float(spec.n_grid), tol=1e-6, spec=QuadratureSpec(max_refine=2))
    assert info.value.last_values == (96.0, 192.0)
    with pytest.raises(ValueError):
        refine_until(lambda spec: 1.0, tol=1e-16)
