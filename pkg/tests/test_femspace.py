import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinear_fve import quadrature as quad
from bilinear_fve.expr import differentiate, evaluate, parse
from bilinear_fve.femspace import (
    NodalField, OutsideElementError, averaged_gradient, averaged_gradient_class, cell_average,
    discrete_h1_seminorm, discrete_h1_seminorm_sq_elements, h1_norm_sq, h1_seminorm_sq_elements,
    interpolate, pi_star, shape_eval,
)
from bilinear_fve.mesh import TensorMesh, stress_points, uniform_mesh
from bilinear_fve.verify import random_mesh


def test_shape_eval_center_and_corner():
    vals, grads = shape_eval((0, 2, 0, 1), 1.0, 0.5)
    np.testing.assert_allclose(vals, 0.25)
    np.testing.assert_allclose(grads.sum(axis=0), 0.0, atol=1e-15)
    vals, _ = shape_eval((0, 2, 0, 1), 0.0, 0.0)
    np.testing.assert_allclose(vals, [1, 0, 0, 0])
    with pytest.raises(OutsideElementError):
        shape_eval((0, 2, 0, 1), 3.0, 0.5)


def test_mixed_coefficient_of_xi_is_zero():
    f = NodalField(TensorMesh([0, 1], [0, 1]), [0, 1, 0, 1])   # corners P1..P4 = (0, 1, 1, 0)
    assert f.mixed_coefficient()[0] == 0.0


def test_interpolate_reproduces_bilinear():
    rng = np.random.default_rng(3)
    m = random_mesh(rng, 5, 4)
    f = interpolate(lambda x, y: x * y, m)
    x0, x1, y0, y1 = m.element_bounds
    xc, yc = (x0 + x1) / 2, (y0 + y1) / 2
    np.testing.assert_allclose(f(xc, yc), xc * yc, atol=1e-15)
    pts = rng.uniform(0, 1, (50, 2))
    np.testing.assert_allclose(f(pts[:, 0], pts[:, 1]), pts[:, 0] * pts[:, 1], atol=1e-14)


def test_interpolate_x_squared_single_element():
    f = interpolate(lambda x, y: x**2, TensorMesh([0, 1], [0, 1]))
    assert f(0.5, 0.5) == pytest.approx(0.5)
    assert f(0.3, 0.9) == pytest.approx(0.3)


def test_interpolate_idempotent():
    rng = np.random.default_rng(4)
    m = random_mesh(rng, 4)
    f = NodalField(m, rng.uniform(-1, 1, m.n_nodes))
    np.testing.assert_array_equal(interpolate(f, m).values, f.values)


def test_continuity_across_edges():
    rng = np.random.default_rng(5)
    m = random_mesh(rng, 3)
    f = NodalField(m, rng.uniform(-1, 1, m.n_nodes))
    for i in range(1, m.nx):
        x = m.x_breaks[i]
        y = rng.uniform(0, 1, 10)
        left = f.locate(np.full(10, x - 1e-9), y)
        right = f.locate(np.full(10, x + 1e-9), y)
        np.testing.assert_allclose(f.eval_on(left, x, y)[0], f.eval_on(right, x, y)[0], atol=1e-14)


def test_pi_star_constant_interior_field():
    m = uniform_mesh(4)
    v = NodalField(m, np.where(m.boundary_mask, 0.0, 1.0))
    pv = pi_star(v)
    for k in m.interior_nodes:
        x, y = m.node_coords[k]
        assert pv(x + 0.05, y - 0.05) == 1.0
    assert pv(0.01, 0.01) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_preserves_element_and_edge_means(seed):
    # element mean: 2x2 Gauss of v against exact piecewise-constant quarters
    rng = np.random.default_rng(seed)
    m = random_mesh(rng, 4, 3)
    v = NodalField(m, np.where(m.boundary_mask, 0.0, rng.uniform(-1, 1, m.n_nodes)))
    vals = np.where(m.boundary_mask, 0.0, v.values)
    x0, x1, y0, y1 = m.element_bounds
    hx, hy = x1 - x0, y1 - y0
    corners = vals[m.element_nodes]
    mean_v = cell_average(v, m, 2)
    np.testing.assert_allclose(mean_v, corners.mean(axis=1), rtol=1e-13, atol=1e-15)
    # edge mean: each half edge takes the value of its endpoint node
    for e in range(m.n_elements):
        c = [(x0[e], y0[e]), (x1[e], y0[e]), (x1[e], y1[e]), (x0[e], y1[e])]
        for k in range(4):
            a, b = c[k], c[(k + 1) % 4]
            L = math.hypot(b[0] - a[0], b[1] - a[1])
            lhs = quad.integrate_segment(lambda x, y: v.eval_on(e, x, y)[0], a, b, 2)
            rhs = 0.5 * L * (corners[e, k] + corners[e, (k + 1) % 4])
            assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-15)


def test_cell_average_examples():
    m = uniform_mesh(3)
    np.testing.assert_allclose(cell_average(lambda x, y: np.ones_like(x), m), 1.0)
    assert cell_average(lambda x, y: x, TensorMesh([0, 1], [0, 1]))[0] == pytest.approx(0.5)


def test_mixed_derivative_equals_cell_average_of_uxy():
    u = parse("2*sin(2*pi*x)*sin(3*pi*y)")
    uxy = differentiate(differentiate(u, "x"), "y")
    m = random_mesh(np.random.default_rng(6), 6)
    lhs = interpolate(u, m).mixed_derivative()
    rhs = cell_average(uxy, m, 6)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-9 * np.max(np.abs(rhs)))


def test_discrete_seminorm_examples():
    m = uniform_mesh(3)
    assert discrete_h1_seminorm(NodalField(m, np.full(m.n_nodes, 2.5))) == 0.0
    f = NodalField(TensorMesh([0, 1], [0, 1]), [0, 1, 0, 1])
    assert discrete_h1_seminorm_sq_elements(f)[0] == 2.0
    true = h1_seminorm_sq_elements(f)[0]
    assert true == pytest.approx(1.0)
    gamma = math.sqrt(2)
    assert 2 / (6 * gamma) <= true <= gamma * 2 / 2


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 2), st.floats(0.05, 2), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_seminorm_equivalence(hx, hy, w):
    m = TensorMesh([0, hx], [0, hy])
    f = NodalField(m, w)
    true = h1_seminorm_sq_elements(f)[0]
    disc = discrete_h1_seminorm_sq_elements(f)[0]
    g = m.gamma
    assert disc / (6 * g) * (1 - 1e-12) <= true <= g * disc / 2 * (1 + 1e-12) + 1e-300


def test_h1_norm_of_constant():
    m = uniform_mesh(2)
    assert h1_norm_sq(NodalField(m, np.full(m.n_nodes, 3.0))) == pytest.approx(9.0)


def test_averaged_gradient_of_bilinear_is_exact():
    m = random_mesh(np.random.default_rng(7), 4)
    f = interpolate(lambda x, y: x * y, m)
    S = stress_points(m)
    for cls in S.classes:
        g = averaged_gradient_class(f, cls)
        np.testing.assert_allclose(g, cls.points[:, ::-1], atol=1e-13)


def test_averaged_gradient_is_mean_of_one_sided_values():
    # u = |x - 1/2| interpolated on a 2x2 mesh: gradient jumps from -2 to 2 across x = 1/2
    m = uniform_mesh(2)
    f = interpolate(lambda x, y: np.abs(x - 0.5), m)
    np.testing.assert_allclose(averaged_gradient(f, (0.5, 0.25)), [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(averaged_gradient(f, (0.25, 0.25)), [-1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(averaged_gradient(f, (0.75, 0.75)), [1.0, 0.0], atol=1e-15)
    with pytest.raises(ValueError):
        averaged_gradient(f, (0.1, 0.1))


def test_averaged_gradient_at_center_is_element_gradient():
    rng = np.random.default_rng(8)
    m = random_mesh(rng, 3)
    f = NodalField(m, rng.uniform(-1, 1, m.n_nodes))
    x0, x1, y0, y1 = m.element_bounds
    for e in range(m.n_elements):
        xc, yc = (x0[e] + x1[e]) / 2, (y0[e] + y1[e]) / 2
        _, gx, gy = f.eval_on(e, xc, yc)
        np.testing.assert_allclose(averaged_gradient(f, (xc, yc)), [gx, gy], atol=1e-14)
