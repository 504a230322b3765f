import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinear_fve.mesh import (
    InvalidMeshError, build_tensor_mesh, dual_cell, dual_cells, refine_halve, stress_points, uniform_mesh,
)


def breaks(min_size=2, max_size=8):
    return st.lists(st.floats(-5, 5, allow_nan=False), min_size=min_size, max_size=max_size, unique=True) \
        .map(sorted).filter(lambda b: np.min(np.diff(b)) > 1e-3)


@pytest.mark.parametrize("xb, yb, n_el, n_nodes, n_int", [
    ([0, 0.5, 1], [0, 0.5, 1], 4, 9, 1),
    ([0, 1], [0, 1], 1, 4, 0),
    ([0, 1, 2, 3], [0, 2], 3, 8, 0),
])
def test_counts(xb, yb, n_el, n_nodes, n_int):
    m = build_tensor_mesh(xb, yb)
    assert (m.n_elements, m.n_nodes, len(m.interior_nodes)) == (n_el, n_nodes, n_int)


@pytest.mark.parametrize("xb", [[0], [0, 0, 1], [1, 0], [0, float("nan"), 1]])
def test_invalid_breaks(xb):
    with pytest.raises(InvalidMeshError):
        build_tensor_mesh(xb, [0, 1])


def test_uniform_regularity():
    m = uniform_mesh(4)
    assert m.gamma == pytest.approx(math.sqrt(2))
    assert m.h == pytest.approx(math.sqrt(2) / 4)


def test_element_corner_order():
    m = uniform_mesh(2)
    xy = m.node_coords[m.element_nodes[0]]
    np.testing.assert_allclose(xy, [[0, 0], [0.5, 0], [0.5, 0.5], [0, 0.5]])


def test_refine_halve():
    m = build_tensor_mesh([0, 0.3, 1], [0, 1])
    np.testing.assert_allclose(refine_halve(m).x_breaks, [0, 0.15, 0.3, 0.65, 1])
    u = uniform_mesh(2)
    np.testing.assert_allclose(refine_halve(u).x_breaks, uniform_mesh(4).x_breaks)
    m4 = uniform_mesh(4)
    twice = refine_halve(refine_halve(m4))
    assert twice.nx == 16
    assert twice.h == pytest.approx(m4.h / 4)


def test_dual_cell_examples():
    m = uniform_mesh(4)
    c = dual_cell(m, m.node_id(1, 1))
    assert (c.x0, c.x1, c.y0, c.y1) == pytest.approx((0.125, 0.375, 0.125, 0.375))
    c = dual_cell(m, 0)
    assert (c.x0, c.x1, c.y0, c.y1) == pytest.approx((0, 0.125, 0, 0.125))
    with pytest.raises(IndexError):
        dual_cell(m, m.n_nodes)


@settings(max_examples=60, deadline=None)
@given(breaks(), breaks())
def test_tilings(xb, yb):
    m = build_tensor_mesh(xb, yb)
    hx, hy = m.element_sizes
    assert np.sum(hx * hy) == pytest.approx(m.area, rel=1e-12)
    x0, x1, y0, y1 = dual_cells(m)
    total = np.sum((x1 - x0) * (y1 - y0))
    assert total == pytest.approx(sum(dual_cell(m, k).area for k in range(m.n_nodes)), rel=1e-12)
    assert total == pytest.approx(m.area, rel=1e-12)
    assert np.isfinite(m.gamma) and m.gamma >= math.sqrt(2) - 1e-12


@settings(max_examples=40, deadline=None)
@given(breaks(3), breaks(3))
def test_interior_dual_cell_is_four_quarters(xb, yb):
    m = build_tensor_mesh(xb, yb)
    x, y = m.x_breaks, m.y_breaks
    for i in range(1, m.nx):
        for j in range(1, m.ny):
            c = dual_cell(m, m.node_id(i, j))
            assert c.x0 == pytest.approx((x[i - 1] + x[i]) / 2)
            assert c.x1 == pytest.approx((x[i] + x[i + 1]) / 2)
            assert c.y0 == pytest.approx((y[j - 1] + y[j]) / 2)
            assert c.y1 == pytest.approx((y[j] + y[j + 1]) / 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
def test_stress_point_cardinality(n):
    S = stress_points(uniform_mesh(n))
    assert len(S) == (n - 1) ** 2 + 2 * n * (n - 1) + n**2


def test_stress_points_4x4():
    S = stress_points(uniform_mesh(4))
    assert (len(S.nodes), len(S.edges), len(S.centers)) == (9, 24, 16)
    assert S.nodes.elements.shape == (9, 4)
    assert S.edges.elements.shape == (24, 2)
    assert S.centers.elements.shape == (16, 1)


@settings(max_examples=40, deadline=None)
@given(breaks(), breaks())
def test_stress_points_avoid_boundary(xb, yb):
    m = build_tensor_mesh(xb, yb)
    pts = stress_points(m).all_points()
    x0, x1, y0, y1 = m.bounds
    assert np.all((pts[:, 0] > x0) & (pts[:, 0] < x1) & (pts[:, 1] > y0) & (pts[:, 1] < y1))
