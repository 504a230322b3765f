"""Bilinear trial space on a tensor mesh and the piecewise-constant test space.

On an element with lower-left corner ``(x1, y1)`` and sides ``hx, hy`` a
bilinear function with corner values ``w1..w4`` is::

    w = w1 + w21*xi + w41*eta + w1234*xi*eta,   xi = (x-x1)/hx, eta = (y-y1)/hy

with ``w21 = w2-w1``, ``w41 = w4-w1`` and ``w1234 = w3+w1-w2-w4``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .mesh import StressPointClass, StressPointSet, TensorMesh, stress_points


class OutsideElementError(ValueError):
    pass


def shape_eval(rect, x: float, y: float, tol: float = 1e-12):
    """Values and gradients of the four corner basis functions at ``(x, y)``.

    ``rect = (x1, x2, y1, y2)``.  Returns ``(values[4], grads[4, 2])``.
    """
    x1, x2, y1, y2 = map(float, rect)
    hx, hy = x2 - x1, y2 - y1
    xi = (x - x1) / hx
    eta = (y - y1) / hy
    if not (-tol <= xi <= 1 + tol and -tol <= eta <= 1 + tol):
        raise OutsideElementError(f"point ({x}, {y}) lies outside element {rect}")
    vals = np.array([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta])
    grads = np.array([
        [-(1 - eta) / hx, -(1 - xi) / hy],
        [(1 - eta) / hx, -xi / hy],
        [eta / hx, xi / hy],
        [-eta / hx, (1 - xi) / hy],
    ])
    return vals, grads


def basis_batch(xi, eta, hx, hy):
    """Basis values and derivatives for arrays of reference coordinates.

    ``xi, eta`` have shape ``(nel, npts)``, ``hx, hy`` shape ``(nel, 1)``.
    Returns ``(phi, dphidx, dphidy)`` each of shape ``(4, nel, npts)``.
    """
    phi = np.stack([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta])
    dx = np.stack([-(1 - eta), (1 - eta), eta, -eta]) / hx
    dy = np.stack([-(1 - xi), -xi, xi, (1 - xi)]) / hy
    return phi, dx, dy


@dataclass(frozen=True, eq=False)
class NodalField:
    """Continuous piecewise-bilinear function given by its nodal values."""

    mesh: TensorMesh
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.mesh.n_nodes:
            raise ValueError(f"expected {self.mesh.n_nodes} nodal values, got {v.size}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def corners(self) -> np.ndarray:
        """``(n_elements, 4)`` corner values in P1..P4 order."""
        return self.values[self.mesh.element_nodes]

    def mixed_coefficient(self) -> np.ndarray:
        """``w1234 = w3 + w1 - w2 - w4`` per element."""
        w = self.corners()
        return w[:, 2] + w[:, 0] - w[:, 1] - w[:, 3]

    def mixed_derivative(self) -> np.ndarray:
        """Constant value of the cross derivative on every element."""
        hx, hy = self.mesh.element_sizes
        return self.mixed_coefficient() / (hx * hy)

    def locate(self, x, y):
        """Element id containing each point (right/top edges belong to the last element)."""
        i = np.clip(np.searchsorted(self.mesh.x_breaks, x, side="right") - 1, 0, self.mesh.nx - 1)
        j = np.clip(np.searchsorted(self.mesh.y_breaks, y, side="right") - 1, 0, self.mesh.ny - 1)
        return self.mesh.element_id(i, j)

    def eval_on(self, elements, x, y):
        """Value and gradient of the field restricted to ``elements`` at ``(x, y)``."""
        elements = np.asarray(elements)
        x0, x1, y0, y1 = (b[elements] for b in self.mesh.element_bounds)
        hx, hy = x1 - x0, y1 - y0
        xi = (np.asarray(x) - x0) / hx
        eta = (np.asarray(y) - y0) / hy
        w = self.corners()[elements]
        w1, w2, w3, w4 = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
        w21, w41, w1234 = w2 - w1, w4 - w1, w3 + w1 - w2 - w4
        val = w1 + w21 * xi + w41 * eta + w1234 * xi * eta
        gx = (w21 + w1234 * eta) / hx
        gy = (w41 + w1234 * xi) / hy
        return val, gx, gy

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.eval_on(self.locate(x, y), x, y)[0]

    def gradient(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        _, gx, gy = self.eval_on(self.locate(x, y), x, y)
        return gx, gy


@dataclass(frozen=True, eq=False)
class DualField:
    """Piecewise constant on control volumes; zero on boundary-node cells."""

    mesh: TensorMesh
    values: np.ndarray

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xb, yb = self.mesh.x_breaks, self.mesh.y_breaks
        xm = 0.5 * (xb[:-1] + xb[1:])
        ym = 0.5 * (yb[:-1] + yb[1:])
        i = np.searchsorted(xm, x, side="right")
        j = np.searchsorted(ym, y, side="right")
        return self.values[self.mesh.node_id(i, j)]


def interpolate(u_fn, mesh: TensorMesh) -> NodalField:
    """Nodal bilinear interpolant of ``u_fn(x, y)``."""
    xy = mesh.node_coords
    vals = np.broadcast_to(np.asarray(u_fn(xy[:, 0], xy[:, 1]), dtype=float), (mesh.n_nodes,))
    return NodalField(mesh, vals)


def pi_star(v: NodalField) -> DualField:
    """Map a trial function to the test function with its nodal values on dual cells."""
    vals = np.where(v.mesh.boundary_mask, 0.0, v.values)
    vals.setflags(write=False)
    return DualField(v.mesh, vals)


def cell_average(w_fn, mesh: TensorMesh, q: int = quad.Q_NORM) -> np.ndarray:
    """Mean value of ``w_fn`` over every element."""
    X, Y, W = quad.rect_points(*mesh.element_bounds, q)
    vals = np.broadcast_to(np.asarray(w_fn(X, Y), dtype=float), X.shape)
    hx, hy = mesh.element_sizes
    return np.sum(W * vals, axis=1) / (hx * hy)


def discrete_h1_seminorm_sq_elements(v: NodalField) -> np.ndarray:
    w = v.corners()
    return ((w[:, 1] - w[:, 0]) ** 2 + (w[:, 2] - w[:, 1]) ** 2
            + (w[:, 2] - w[:, 3]) ** 2 + (w[:, 3] - w[:, 0]) ** 2)


def discrete_h1_seminorm(v: NodalField) -> float:
    return float(np.sqrt(np.sum(discrete_h1_seminorm_sq_elements(v))))


def h1_seminorm_sq_elements(v: NodalField, q: int = 2) -> np.ndarray:
    """``int_K |grad v|^2`` per element by Gauss quadrature (2 points are exact)."""
    mesh = v.mesh
    X, Y, W = quad.rect_points(*mesh.element_bounds, q)
    els = np.arange(mesh.n_elements)[:, None]
    _, gx, gy = v.eval_on(els, X, Y)
    return np.sum(W * (gx**2 + gy**2), axis=1)


def h1_norm_sq(v: NodalField, q: int = 2) -> float:
    """Full ``H^1`` norm squared (L2 part plus seminorm) of a bilinear field."""
    mesh = v.mesh
    X, Y, W = quad.rect_points(*mesh.element_bounds, q)
    els = np.arange(mesh.n_elements)[:, None]
    val, gx, gy = v.eval_on(els, X, Y)
    return float(np.sum(W * (val**2 + gx**2 + gy**2)))


def averaged_gradient_class(u_h: NodalField, cls: StressPointClass) -> np.ndarray:
    """Mean of the one-sided element gradients at every point of one stress class.

    Returns an ``(m, 2)`` array.
    """
    els = cls.elements
    px = np.broadcast_to(cls.points[:, 0:1], els.shape)
    py = np.broadcast_to(cls.points[:, 1:2], els.shape)
    _, gx, gy = u_h.eval_on(els, px, py)
    return np.column_stack([gx.mean(axis=1), gy.mean(axis=1)])


def averaged_gradient(u_h: NodalField, point, S: StressPointSet | None = None) -> np.ndarray:
    """Averaged gradient of ``u_h`` at a single stress point."""
    S = S if S is not None else stress_points(u_h.mesh)
    p = np.asarray(point, dtype=float)
    for cls in S.classes:
        hit = np.flatnonzero(np.all(np.abs(cls.points - p) <= 1e-12 * (1 + np.abs(p)), axis=1))
        if hit.size:
            sub = StressPointClass(cls.kind, cls.points[hit[:1]], cls.elements[hit[:1]])
            return averaged_gradient_class(u_h, sub)[0]
    raise ValueError(f"point {tuple(p)} is not a stress point of {u_h.mesh!r}")

