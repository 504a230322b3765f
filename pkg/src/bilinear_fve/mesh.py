"""Tensor-product rectangular meshes, their central dual cells and stress points.

Node ``(i, j)`` sits at ``(x_breaks[i], y_breaks[j])`` and has global id
``i + j*(nx+1)``.  Element ``(i, j)`` is ``[x_i, x_{i+1}] x [y_j, y_{j+1}]``
with id ``i + j*nx``; its corners are numbered counter-clockwise from the
lower-left one (P1 lower-left, P2 lower-right, P3 upper-right, P4 upper-left).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class InvalidMeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TensorMesh:
    x_breaks: np.ndarray
    y_breaks: np.ndarray

    def __post_init__(self):
        for name in ("x_breaks", "y_breaks"):
            b = np.array(getattr(self, name), dtype=float)
            if b.ndim != 1 or b.size < 2:
                raise InvalidMeshError(f"{name} needs at least two break points")
            if not np.all(np.isfinite(b)):
                raise InvalidMeshError(f"{name} contains non-finite values")
            if np.any(np.diff(b) <= 0):
                raise InvalidMeshError(f"{name} must be strictly increasing")
            b.setflags(write=False)
            object.__setattr__(self, name, b)

    @property
    def nx(self) -> int:
        return self.x_breaks.size - 1

    @property
    def ny(self) -> int:
        return self.y_breaks.size - 1

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def bounds(self):
        return (self.x_breaks[0], self.x_breaks[-1], self.y_breaks[0], self.y_breaks[-1])

    @property
    def area(self) -> float:
        x0, x1, y0, y1 = self.bounds
        return float((x1 - x0) * (y1 - y0))

    def node_id(self, i, j):
        return i + j * (self.nx + 1)

    def element_id(self, i, j):
        return i + j * self.nx

    @cached_property
    def node_coords(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x_breaks, self.y_breaks, indexing="xy")
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        i = np.tile(np.arange(self.nx + 1), self.ny + 1)
        j = np.repeat(np.arange(self.ny + 1), self.nx + 1)
        m = (i == 0) | (i == self.nx) | (j == 0) | (j == self.ny)
        m.setflags(write=False)
        return m

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    @cached_property
    def element_nodes(self) -> np.ndarray:
        """``(n_elements, 4)`` corner node ids in P1..P4 order."""
        i = np.tile(np.arange(self.nx), self.ny)
        j = np.repeat(np.arange(self.ny), self.nx)
        n1 = self.node_id(i, j)
        nodes = np.column_stack([n1, n1 + 1, n1 + self.nx + 2, n1 + self.nx + 1])
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def element_bounds(self):
        """Arrays ``(x0, x1, y0, y1)``, one entry per element."""
        x0 = np.tile(self.x_breaks[:-1], self.ny)
        x1 = np.tile(self.x_breaks[1:], self.ny)
        y0 = np.repeat(self.y_breaks[:-1], self.nx)
        y1 = np.repeat(self.y_breaks[1:], self.nx)
        return x0, x1, y0, y1

    @cached_property
    def element_sizes(self):
        x0, x1, y0, y1 = self.element_bounds
        return x1 - x0, y1 - y0

    @property
    def h(self) -> float:
        """Largest element diameter."""
        hx, hy = self.element_sizes
        return float(np.max(np.hypot(hx, hy)))

    @property
    def gamma(self) -> float:
        """Regularity ``max_K h_K / rho_K`` with ``rho_K`` the shorter side."""
        hx, hy = self.element_sizes
        return float(np.max(np.hypot(hx, hy) / np.minimum(hx, hy)))

    @property
    def quasi_uniformity(self) -> float:
        """``max h_K / min h_K`` over elements."""
        hx, hy = self.element_sizes
        d = np.hypot(hx, hy)
        return float(d.max() / d.min())

    def __repr__(self):
        return f"TensorMesh(nx={self.nx}, ny={self.ny}, bounds={tuple(map(float, self.bounds))})"


def build_tensor_mesh(x_breaks, y_breaks) -> TensorMesh:
    return TensorMesh(x_breaks, y_breaks)


def uniform_mesh(n: int, ny: int | None = None, bounds=(0.0, 1.0, 0.0, 1.0)) -> TensorMesh:
    ny = n if ny is None else ny
    if n < 1 or ny < 1:
        raise InvalidMeshError("a mesh needs at least one element per direction")
    x0, x1, y0, y1 = bounds
    return TensorMesh(np.linspace(x0, x1, n + 1), np.linspace(y0, y1, ny + 1))


def _bisect(b):
    out = np.empty(2 * b.size - 1)
    out[0::2] = b
    out[1::2] = 0.5 * (b[:-1] + b[1:])
    return out


def refine_halve(mesh: TensorMesh) -> TensorMesh:
    """Insert the midpoint of every break interval (each element splits in four)."""
    return TensorMesh(_bisect(mesh.x_breaks), _bisect(mesh.y_breaks))


# ----------------------------------------------------------------- dual mesh


@dataclass(frozen=True)
class DualCell:
    node: int
    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


def _dual_extent(b):
    lo = np.empty_like(b)
    hi = np.empty_like(b)
    mid = 0.5 * (b[:-1] + b[1:])
    lo[0] = b[0]
    lo[1:] = mid
    hi[-1] = b[-1]
    hi[:-1] = mid
    return lo, hi


def dual_cells(mesh: TensorMesh):
    """Bounds ``(x0, x1, y0, y1)`` of every node's control volume, clipped at the boundary."""
    xl, xh = _dual_extent(mesh.x_breaks)
    yl, yh = _dual_extent(mesh.y_breaks)
    nx1 = mesh.nx + 1
    ny1 = mesh.ny + 1
    return np.tile(xl, ny1), np.tile(xh, ny1), np.repeat(yl, nx1), np.repeat(yh, nx1)


def dual_cell(mesh: TensorMesh, node: int) -> DualCell:
    if not (0 <= int(node) < mesh.n_nodes) or int(node) != node:
        raise IndexError(f"node id {node!r} out of range for {mesh!r}")
    node = int(node)
    i = node % (mesh.nx + 1)
    j = node // (mesh.nx + 1)
    xb, yb = mesh.x_breaks, mesh.y_breaks
    x0 = xb[i] if i == 0 else 0.5 * (xb[i - 1] + xb[i])
    x1 = xb[i] if i == mesh.nx else 0.5 * (xb[i] + xb[i + 1])
    y0 = yb[j] if j == 0 else 0.5 * (yb[j - 1] + yb[j])
    y1 = yb[j] if j == mesh.ny else 0.5 * (yb[j] + yb[j + 1])
    return DualCell(node, float(x0), float(x1), float(y0), float(y1))


# ------------------------------------------------------------- stress points

NODE, EDGE, CENTER = "node", "edge", "center"


@dataclass(frozen=True, eq=False)
class StressPointClass:
    """Points of one kind with the ids of the elements containing each of them."""

    kind: str
    points: np.ndarray     # (m, 2)
    elements: np.ndarray   # (m, k), k = 4, 2 or 1

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class StressPointSet:
    nodes: StressPointClass
    edges: StressPointClass
    centers: StressPointClass

    @property
    def classes(self):
        return (self.nodes, self.edges, self.centers)

    def __len__(self):
        return sum(len(c) for c in self.classes)

    def all_points(self) -> np.ndarray:
        return np.vstack([c.points for c in self.classes])


def stress_points(mesh: TensorMesh) -> StressPointSet:
    """Interior nodes, interior-edge midpoints and element midpoints."""
    nx, ny = mesh.nx, mesh.ny
    xb, yb = mesh.x_breaks, mesh.y_breaks
    eid = mesh.element_id

    # interior nodes: elements to the lower-left, lower-right, upper-right, upper-left
    I, J = np.meshgrid(np.arange(1, nx), np.arange(1, ny), indexing="xy")
    I, J = I.ravel(), J.ravel()
    node_pts = np.column_stack([xb[I], yb[J]])
    node_els = np.column_stack([eid(I - 1, J - 1), eid(I, J - 1), eid(I, J), eid(I - 1, J)])

    # vertical interior edges x = x_i (1 <= i < nx) between elements (i-1, j) and (i, j)
    I, J = np.meshgrid(np.arange(1, nx), np.arange(ny), indexing="xy")
    I, J = I.ravel(), J.ravel()
    v_pts = np.column_stack([xb[I], 0.5 * (yb[J] + yb[J + 1])])
    v_els = np.column_stack([eid(I - 1, J), eid(I, J)])
    # horizontal interior edges y = y_j (1 <= j < ny) between (i, j-1) and (i, j)
    I, J = np.meshgrid(np.arange(nx), np.arange(1, ny), indexing="xy")
    I, J = I.ravel(), J.ravel()
    h_pts = np.column_stack([0.5 * (xb[I] + xb[I + 1]), yb[J]])
    h_els = np.column_stack([eid(I, J - 1), eid(I, J)])

    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    I, J = I.ravel(), J.ravel()
    c_pts = np.column_stack([0.5 * (xb[I] + xb[I + 1]), 0.5 * (yb[J] + yb[J + 1])])
    c_els = eid(I, J)[:, None]

    def cls(kind, pts, els, k):
        pts = pts.reshape(-1, 2).astype(float)
        els = els.reshape(pts.shape[0], k).astype(np.int64)
        return StressPointClass(kind, pts, els)

    return StressPointSet(
        cls(NODE, node_pts, node_els, 4),
        cls(EDGE, np.vstack([v_pts, h_pts]), np.vstack([v_els.reshape(-1, 2), h_els.reshape(-1, 2)]), 2),
        cls(CENTER, c_pts, c_els, 1),
    )
