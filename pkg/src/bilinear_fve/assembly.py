"""Element-by-element assembly of the finite volume element and Galerkin systems.

Inside an element the control-volume boundaries form a cross through the
element centre.  Each corner's control volume meets the element in a
quarter rectangle bounded, inside the element, by two half segments of
that cross:

* corner 1 (lower left):  vertical lower half (normal +x), horizontal left half (normal +y)
* corner 2 (lower right): vertical lower half (normal -x), horizontal right half (normal +y)
* corner 3 (upper right): vertical upper half (normal -x), horizontal right half (normal -y)
* corner 4 (upper left):  vertical upper half (normal +x), horizontal left half (normal -y)

The FVE row of node P is ``-int_{dK_P*} n.(A grad u) ds + int_{K_P*} c u``
tested against the characteristic function of ``K_P*``; it is accumulated
from these per-element pieces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .expr import evaluate
from .femspace import NodalField, basis_batch
from .linalg import SparseMatrix, from_triplets
from .mesh import TensorMesh
from .problem import ProblemData

FVE = "fve"
FEM = "fem"


@dataclass(frozen=True, eq=False)
class System:
    """Matrix over all mesh nodes plus load vector, before boundary conditions.

    For the FVE kind, rows belonging to boundary nodes are by-products of the
    element loop and carry no equation; they are dropped by ``apply_dirichlet``.
    """

    kind: str
    mesh: TensorMesh
    matrix: SparseMatrix
    load: np.ndarray


FveSystem = System
FemSystem = System


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Square system over interior unknowns after eliminating Dirichlet values."""

    kind: str
    mesh: TensorMesh
    matrix: SparseMatrix
    rhs: np.ndarray
    interior: np.ndarray          # unknown k <-> node interior[k]
    boundary: np.ndarray
    boundary_values: np.ndarray

    def expand(self, x) -> NodalField:
        vals = np.zeros(self.mesh.n_nodes)
        vals[self.interior] = x
        vals[self.boundary] = self.boundary_values
        return NodalField(self.mesh, vals)


# ----------------------------------------------------------------- helpers


def _element_geometry(mesh: TensorMesh):
    x1, x2, y1, y2 = mesh.element_bounds
    return x1, x2, y1, y2, 0.5 * (x1 + x2), 0.5 * (y1 + y2)


def _local_coords(X, Y, x1, y1, hx, hy):
    return (X - x1[:, None]) / hx[:, None], (Y - y1[:, None]) / hy[:, None]


def _scatter(mesh: TensorMesh, local: np.ndarray) -> SparseMatrix:
    """Sum ``(nel, 4, 4)`` local matrices into a global CSR matrix."""
    en = mesh.element_nodes
    rows = np.broadcast_to(en[:, :, None], local.shape)
    cols = np.broadcast_to(en[:, None, :], local.shape)
    return from_triplets(mesh.n_nodes, rows, cols, local)


def _scatter_vec(mesh: TensorMesh, local: np.ndarray) -> np.ndarray:
    return np.bincount(mesh.element_nodes.ravel(), weights=local.ravel(), minlength=mesh.n_nodes)


def _tensor(p: ProblemData, X, Y):
    return p.tensor_at(X, Y)


def cross_fluxes(mesh: TensorMesh, p: ProblemData, gradient, q: int = quad.Q_FLUX):
    """Normal-flux integrals over the four half segments of every element's cross.

    ``gradient(X, Y, xi, eta, hx, hy)`` returns ``(wx, wy)`` with shape
    ``(k, nel, q)`` (``k`` trial functions at once).  Returns a dict of
    ``(k, nel)`` arrays: ``vb``/``vt`` hold ``int (a11 wx + a12 wy) dy`` over the
    lower/upper vertical halves, ``hl``/``hr`` hold ``int (a21 wx + a22 wy) dx``
    over the left/right horizontal halves.
    """
    x1, x2, y1, y2, xm, ym = _element_geometry(mesh)
    hx, hy = x2 - x1, y2 - y1
    segs = {
        "vb": (xm, y1, xm, ym),
        "vt": (xm, ym, xm, y2),
        "hl": (x1, ym, xm, ym),
        "hr": (xm, ym, x2, ym),
    }
    out = {}
    for name, (ax, ay, bx, by) in segs.items():
        X, Y, W = quad.segment_points(ax, ay, bx, by, q)
        xi, eta = _local_coords(X, Y, x1, y1, hx, hy)
        wx, wy = gradient(X, Y, xi, eta, hx[:, None], hy[:, None])
        a11, a12, a21, a22 = _tensor(p, X, Y)
        if name[0] == "v":
            flux = a11 * wx + a12 * wy
        else:
            flux = a21 * wx + a22 * wy
        out[name] = np.sum(W * flux, axis=-1)
    return out


def _corner_flux_rows(fl):
    """Outflow-with-minus-sign per corner, shape ``(4, k, nel)``."""
    vb, vt, hl, hr = fl["vb"], fl["vt"], fl["hl"], fl["hr"]
    return np.stack([
        -(vb + hl),
        vb - hr,
        vt + hr,
        -vt + hl,
    ])


def _quarters(mesh: TensorMesh):
    x1, x2, y1, y2, xm, ym = _element_geometry(mesh)
    return [
        (x1, xm, y1, ym),
        (xm, x2, y1, ym),
        (xm, x2, ym, y2),
        (x1, xm, ym, y2),
    ]


def _basis_gradient(X, Y, xi, eta, hx, hy):
    _, dx, dy = basis_batch(xi, eta, hx, hy)
    return dx, dy


# ---------------------------------------------------------------- assembly


def assemble_fve(mesh: TensorMesh, p: ProblemData, q_flux: int = quad.Q_FLUX,
                 q_volume: int = quad.Q_VOLUME) -> System:
    """Control-volume balance matrix and load over all nodes."""
    x1, x2, y1, y2, _, _ = _element_geometry(mesh)
    hx, hy = x2 - x1, y2 - y1
    fl = cross_fluxes(mesh, p, _basis_gradient, q_flux)
    # local[e, i, j]: row = test corner i, column = trial corner j
    local = np.transpose(_corner_flux_rows(fl), (2, 0, 1)).copy()
    load = np.zeros((mesh.n_elements, 4))
    for i, (a, b, c, d) in enumerate(_quarters(mesh)):
        X, Y, W = quad.rect_points(a, b, c, d, q_volume)
        xi, eta = _local_coords(X, Y, x1, y1, hx, hy)
        phi, _, _ = basis_batch(xi, eta, hx[:, None], hy[:, None])
        cw = evaluate(p.c, X, Y) * W
        local[:, i, :] += np.sum(cw[None] * phi, axis=-1).T
        load[:, i] = np.sum(evaluate(p.f, X, Y) * W, axis=1)
    return System(FVE, mesh, _scatter(mesh, local), _scatter_vec(mesh, load))


def assemble_fem(mesh: TensorMesh, p: ProblemData, q: int = quad.Q_VOLUME) -> System:
    """Galerkin stiffness plus mass ``int A grad u . grad v + c u v`` and load ``int f v``."""
    x1, x2, y1, y2, _, _ = _element_geometry(mesh)
    hx, hy = x2 - x1, y2 - y1
    X, Y, W = quad.rect_points(x1, x2, y1, y2, q)
    xi, eta = _local_coords(X, Y, x1, y1, hx, hy)
    phi, dx, dy = basis_batch(xi, eta, hx[:, None], hy[:, None])
    a11, a12, a21, a22 = _tensor(p, X, Y)
    c = evaluate(p.c, X, Y)
    # trial j flux: (a11 dxj + a12 dyj, a21 dxj + a22 dyj); test i gradient (dxi, dyi)
    fx = a11 * dx + a12 * dy
    fy = a21 * dx + a22 * dy
    local = (np.einsum("eq,ieq,jeq->eij", W, dx, fx)
             + np.einsum("eq,ieq,jeq->eij", W, dy, fy)
             + np.einsum("eq,ieq,jeq->eij", W * c, phi, phi))
    load = np.einsum("eq,ieq->ei", W * evaluate(p.f, X, Y), phi)
    return System(FEM, mesh, _scatter(mesh, local), _scatter_vec(mesh, load))


def apply_dirichlet(system: System, g=None) -> ReducedSystem:
    """Fix boundary nodes to the nodal values of ``g`` and eliminate them."""
    mesh = system.mesh
    interior = mesh.interior_nodes
    boundary = np.flatnonzero(mesh.boundary_mask)
    xy = mesh.node_coords[boundary]
    if g is None:
        gvals = np.zeros(boundary.size)
    else:
        # Expr instances are callable too
        gvals = np.broadcast_to(np.asarray(g(xy[:, 0], xy[:, 1]), dtype=float), boundary.shape).copy()
    ub = np.zeros(mesh.n_nodes)
    ub[boundary] = gvals
    rhs = system.load[interior] - system.matrix.matvec(ub)[interior]
    A = system.matrix.submatrix(interior, interior)
    return ReducedSystem(system.kind, mesh, A, rhs, interior, boundary, gvals)


# ------------------------------------------------------- form evaluation


def form_value(system: System, w, v) -> float:
    """``a_h(w, Pi* v)`` for FVE systems, ``a(w, v)`` for FEM systems.

    ``w`` and ``v`` are nodal fields (or nodal value arrays).  For the FVE form
    the test function's boundary values are dropped, as the test space requires.
    """
    wv = w.values if isinstance(w, NodalField) else np.asarray(w, dtype=float)
    vv = v.values if isinstance(v, NodalField) else np.asarray(v, dtype=float)
    if system.kind == FVE:
        vv = np.where(system.mesh.boundary_mask, 0.0, vv)
    return float(vv @ system.matrix.matvec(wv))


def fve_form_smooth(mesh: TensorMesh, p: ProblemData, w, wx, wy, v,
                    q_flux: int = 6, q_volume: int = 6) -> float:
    """``a_h(w, Pi* v)`` for a smooth ``w`` given by callables for value and gradient."""
    vv = v.values if isinstance(v, NodalField) else np.asarray(v, dtype=float)
    vv = np.where(mesh.boundary_mask, 0.0, vv)

    def grad(X, Y, xi, eta, hx, hy):
        return np.asarray(wx(X, Y))[None], np.asarray(wy(X, Y))[None]

    fl = cross_fluxes(mesh, p, grad, q_flux)
    rows = _corner_flux_rows(fl)[:, 0, :].T.copy()    # (nel, 4)
    for i, (a, b, c, d) in enumerate(_quarters(mesh)):
        X, Y, W = quad.rect_points(a, b, c, d, q_volume)
        rows[:, i] += np.sum(W * evaluate(p.c, X, Y) * w(X, Y), axis=1)
    return float(np.sum(rows * vv[mesh.element_nodes]))
