"""Error measurement against a known exact solution and convergence-rate tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .expr import evaluate
from .femspace import NodalField, averaged_gradient_class, h1_norm_sq, interpolate
from .linalg import SolveReport
from .mesh import StressPointSet, TensorMesh
from .problem import ProblemData

ERROR_COLUMNS = ("e_S", "e_L2", "e_H1", "e_close", "e_inf")


def _require_exact(p: ProblemData):
    if p.u_exact is None:
        raise ValueError("an exact solution is needed to measure errors")


@dataclass(frozen=True)
class StressErrors:
    """Largest averaged-gradient error over the stress points.

    ``euclidean`` is the headline value; ``maxnorm`` uses the larger of the two
    component errors instead; ``by_class`` splits ``euclidean`` by point kind.
    """

    euclidean: float
    maxnorm: float
    by_class: dict


def stress_errors(u_h: NodalField, p: ProblemData, S: StressPointSet) -> StressErrors:
    _require_exact(p)
    euclid = {}
    worst_max = 0.0
    for cls in S.classes:
        if len(cls) == 0:
            euclid[cls.kind] = 0.0
            continue
        g = averaged_gradient_class(u_h, cls)
        ex = evaluate(p.ux_exact, cls.points[:, 0], cls.points[:, 1])
        ey = evaluate(p.uy_exact, cls.points[:, 0], cls.points[:, 1])
        dx = ex - g[:, 0]
        dy = ey - g[:, 1]
        euclid[cls.kind] = float(np.max(np.hypot(dx, dy)))
        worst_max = max(worst_max, float(np.max(np.maximum(np.abs(dx), np.abs(dy)))))
    return StressErrors(max(euclid.values()), worst_max, euclid)


def superconv_error(u_h: NodalField, p: ProblemData, S: StressPointSet) -> float:
    """``max_P |grad u(P) - averaged grad u_h(P)|`` over the stress points."""
    return stress_errors(u_h, p, S).euclidean


def error_norms(u_h: NodalField, p: ProblemData, mesh: TensorMesh | None = None,
                q: int = quad.Q_NORM):
    """``(e_L2, e_H1, e_inf)``: L2 error, H1-seminorm error and largest nodal error."""
    _require_exact(p)
    mesh = u_h.mesh if mesh is None else mesh
    X, Y, W = quad.rect_points(*mesh.element_bounds, q)
    els = np.arange(mesh.n_elements)[:, None]
    val, gx, gy = u_h.eval_on(els, X, Y)
    du = evaluate(p.u_exact, X, Y) - val
    dx = evaluate(p.ux_exact, X, Y) - gx
    dy = evaluate(p.uy_exact, X, Y) - gy
    e_l2 = math.sqrt(float(np.sum(W * du**2)))
    e_h1 = math.sqrt(float(np.sum(W * (dx**2 + dy**2))))
    xy = mesh.node_coords
    e_inf = float(np.max(np.abs(evaluate(p.u_exact, xy[:, 0], xy[:, 1]) - u_h.values)))
    return e_l2, e_h1, e_inf


def supercloseness(u_h: NodalField, p: ProblemData, mesh: TensorMesh | None = None,
                   q: int = quad.Q_NORM) -> float:
    """Full H1 norm of ``Pi_h u - u_h``."""
    _require_exact(p)
    mesh = u_h.mesh if mesh is None else mesh
    diff = NodalField(mesh, interpolate(p.u_exact, mesh).values - u_h.values)
    return math.sqrt(h1_norm_sq(diff, q))


@dataclass(frozen=True)
class LevelErrors:
    n: int
    h: float
    dof: int
    e_S: float | None
    e_L2: float | None
    e_H1: float | None
    e_close: float | None
    e_inf: float | None
    e_S_max: float | None = None
    e_S_by_class: dict = field(default_factory=dict)
    solve: SolveReport | None = None

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("n", "h", "dof") + ERROR_COLUMNS + ("e_S_max",)}
        d["e_S_by_class"] = dict(self.e_S_by_class)
        if self.solve is not None:
            d["solver"] = {"method": self.solve.method, "iterations": self.solve.iterations,
                           "residual": self.solve.residual}
        return d


def measure(u_h: NodalField, p: ProblemData, S: StressPointSet, dof: int,
            solve: SolveReport | None = None, q: int = quad.Q_NORM) -> LevelErrors:
    mesh = u_h.mesh
    if p.u_exact is None:
        return LevelErrors(mesh.nx, mesh.h, dof, None, None, None, None, None, solve=solve)
    se = stress_errors(u_h, p, S)
    e_l2, e_h1, e_inf = error_norms(u_h, p, mesh, q)
    e_close = supercloseness(u_h, p, mesh, q)
    return LevelErrors(mesh.nx, mesh.h, dof, se.euclidean, e_l2, e_h1, e_close, e_inf,
                       se.maxnorm, se.by_class, solve)


def rate(e_coarse, e_fine):
    """``ln(e_h / e_{h/2}) / ln 2``; ``None`` when either error is absent or zero."""
    if e_coarse is None or e_fine is None or not (e_coarse > 0 and e_fine > 0):
        return None
    return math.log(e_coarse / e_fine) / math.log(2.0)


@dataclass(frozen=True)
class StudyReport:
    levels: list
    rates: dict  # column -> list of len(levels) - 1 rates (None where undefined)

    def column(self, name: str):
        return [getattr(lv, name) for lv in self.levels]


def rate_table(levels, columns=ERROR_COLUMNS) -> StudyReport:
    levels = list(levels)
    if len(levels) < 1:
        raise ValueError("rate_table needs at least one level")
    rates = {}
    for col in columns:
        vals = [getattr(lv, col) if not isinstance(lv, dict) else lv[col] for lv in levels]
        rates[col] = [rate(a, b) for a, b in zip(vals[:-1], vals[1:])]
    return StudyReport(levels, rates)
