"""Gauss-Legendre rules on segments and tensor-product rules on rectangles.

Every integral in the package goes through this module.  Integrands are
callables ``f(x, y)`` that accept numpy arrays; the batched helpers return
points and weights already mapped onto many rectangles or segments at once
so assembly and error norms stay vectorised.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 6

# default orders
Q_FLUX = 3      # points per dual-boundary half segment
Q_VOLUME = 3    # points per direction on each quarter cell
Q_NORM = 4      # points per direction on each element for error norms


class QuadratureError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentRule:
    """q-point Gauss-Legendre rule on the reference interval [-1, 1]."""

    order: int
    points: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class RectRule:
    """Tensor product of two segment rules on [-1, 1]^2."""

    xrule: SegmentRule
    yrule: SegmentRule

    @property
    def points(self):
        X, Y = np.meshgrid(self.xrule.points, self.yrule.points, indexing="ij")
        return X.ravel(), Y.ravel()

    @property
    def weights(self):
        return np.outer(self.xrule.weights, self.yrule.weights).ravel()


@lru_cache(maxsize=None)
def segment_rule(q: int) -> SegmentRule:
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= MAX_ORDER:
        raise QuadratureError(f"unsupported quadrature order {q!r} (expected 1..{MAX_ORDER})")
    x, w = np.polynomial.legendre.leggauss(int(q))
    x.setflags(write=False)
    w.setflags(write=False)
    return SegmentRule(int(q), x, w)


def rect_rule(qx: int, qy: int | None = None) -> RectRule:
    return RectRule(segment_rule(qx), segment_rule(qx if qy is None else qy))


def integrate_segment(f, p0, p1, q: int = Q_FLUX) -> float:
    """Integrate ``f(x, y)`` along the straight segment from ``p0`` to ``p1``.

    The result is with respect to arc length.
    """
    rule = segment_rule(q)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t = 0.5 * (rule.points + 1.0)
    xs = p0[0] + t * (p1[0] - p0[0])
    ys = p0[1] + t * (p1[1] - p0[1])
    length = float(np.hypot(*(p1 - p0)))
    vals = np.broadcast_to(np.asarray(f(xs, ys), dtype=float), xs.shape)
    return 0.5 * length * float(np.dot(rule.weights, vals))


def integrate_rect(f, rect, qx: int = Q_NORM, qy: int | None = None) -> float:
    """Integrate ``f(x, y)`` over ``rect = (x0, x1, y0, y1)``."""
    x0, x1, y0, y1 = map(float, rect)
    if not (x1 > x0 and y1 > y0):
        raise QuadratureError(f"rectangle {rect!r} has no positive area")
    xs, ys, ws = rect_points(np.array([x0]), np.array([x1]), np.array([y0]), np.array([y1]), qx, qy)
    vals = np.broadcast_to(np.asarray(f(xs, ys), dtype=float), xs.shape)
    return float(np.sum(ws * vals))


def rect_points(x0, x1, y0, y1, qx: int = Q_NORM, qy: int | None = None):
    """Mapped Gauss points for a batch of rectangles.

    Returns ``(X, Y, W)`` each of shape ``(nrect, qx*qy)``; ``W`` already
    includes the Jacobian, so ``sum(W * f(X, Y), axis=1)`` integrates ``f``
    over every rectangle.
    """
    rule = rect_rule(qx, qy)
    px, py = rule.points
    x0, x1, y0, y1 = (np.asarray(a, dtype=float)[:, None] for a in (x0, x1, y0, y1))
    hx = x1 - x0
    hy = y1 - y0
    X = x0 + 0.5 * (px + 1.0) * hx
    Y = y0 + 0.5 * (py + 1.0) * hy
    W = 0.25 * hx * hy * rule.weights
    return X, Y, W


def segment_points(x0, y0, x1, y1, q: int = Q_FLUX):
    """Mapped Gauss points for a batch of segments, shape ``(nseg, q)``.

    Weights are with respect to arc length.
    """
    rule = segment_rule(q)
    t = 0.5 * (rule.points + 1.0)
    x0, y0, x1, y1 = (np.asarray(a, dtype=float)[:, None] for a in (x0, y0, x1, y1))
    X = x0 + t * (x1 - x0)
    Y = y0 + t * (y1 - y0)
    W = 0.5 * np.hypot(x1 - x0, y1 - y0) * rule.weights
    return X, Y, W
