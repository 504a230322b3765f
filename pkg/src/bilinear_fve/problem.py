"""Coefficient data of ``-div(A grad u) + c u = f`` and the manufactured source."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import Expr, Num, BinOp, Neg, differentiate, evaluate, parse

__all__ = ["ProblemData", "manufactured_source", "BENCHMARK"]


def _as_expr(e):
    if e is None or isinstance(e, Expr):
        return e
    if isinstance(e, (int, float)):
        return Num(float(e))
    return parse(e)


@dataclass(frozen=True)
class ProblemData:
    """Diffusion tensor entries, reaction, load, exact solution and boundary data.

    ``a12`` and ``a21`` are kept separately: the tensor need not be symmetric.
    When ``u_exact`` is supplied and ``f`` is not, ``f`` is manufactured from it.
    """

    a11: Expr
    a12: Expr
    a21: Expr
    a22: Expr
    c: Expr
    f: Expr
    u_exact: Expr | None = None
    g: Expr = field(default_factory=lambda: Num(0.0))
    ux_exact: Expr | None = None
    uy_exact: Expr | None = None

    @classmethod
    def create(cls, a11="1", a12="0", a21="0", a22="1", c="0", f=None, u_exact=None, g="0"):
        a11, a12, a21, a22, c, f, u_exact, g = map(_as_expr, (a11, a12, a21, a22, c, f, u_exact, g))
        ux = uy = None
        if u_exact is not None:
            ux = differentiate(u_exact, "x")
            uy = differentiate(u_exact, "y")
        if f is None:
            if u_exact is None:
                raise ValueError("either f or u_exact must be given")
            f = _manufacture(a11, a12, a21, a22, c, u_exact, ux, uy)
        return cls(a11, a12, a21, a22, c, f, u_exact, g, ux, uy)

    @property
    def tensor(self):
        return ((self.a11, self.a12), (self.a21, self.a22))

    def tensor_at(self, x, y):
        """Entries ``(a11, a12, a21, a22)`` evaluated at the given points."""
        return tuple(evaluate(a, x, y) for a in (self.a11, self.a12, self.a21, self.a22))

    def check_assumptions(self, bounds=(0.0, 1.0, 0.0, 1.0), n: int = 21):
        """Sample ellipticity and ``c >= 0`` on an ``n x n`` grid.

        Returns ``(min_eig, min_c)``: the smallest eigenvalue of the symmetric
        part of ``A`` and the smallest value of ``c`` over the samples.
        """
        x0, x1, y0, y1 = bounds
        X, Y = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n), indexing="ij")
        a11, a12, a21, a22 = self.tensor_at(X, Y)
        off = 0.5 * (a12 + a21)
        mean = 0.5 * (a11 + a22)
        rad = np.sqrt((0.5 * (a11 - a22)) ** 2 + off**2)
        return float(np.min(mean - rad)), float(np.min(evaluate(self.c, X, Y)))


def _manufacture(a11, a12, a21, a22, c, u, ux, uy):
    qx = BinOp("+", BinOp("*", a11, ux), BinOp("*", a12, uy))
    qy = BinOp("+", BinOp("*", a21, ux), BinOp("*", a22, uy))
    div = BinOp("+", differentiate(qx, "x"), differentiate(qy, "y"))
    return BinOp("+", Neg(div), BinOp("*", c, u))


def manufactured_source(p: ProblemData) -> Expr:
    """``f = -div(A grad u) + c u`` for the exact solution stored in ``p``."""
    if p.u_exact is None:
        raise ValueError("manufactured_source needs u_exact")
    ux = p.ux_exact if p.ux_exact is not None else differentiate(p.u_exact, "x")
    uy = p.uy_exact if p.uy_exact is not None else differentiate(p.u_exact, "y")
    return _manufacture(p.a11, p.a12, p.a21, p.a22, p.c, p.u_exact, ux, uy)


BENCHMARK = dict(
    a11="exp(2*x)+y^3+1",
    a12="exp(x+y)",
    a21="exp(x+y)",
    a22="exp(2*y)+x^3+1",
    c="2+x+y",
    u_exact="2*sin(2*pi*x)*sin(3*pi*y)",
)
