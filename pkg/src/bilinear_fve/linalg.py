"""Compressed-row matrices plus the two solvers used for the FVE systems.

The direct path stores the matrix in LAPACK band format and hands it to
``scipy.linalg.solve_banded`` (partial-pivoting band LU).  The iterative
path is a Jacobi-preconditioned BiCGStab written here.  The FVE matrix is
not symmetric, so conjugate gradients is deliberately absent.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)

DIRECT_SIZE_CAP = 50_000_000  # max (lower + upper + 1) * n entries for band LU


class SolverError(RuntimeError):
    """Solve failed; ``residual`` is the best relative residual reached."""

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    @property
    def row_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.indptr))

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"vector of length {self.n} expected, got shape {x.shape}")
        return np.bincount(self.row_ids, weights=self.data * x[self.indices], minlength=self.n)

    __matmul__ = matvec

    def diagonal(self) -> np.ndarray:
        rows = self.row_ids
        d = np.zeros(self.n)
        on = rows == self.indices
        d[rows[on]] = self.data[on]
        return d

    def bandwidth(self):
        """``(lower, upper)`` half bandwidths."""
        if self.nnz == 0:
            return 0, 0
        off = self.row_ids - self.indices
        return int(max(off.max(), 0)), int(max(-off.min(), 0))

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        A[self.row_ids, self.indices] = self.data
        return A

    def row(self, i: int):
        sl = slice(self.indptr[i], self.indptr[i + 1])
        return self.indices[sl], self.data[sl]

    def submatrix(self, rows, cols) -> "SparseMatrix":
        """Square restriction to ``rows x cols`` (equal-length index arrays)."""
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        if rows.size != cols.size:
            raise ValueError("submatrix must be square")
        col_map = np.full(self.n, -1)
        col_map[cols] = np.arange(cols.size)
        row_map = np.full(self.n, -1)
        row_map[rows] = np.arange(rows.size)
        r = row_map[self.row_ids]
        c = col_map[self.indices]
        keep = (r >= 0) & (c >= 0)
        return from_triplets(rows.size, r[keep], c[keep], self.data[keep])


def from_triplets(n: int, rows, cols=None, vals=None) -> SparseMatrix:
    """Build an ``n x n`` CSR matrix, summing duplicate entries.

    Accepts either three parallel arrays or a single list of ``(row, col, val)``.
    """
    if cols is None and vals is None:
        trip = list(rows)
        rows = np.array([t[0] for t in trip], dtype=np.int64)
        cols = np.array([t[1] for t in trip], dtype=np.int64)
        vals = np.array([t[2] for t in trip], dtype=float)
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=float).ravel()
    if not (rows.size == cols.size == vals.size):
        raise ValueError("triplet arrays differ in length")
    if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
        raise IndexError(f"triplet index out of range for a {n} x {n} matrix")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size:
        new = np.ones(rows.size, dtype=bool)
        new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(new)
        vals = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return SparseMatrix(n, indptr, cols, vals)


def identity(n: int) -> SparseMatrix:
    i = np.arange(n)
    return from_triplets(n, i, i, np.ones(n))


@dataclass(frozen=True)
class SolveOptions:
    method: str = "auto"  # auto | direct | bicgstab
    tol: float = 1e-12
    max_iter: int | None = None  # default 10 * n


@dataclass(frozen=True)
class SolveReport:
    method: str
    iterations: int
    residual: float
    seconds: float


def relative_residual(A: SparseMatrix, x, b) -> float:
    b = np.asarray(b, dtype=float)
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - A.matvec(x))
    return float(r / nb) if nb > 0 else float(r)


def solve_banded_lu(A: SparseMatrix, b) -> np.ndarray:
    lower, upper = A.bandwidth()
    ab = np.zeros((lower + upper + 1, A.n))
    ab[upper + A.row_ids - A.indices, A.indices] = A.data
    try:
        return scipy.linalg.solve_banded((lower, upper), ab, np.asarray(b, dtype=float),
                                         check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"band LU failed: {exc}") from exc


def bicgstab(A: SparseMatrix, b, tol: float = 1e-12, max_iter: int | None = None, x0=None):
    """Jacobi-preconditioned BiCGStab.  Returns ``(x, iterations)``."""
    b = np.asarray(b, dtype=float)
    n = A.n
    max_iter = 10 * n if max_iter is None else max_iter
    d = A.diagonal()
    if np.any(d == 0):
        raise SolverError("zero diagonal entry, Jacobi preconditioner undefined")
    dinv = 1.0 / d
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    nb = np.linalg.norm(b)
    if nb == 0:
        return np.zeros(n), 0
    r = b - A.matvec(x)
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    best_res = np.linalg.norm(r) / nb
    if best_res <= tol:
        return x, 0
    for it in range(1, max_iter + 1):
        rho_new = r_hat @ r
        if rho_new == 0.0 or omega == 0.0:
            raise SolverError("BiCGStab breakdown", best_res, it)
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        y = dinv * p
        v = A.matvec(y)
        denom = r_hat @ v
        if denom == 0.0:
            raise SolverError("BiCGStab breakdown", best_res, it)
        alpha = rho / denom
        x = x + alpha * y
        s = r - alpha * v
        if np.linalg.norm(s) / nb <= tol:
            r = b - A.matvec(x)
            if np.linalg.norm(r) / nb <= tol:
                return x, it
            r_hat, rho, alpha, omega = r.copy(), 1.0, 1.0, 1.0
            v[:] = 0.0
            p[:] = 0.0
            continue
        z = dinv * s
        t = A.matvec(z)
        tt = t @ t
        omega = (t @ s) / tt if tt > 0 else 0.0
        x = x + omega * z
        r = s - omega * t
        res = np.linalg.norm(r) / nb
        best_res = min(best_res, res)
        if res <= tol:
            r = b - A.matvec(x)
            res = np.linalg.norm(r) / nb
            if res <= tol:
                return x, it
            r_hat, rho, alpha, omega = r.copy(), 1.0, 1.0, 1.0
            v[:] = 0.0
            p[:] = 0.0
    raise SolverError("BiCGStab did not converge", best_res, max_iter)


def choose_method(A: SparseMatrix) -> str:
    lower, upper = A.bandwidth()
    return "direct" if (lower + upper + 1) * A.n <= DIRECT_SIZE_CAP else "bicgstab"


def solve(A: SparseMatrix, b, opts: SolveOptions | None = None):
    """Solve ``A x = b`` to relative residual ``opts.tol``.

    The reported residual is recomputed from the returned ``x``.  The band LU
    result gets one step of iterative refinement if it misses the tolerance.
    """
    opts = opts or SolveOptions()
    method = choose_method(A) if opts.method == "auto" else opts.method
    b = np.asarray(b, dtype=float)
    t0 = time.perf_counter()
    if method == "direct":
        x = solve_banded_lu(A, b)
        iters = 0
        if relative_residual(A, x, b) > opts.tol:
            x = x + solve_banded_lu(A, b - A.matvec(x))
            iters = 1
    elif method == "bicgstab":
        x, iters = bicgstab(A, b, tol=opts.tol, max_iter=opts.max_iter)
    else:
        raise ValueError(f"unknown solver {opts.method!r}")
    seconds = time.perf_counter() - t0
    res = relative_residual(A, x, b)
    if not res <= opts.tol:
        raise SolverError(f"{method} solve missed tolerance {opts.tol:.1e}", res, iters)
    log.debug("solve n=%d method=%s iters=%d residual=%.2e", A.n, method, iters, res)
    return x, SolveReport(method, iters, res, seconds)
