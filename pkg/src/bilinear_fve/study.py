"""Study configuration, single-level solves and refinement studies.

Config files are flat ``key = value`` text: one key per line, strings in
double quotes, numbers bare, ``#`` starts a comment.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import logging
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import quadrature as quad
from .analysis import ERROR_COLUMNS, LevelErrors, StudyReport, measure, rate_table
from .assembly import apply_dirichlet, assemble_fve
from .femspace import NodalField
from .linalg import SolveOptions, solve
from .mesh import refine_halve, stress_points, uniform_mesh
from .problem import ProblemData

log = logging.getLogger(__name__)

STRING_KEYS = ("a11", "a12", "a21", "a22", "c", "u_exact", "f", "g", "solver")
INT_KEYS = ("h0_denominator", "levels", "seed", "q_flux", "q_volume", "q_norm")
FLOAT_KEYS = ("tol",)
CSV_COLUMNS = ("h", "dof", "e_S", "rate_S", "e_L2", "rate_L2", "e_H1", "rate_H1",
               "e_close", "rate_close", "e_inf", "rate_inf", "iters", "seconds")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    a11: str = "1"
    a12: str = "0"
    a21: str = "0"
    a22: str = "1"
    c: str = "0"
    u_exact: str | None = None
    f: str | None = None
    g: str = "0"
    h0_denominator: int = 4
    levels: int = 1
    solver: str = "auto"
    tol: float = 1e-12
    seed: int = 0
    q_flux: int = quad.Q_FLUX
    q_volume: int = quad.Q_VOLUME
    q_norm: int = quad.Q_NORM

    def __post_init__(self):
        if self.levels < 1:
            raise ConfigError("levels must be at least 1")
        if self.h0_denominator < 1:
            raise ConfigError("h0_denominator must be a positive integer")
        if self.u_exact is None and self.f is None:
            raise ConfigError("either u_exact or f must be given")
        if self.solver not in ("auto", "direct", "bicgstab"):
            raise ConfigError(f"solver must be auto, direct or bicgstab, not {self.solver!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        for k in ("q_flux", "q_volume", "q_norm"):
            if not 1 <= getattr(self, k) <= quad.MAX_ORDER:
                raise ConfigError(f"{k} must lie in 1..{quad.MAX_ORDER}")

    @property
    def has_exact(self) -> bool:
        return self.u_exact is not None

    def problem(self) -> ProblemData:
        return ProblemData.create(self.a11, self.a12, self.a21, self.a22, self.c,
                                  f=self.f, u_exact=self.u_exact, g=self.g)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(method=self.solver, tol=self.tol)


def parse_config(text: str) -> StudyConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            lit = ast.literal_eval(value.strip())
        except (ValueError, SyntaxError):
            raise ConfigError(f"line {lineno}: cannot read value {value.strip()!r}") from None
        if key in STRING_KEYS:
            if not isinstance(lit, str):
                raise ConfigError(f"line {lineno}: {key} must be a quoted string")
        elif key in INT_KEYS:
            if not isinstance(lit, int) or isinstance(lit, bool):
                raise ConfigError(f"line {lineno}: {key} must be an integer")
        elif key in FLOAT_KEYS:
            if not isinstance(lit, (int, float)) or isinstance(lit, bool):
                raise ConfigError(f"line {lineno}: {key} must be a number")
            lit = float(lit)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = lit
    return StudyConfig(**values)


def load_config(path) -> StudyConfig:
    return parse_config(Path(path).read_text())


def benchmark_config() -> StudyConfig:
    text = resources.files("bilinear_fve").joinpath("data/benchmark.cfg").read_text()
    return parse_config(text)


# ------------------------------------------------------------------ solving


@dataclass
class LevelResult:
    u_h: NodalField
    errors: LevelErrors
    seconds: float


def run_level(cfg: StudyConfig, n: int, problem: ProblemData | None = None) -> LevelResult:
    """Assemble, solve and measure on the uniform ``n x n`` mesh of the unit square."""
    p = problem if problem is not None else cfg.problem()
    t0 = time.perf_counter()
    mesh = uniform_mesh(n)
    system = apply_dirichlet(assemble_fve(mesh, p, cfg.q_flux, cfg.q_volume), p.g)
    x, report = solve(system.matrix, system.rhs, cfg.solve_options())
    u_h = system.expand(x)
    errors = measure(u_h, p, stress_points(mesh), system.matrix.n, report, cfg.q_norm)
    return LevelResult(u_h, errors, time.perf_counter() - t0)


class StudyFailed(RuntimeError):
    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


def run_study(cfg: StudyConfig, levels: int | None = None, problem: ProblemData | None = None):
    """Solve on ``h0, h0/2, ...`` and tabulate observed rates.

    Returns ``(StudyReport, seconds_per_level)``.  If a level fails, a
    ``StudyFailed`` carrying the completed levels is raised.
    """
    levels = cfg.levels if levels is None else levels
    p = problem if problem is not None else cfg.problem()
    done, seconds = [], []
    mesh = uniform_mesh(cfg.h0_denominator)
    for k in range(levels):
        try:
            res = run_level(cfg, mesh.nx, p)
        except Exception as exc:
            raise StudyFailed(f"level {k} (n={mesh.nx}) failed: {exc}",
                              (rate_table(done), seconds) if done else None) from exc
        log.info("n=%d e_S=%s seconds=%.2f", mesh.nx, res.errors.e_S, res.seconds)
        done.append(res.errors)
        seconds.append(res.seconds)
        mesh = refine_halve(mesh)
    return rate_table(done), seconds


# ------------------------------------------------------------------ output


def fmt_float(v) -> str:
    return "" if v is None else repr(float(v))


def fmt_rate(v) -> str:
    return "" if v is None else f"{v:.4f}"


def study_rows(report: StudyReport, seconds=None):
    rows = []
    for k, lv in enumerate(report.levels):
        row = {"h": fmt_float(lv.h), "dof": str(lv.dof)}
        for col in ERROR_COLUMNS:
            row[col] = fmt_float(getattr(lv, col))
            r = report.rates[col][k - 1] if k > 0 else None
            row["rate_" + col[2:]] = fmt_rate(r)
        row["iters"] = "" if lv.solve is None else str(lv.solve.iterations)
        row["seconds"] = "" if seconds is None else f"{seconds[k]:.3f}"
        rows.append(row)
    return rows


def study_csv(report: StudyReport, seconds=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(study_rows(report, seconds))
    return buf.getvalue()


def study_json(report: StudyReport) -> str:
    doc = {
        "levels": [lv.as_dict() for lv in report.levels],
        "rates": report.rates,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def format_table(report: StudyReport) -> str:
    """Plain-text rate table for the terminal."""
    head = f"{'n':>6} {'dof':>7} {'e_S':>11} {'rate':>7} {'e_L2':>11} {'rate':>7} " \
           f"{'e_H1':>11} {'rate':>7} {'e_close':>11} {'rate':>7}"
    lines = [head, "-" * len(head)]
    for k, lv in enumerate(report.levels):
        parts = [f"{lv.n:>6d}", f"{lv.dof:>7d}"]
        for col in ("e_S", "e_L2", "e_H1", "e_close"):
            v = getattr(lv, col)
            r = report.rates[col][k - 1] if k > 0 else None
            parts.append(f"{v:>11.4e}" if v is not None else f"{'-':>11}")
            parts.append(f"{r:>7.4f}" if r is not None else f"{'--':>7}")
        lines.append(" ".join(parts))
    return "\n".join(lines)


def solution_csv(u_h: NodalField, problem: ProblemData | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    exact = problem is not None and problem.u_exact is not None
    w.writerow(["node", "x", "y", "u_h"] + (["u_exact"] if exact else []))
    xy = u_h.mesh.node_coords
    ue = problem.u_exact(xy[:, 0], xy[:, 1]) if exact else None
    for k in range(u_h.mesh.n_nodes):
        row = [k, fmt_float(xy[k, 0]), fmt_float(xy[k, 1]), fmt_float(u_h.values[k])]
        if exact:
            row.append(fmt_float(ue[k]))
        w.writerow(row)
    return buf.getvalue()
