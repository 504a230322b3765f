"""Bilinear finite volume element method on rectangular meshes."""

from .analysis import LevelErrors, StudyReport, measure, rate, rate_table
from .assembly import apply_dirichlet, assemble_fem, assemble_fve, form_value
from .expr import differentiate, evaluate, parse
from .femspace import NodalField, averaged_gradient, interpolate, pi_star
from .linalg import SolveOptions, SparseMatrix, solve
from .mesh import TensorMesh, refine_halve, stress_points, uniform_mesh
from .problem import BENCHMARK, ProblemData
from .study import StudyConfig, benchmark_config, load_config, parse_config, run_level, run_study

__version__ = "0.1.0"

__all__ = [
    "BENCHMARK", "LevelErrors", "NodalField", "ProblemData", "SolveOptions", "SparseMatrix",
    "StudyConfig", "StudyReport", "TensorMesh", "apply_dirichlet", "assemble_fem", "assemble_fve",
    "averaged_gradient", "benchmark_config", "differentiate", "evaluate", "form_value",
    "interpolate", "load_config", "measure", "parse", "parse_config", "pi_star", "rate",
    "rate_table", "refine_halve", "run_level", "run_study", "solve", "stress_points",
    "uniform_mesh",
]
