import pytest

from bilinear_fve.problem import BENCHMARK, ProblemData


@pytest.fixture(scope="session")
def benchmark_problem():
    return ProblemData.create(**BENCHMARK)
