import pytest

from bilinear_fve.study import (
    CSV_COLUMNS, ConfigError, StudyConfig, benchmark_config, parse_config, run_level, run_study, study_csv,
)


def test_benchmark_config_contents():
    cfg = benchmark_config()
    assert cfg.a11 == "exp(2*x)+y^3+1" and cfg.a12 == cfg.a21 == "exp(x+y)"
    assert cfg.a22 == "exp(2*y)+x^3+1" and cfg.c == "2+x+y"
    assert cfg.u_exact == "2*sin(2*pi*x)*sin(3*pi*y)"
    assert (cfg.h0_denominator, cfg.levels) == (4, 6)


def test_parse_config_types_and_comments():
    cfg = parse_config('# comment\nu_exact = "x*y"\nlevels = 2\ntol = 1e-10\nsolver = "bicgstab"\n')
    assert cfg.levels == 2 and cfg.tol == 1e-10 and cfg.solver == "bicgstab"


@pytest.mark.parametrize("text", [
    'levels = 2',                                   # neither u_exact nor f
    'u_exact = "x"\nlevels = 0',
    'u_exact = "x"\nlevels = "2"',
    'u_exact = x',
    'u_exact = "x"\nu_exact = "y"',
    'u_exact = "x"\ncolour = "red"',
    'u_exact = "x"\nsolver = "cg"',
    'u_exact = "x"\nh0_denominator = 2.5',
    'u_exact "x"',
])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_zero_data_gives_zero_errors():
    lv = run_level(StudyConfig(u_exact="0", f="0"), 4)
    assert lv.errors.e_S == 0 and lv.errors.e_L2 == 0 and lv.errors.e_inf == 0
    assert max(abs(lv.u_h.values)) == 0


def test_source_only_run_has_no_errors():
    lv = run_level(StudyConfig(f="1"), 4)
    assert lv.errors.e_S is None and lv.errors.dof == 9


def test_single_level_has_blank_rates():
    report, _ = run_study(StudyConfig(u_exact="x*y*(1-x)*(1-y)"), levels=1)
    lines = study_csv(report).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    row = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert row["rate_S"] == "" and row["e_S"] != ""
