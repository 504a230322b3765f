"""Command-line driver: ``run``, ``study`` and ``verify``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import verify
from .analysis import ERROR_COLUMNS
from .plot import convergence_svg
from .study import (
    ConfigError,
    StudyFailed,
    benchmark_config,
    format_table,
    load_config,
    run_level,
    run_study,
    solution_csv,
    study_csv,
    study_json,
)

log = logging.getLogger("bilinear_fve")


def _config(path):
    return benchmark_config() if path is None else load_config(path)


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _config(args.config)
    n = cfg.h0_denominator if args.n is None else args.n
    res = run_level(cfg, n)
    out = _outdir(args.out)
    problem = cfg.problem()
    (out / "solution.csv").write_text(solution_csv(res.u_h, problem))
    (out / "errors.json").write_text(json.dumps(res.errors.as_dict(), indent=2, sort_keys=True) + "\n")
    e = res.errors
    print(f"n={e.n} h={e.h:.6g} dof={e.dof} solver={e.solve.method} "
          f"iterations={e.solve.iterations} residual={e.solve.residual:.3e}")
    if not cfg.has_exact:
        print("no u_exact given: error and superconvergence columns absent")
    else:
        for col in ERROR_COLUMNS:
            print(f"{col:>8} = {getattr(e, col):.6e}")
    print(f"wrote {out / 'solution.csv'} and {out / 'errors.json'}")
    return 0


def _write_study(out: Path, report, seconds, args):
    timings = seconds if args.timings else None
    (out / "study.csv").write_text(study_csv(report, timings))
    (out / "study.json").write_text(study_json(report) + "\n")
    if args.plot and report.levels[0].e_S is not None:
        (out / "convergence.svg").write_text(convergence_svg(report))


def cmd_study(args) -> int:
    cfg = _config(args.config)
    out = _outdir(args.out)
    try:
        report, seconds = run_study(cfg, args.levels)
    except StudyFailed as exc:
        print(f"study failed: {exc}", file=sys.stderr)
        if exc.partial is not None:
            _write_study(out, *exc.partial, args)
            print(f"partial results written to {out}", file=sys.stderr)
        return 2
    _write_study(out, report, seconds, args)
    if cfg.has_exact:
        print(format_table(report))
    else:
        print("no u_exact given: error and rate columns absent")
    print(f"wrote {out / 'study.csv'}")
    return 0


def cmd_verify(args) -> int:
    results = verify.run_suite(args.seed, tol_override=args.inject_tolerance)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.family:<26} {r.name:<30} trials={r.trials:<5d} "
              f"max_rel={r.max_rel:.2e} tol={r.tol:.0e}")
    report = verify.report_json(results, args.seed)
    if args.out is not None:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(report + "\n")
    ok = verify.suite_passed(results)
    print("all oracles passed" if ok else "oracle failures present")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bilinear-fve",
                                     description="Bilinear finite volume element solver and studies.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one level and write the nodal solution")
    run.add_argument("--config", help="config file (default: shipped benchmark)")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--n", type=int, help="cells per side (default: h0_denominator)")
    run.set_defaults(func=cmd_run)

    study = sub.add_parser("study", help="refinement study with observed rates")
    study.add_argument("--config", help="config file (default: shipped benchmark)")
    study.add_argument("--levels", type=int, help="override the number of levels")
    study.add_argument("--out", default="out", help="output directory")
    study.add_argument("--plot", action="store_true", help="also write convergence.svg")
    study.add_argument("--timings", action="store_true",
                       help="fill the seconds column (makes the CSV run-dependent)")
    study.set_defaults(func=cmd_study)

    ver = sub.add_parser("verify", help="run the identity oracle suite")
    ver.add_argument("--seed", type=int, default=42)
    ver.add_argument("--out", help="write the JSON report here")
    ver.add_argument("--inject-tolerance", type=float, default=None, help=argparse.SUPPRESS)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "levels", None) is not None and args.levels < 1:
        print("error: --levels must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
