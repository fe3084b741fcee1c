"""Command-line front end.

JSON results go to stdout, human-readable tables and messages to stderr.
Exit codes: 0 success, 1 input error, 2 numerical non-convergence,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import InputError, NoConvergence, SolverFailure, SpdMeanError
from .experiments import ExperimentConfig, check_block_bound, run_convergence
from .means import KarcherConfig, inductive_mean, karcher_mean
from .sequences import Schedule
from .spd_core import MatrixSet, load_matrix_set, save_matrix_set
from .verify import format_table, run_suite

EXIT_OK, EXIT_INPUT, EXIT_NO_CONVERGENCE, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spdmean", description="Geometric means of SPD matrices.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", help="Karcher mean of a matrix-set file")
    p.add_argument("set_file")
    p.add_argument("--grad-tol", type=_positive_float, default=1e-12)
    p.add_argument("--max-iters", type=_positive_int, default=2000)
    p.add_argument(
        "--initializer", choices=("arithmetic", "first", "inductive"), default="arithmetic"
    )

    p = sub.add_parser("approx", help="inductive mean S_n along a schedule")
    p.add_argument("set_file")
    p.add_argument(
        "--schedule",
        required=True,
        help='JSON object or path to one, e.g. \'{"kind": "block_perm", "seed": 7}\'',
    )
    p.add_argument("--n", type=_positive_int, required=True)

    p = sub.add_parser("converge", help="run a convergence experiment")
    p.add_argument("config_file")
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("verify", help="sampled metric-inequality suite")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--samples", type=_positive_int, default=500)
    p.add_argument("--dim", type=_positive_int, default=3)
    p.add_argument("--tol", type=_nonneg_float, default=1e-8)

    p = sub.add_parser("gen", help="write a random matrix-set file")
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--seed", type=_nonneg_int, required=True)
    p.add_argument("--cond", type=float, default=1e3)
    p.add_argument("--out", required=True)
    return parser


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _note(text: str) -> None:
    print(text, file=sys.stderr)


def cmd_mean(args) -> int:
    matrices = load_matrix_set(args.set_file)
    cfg = KarcherConfig(
        max_iters=args.max_iters, grad_tol=args.grad_tol, initializer=args.initializer
    )
    try:
        G, diag = karcher_mean(matrices, cfg)
        code = EXIT_OK
    except NoConvergence as exc:
        G, diag = exc.mean, exc.diagnostics
        code = EXIT_NO_CONVERGENCE
        _note(f"warning: {exc}")
    _emit({"mean": G.entries.tolist(), "diagnostics": diag.to_json()})
    _note(f"iterations={diag.iterations} grad_norm={diag.grad_norm:.3e} converged={diag.converged}")
    return code


def _load_schedule(text: str, m: int) -> Schedule:
    path = Path(text)
    if not text.lstrip().startswith("{") and path.exists():
        text = path.read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"--schedule: malformed JSON: {exc}") from exc
    return Schedule.from_json(obj, m=m)


def cmd_approx(args) -> int:
    matrices = load_matrix_set(args.set_file)
    schedule = _load_schedule(args.schedule, len(matrices))
    S = inductive_mean(matrices, schedule, args.n)
    _emit({"schedule": schedule.to_json(), "n": args.n, "mean": S.entries.tolist()})
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = ExperimentConfig.load(args.config_file)
    cfg.output = args.out
    try:
        run = run_convergence(cfg)
    except SolverFailure as exc:
        diag = exc.diagnostics.to_json() if exc.diagnostics else None
        _emit({"seed": cfg.seed, "config": cfg.to_json(), "error": str(exc), "diagnostics": diag})
        _note(f"error: {exc}")
        return EXIT_NO_CONVERGENCE
    report = check_block_bound(run.records, run.constants, cfg.bound_tol)
    _emit(
        {
            "seed": cfg.seed,
            "config": cfg.to_json(),
            "schedule": run.schedule.to_json(),
            "constants": run.constants.to_json(),
            "diagnostics": run.diagnostics.to_json(),
            "bound": report.to_json(),
            "final_err_sq": run.records[-1].err_sq,
        }
    )
    _note(
        f"seed={cfg.seed} L={run.constants.L:.6g} boundaries={report.boundaries} "
        f"max_violation={report.max_violation:.3e} {'PASS' if report.passed else 'FAIL'}"
    )
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_verify(args) -> int:
    results = run_suite(seed=args.seed, samples=args.samples, dim=args.dim, tol=args.tol)
    passed = all(r.passed for r in results)
    _emit(
        {
            "seed": args.seed,
            "samples": args.samples,
            "dim": args.dim,
            "tol": args.tol,
            "passed": passed,
            "results": [r.to_json() for r in results],
        }
    )
    _note(f"seed={args.seed} dim={args.dim} tol={args.tol:g}")
    _note(format_table(results))
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_gen(args) -> int:
    if not args.cond >= 1:
        raise InputError("--cond must be >= 1")
    matrices = MatrixSet.random(args.dim, args.m, args.seed, args.cond)
    save_matrix_set(matrices, args.out)
    _emit({"seed": args.seed, "dim": args.dim, "m": args.m, "cond": args.cond, "out": args.out})
    return EXIT_OK


COMMANDS = {
    "mean": cmd_mean,
    "approx": cmd_approx,
    "converge": cmd_converge,
    "verify": cmd_verify,
    "gen": cmd_gen,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT
    except SpdMeanError as exc:
        _note(f"error: {exc}")
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
