"""Convergence runs of inductive means against the Karcher mean.

A run streams ``S_1, ..., S_{n_max}`` along a schedule and records the
squared distance to the reference mean ``G`` at every step. At the end of
each completed block (``n = k * block_length``) the record also carries the
bound ``L / k`` with ``L = alpha + 3 * delta_max**2``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import InputError, NoConvergence, SolverFailure
from .means import (
    KarcherConfig,
    KarcherDiagnostics,
    MeanConstants,
    constants,
    iter_inductive,
    karcher_mean,
)
from .sequences import Schedule, materialize
from .spd_core import MatrixSet, load_matrix_set

CSV_HEADER = ("n", "k", "err_sq", "bound", "slack")


@dataclass
class ExperimentConfig:
    """One convergence run. ``dim`` and ``m`` come from ``matrix_file`` when given."""

    dim: int | None = 3
    m: int | None = 3
    schedule: str = "block_perm"
    block_k: int = 1
    seed: int = 0
    n_max: int = 10_000
    condition_cap: float = 1e3
    bound_tol: float = 1e-8
    grad_tol: float = 1e-12
    max_iters: int = 2000
    output: str | None = None
    matrix_file: str | None = None

    def validate(self) -> None:
        if self.matrix_file is None and (not self.dim or not self.m):
            raise InputError("dim and m are required without a matrix_file")
        for name in ("dim", "m"):
            v = getattr(self, name)
            if v is not None and (isinstance(v, bool) or not isinstance(v, int) or v < 1):
                raise InputError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.n_max, int) or self.n_max < (self.m or 1):
            raise InputError(f"n_max must be an integer >= m, got {self.n_max!r}")
        if not self.bound_tol > 0 or not self.grad_tol > 0:
            raise InputError("tolerances must be > 0")
        if not self.condition_cap >= 1:
            raise InputError("condition_cap must be >= 1")

    @classmethod
    def from_json(cls, obj) -> ExperimentConfig:
        if not isinstance(obj, dict):
            raise InputError("experiment config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON: {exc}") from exc
        return cls.from_json(obj)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConvergenceRecord:
    n: int
    k: int
    err_sq: float
    bound: float | None = None
    slack: float | None = None


@dataclass
class ConvergenceRun:
    config: ExperimentConfig | None
    schedule: Schedule
    constants: MeanConstants
    diagnostics: KarcherDiagnostics | None
    records: list[ConvergenceRecord] = field(repr=False)
    mean: object = field(default=None, repr=False)


def convergence_records(
    points, schedule: Schedule, n_max: int, G, L: float
) -> list[ConvergenceRecord]:
    """Stream the inductive mean over ``points`` and record ``d^2(S_n, G)``.

    Works for any point type with ``geodesic_to``/``distance_to``. The
    block length is the schedule's; random schedules count blocks of ``m``
    and carry no bound.
    """
    block = schedule.block_length or schedule.m
    bounded = schedule.block_length is not None
    out = []
    for state in iter_inductive(materialize(schedule, points, n_max)):
        n = state.n
        k, d = divmod(n, block)
        err_sq = G.distance_to(state.current) ** 2
        if bounded and d == 0:
            bound = L / k
            out.append(ConvergenceRecord(n, k, err_sq, bound, bound - err_sq))
        else:
            out.append(ConvergenceRecord(n, k, err_sq))
    return out


def load_or_generate(cfg: ExperimentConfig) -> MatrixSet:
    if cfg.matrix_file is None:
        return MatrixSet.random(cfg.dim, cfg.m, cfg.seed, cfg.condition_cap)
    matrices = load_matrix_set(cfg.matrix_file)
    if cfg.dim is not None and cfg.dim != matrices.dim:
        raise InputError(f"config dim={cfg.dim} but {cfg.matrix_file} has dim={matrices.dim}")
    if cfg.m is not None and cfg.m != len(matrices):
        raise InputError(f"config m={cfg.m} but {cfg.matrix_file} has {len(matrices)} matrices")
    return matrices


def run_convergence(cfg: ExperimentConfig, matrices: MatrixSet | None = None) -> ConvergenceRun:
    """Generate or load the set, solve for ``G`` and stream the run.

    Raises
    ------
    SolverFailure
        When the Karcher solver does not reach ``cfg.grad_tol``.
    """
    cfg.validate()
    if matrices is None:
        matrices = load_or_generate(cfg)
    schedule = Schedule(len(matrices), cfg.schedule, cfg.seed, cfg.block_k)
    try:
        G, diag = karcher_mean(
            matrices, KarcherConfig(max_iters=cfg.max_iters, grad_tol=cfg.grad_tol)
        )
    except NoConvergence as exc:
        raise SolverFailure(f"reference mean unavailable: {exc}", exc.diagnostics) from exc
    consts = constants(matrices, G)
    records = convergence_records(matrices, schedule, cfg.n_max, G, consts.L)
    if cfg.output is not None:
        emit_csv(records, cfg.output)
    return ConvergenceRun(cfg, schedule, consts, diag, records, G)


@dataclass
class BoundReport:
    passed: bool
    boundaries: int
    max_violation: float
    worst_n: int | None
    slack_min: float | None
    slack_max: float | None
    slack_mean: float | None

    def to_json(self) -> dict:
        return asdict(self)


def check_block_bound(
    records, consts: MeanConstants, tol: float = 1e-8
) -> BoundReport:
    """Largest ``err_sq - L/k`` over the block-boundary records."""
    rows = [r for r in records if r.bound is not None and r.k >= 1]
    if not rows:
        return BoundReport(True, 0, float("-inf"), None, None, None, None)
    viol = np.array([r.err_sq - consts.L / r.k for r in rows])
    worst = int(np.argmax(viol))
    slack = -viol
    return BoundReport(
        passed=bool(viol[worst] <= tol),
        boundaries=len(rows),
        max_violation=float(viol[worst]),
        worst_n=rows[worst].n,
        slack_min=float(slack.min()),
        slack_max=float(slack.max()),
        slack_mean=float(slack.mean()),
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def format_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(r.n), _fmt(r.k), _fmt(r.err_sq), _fmt(r.bound), _fmt(r.slack)])
    return buf.getvalue()


def emit_csv(records, path) -> None:
    """Write ``n,k,err_sq,bound,slack`` rows with shortest round-trip floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(records))


def parse_csv(text: str) -> list[ConvergenceRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise InputError(f"unexpected CSV header {header!r}")

    def opt(s):
        return float(s) if s else None

    return [ConvergenceRecord(int(n), int(k), float(e), opt(b), opt(s)) for n, k, e, b, s in reader]


def read_csv(path) -> list[ConvergenceRecord]:
    return parse_csv(Path(path).read_text(encoding="utf-8"))
