"""Inductive means, the Karcher (least-squares) mean and its constants."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError, NoConvergence
from .geometry import EuclideanPoint
from .sequences import Schedule, materialize
from .spd_core import MatrixSet, SpdMatrix, _eigh, _whitened


@dataclass(frozen=True)
class InductiveState:
    n: int
    current: object


def inductive_step(state: InductiveState | None, next_point) -> InductiveState:
    """Advance ``S_n -> S_{n+1} = S_n #_{1/(n+1)} A_{n+1}``; ``None`` starts at ``S_1``."""
    if state is None:
        return InductiveState(1, next_point)
    n = state.n + 1
    return InductiveState(n, state.current.geodesic_to(next_point, 1.0 / n))


def iter_inductive(points: Iterable) -> Iterator[InductiveState]:
    """Yield ``S_1, S_2, ...`` over ``points``."""
    state = None
    for p in points:
        state = inductive_step(state, p)
        yield state


def inductive_mean(points: Sequence, schedule: Schedule, n: int):
    """``S_n`` of the sequence that ``schedule`` draws from ``points``."""
    if n < 1:
        raise InputError("n must be >= 1")
    state = None
    for state in iter_inductive(materialize(schedule, points, n)):
        pass
    return state.current


@dataclass(frozen=True)
class KarcherConfig:
    """Settings of the fixed-point Karcher solver.

    ``initializer`` is ``"arithmetic"`` (arithmetic mean rescaled to the
    geometric mean of determinants), ``"first"``, or ``"inductive"``
    (cyclic inductive mean after ``warm_start_steps`` points).
    """

    max_iters: int = 2000
    grad_tol: float = 1e-12
    step: float = 1.0
    initializer: str = "arithmetic"
    warm_start_steps: int = 64

    def __post_init__(self):
        if self.max_iters < 1:
            raise InputError("max_iters must be >= 1")
        if not self.grad_tol > 0:
            raise InputError("grad_tol must be > 0")
        if not 0 < self.step <= 1:
            raise InputError("step must lie in (0, 1]")
        if self.initializer not in ("arithmetic", "first", "inductive"):
            raise InputError(f"unknown initializer {self.initializer!r}")
        if self.warm_start_steps < 1:
            raise InputError("warm_start_steps must be >= 1")


@dataclass
class KarcherDiagnostics:
    iterations: int
    grad_norm: float
    objective: float
    converged: bool

    def to_json(self) -> dict:
        return asdict(self)


def _logdet(S: SpdMatrix) -> float:
    return float(np.sum(np.log(S.eig.eigenvalues)))


def _initial_point(matrices: MatrixSet, cfg: KarcherConfig) -> SpdMatrix:
    if cfg.initializer == "first" or len(matrices) == 1:
        return matrices[0]
    if cfg.initializer == "inductive":
        sched = Schedule(len(matrices), "cyclic")
        return inductive_mean(matrices, sched, cfg.warm_start_steps)
    mean = SpdMatrix(np.mean([a.entries for a in matrices], axis=0))
    # the Karcher mean has log det equal to the mean log det of the inputs
    target = np.mean([_logdet(a) for a in matrices])
    return SpdMatrix(mean.entries * math.exp((target - _logdet(mean)) / matrices.dim))


def riemannian_gradient(G: SpdMatrix, matrices: MatrixSet) -> np.ndarray:
    """``(1/m) sum_i log(G^{-1/2} A_i G^{-1/2})``; zero exactly at the Karcher mean."""
    return np.mean([_eigh(_whitened(G, a)).apply(np.log) for a in matrices], axis=0)


def _retract(G: SpdMatrix, tangent: np.ndarray) -> SpdMatrix:
    sqrt, _ = G._root_pair()
    return SpdMatrix._from_symmetric(sqrt @ _eigh(tangent).apply(np.exp) @ sqrt)


def karcher_mean(
    matrices: MatrixSet, cfg: KarcherConfig | None = None
) -> tuple[SpdMatrix, KarcherDiagnostics]:
    """Least-squares mean of ``matrices`` by fixed-point iteration.

    Each step maps ``G -> G^{1/2} exp(h * T) G^{1/2}`` with ``T`` the
    whitened mean logarithm from :func:`riemannian_gradient`. ``h`` starts
    at ``cfg.step``; it is halved whenever a step fails to shrink ``||T||_F``
    and grows back by 1.5x after each accepted step, never above
    ``cfg.step``. Plain ``h = 1`` oscillates on widely spread inputs.

    Raises
    ------
    NoConvergence
        If ``||T||_F`` is still above ``grad_tol`` after ``max_iters`` steps,
        or no step size shrinks it. The exception carries the iterate with
        the smallest gradient seen.
    """
    cfg = cfg or KarcherConfig()
    G = _initial_point(matrices, cfg)
    T = riemannian_gradient(G, matrices)
    g = float(np.linalg.norm(T))
    h = cfg.step
    it = 0
    while g > cfg.grad_tol and it < cfg.max_iters:
        for _ in range(60):
            cand = _retract(G, h * T)
            T_cand = riemannian_gradient(cand, matrices)
            g_cand = float(np.linalg.norm(T_cand))
            if g_cand < g:
                break
            h *= 0.5
        else:
            break
        G, T, g = cand, T_cand, g_cand
        h = min(cfg.step, 1.5 * h)
        it += 1
    diag = KarcherDiagnostics(it, g, objective(G, matrices), g <= cfg.grad_tol)
    if not diag.converged:
        raise NoConvergence(
            f"gradient norm {g:.3g} above {cfg.grad_tol:.3g} after {it} iterations",
            mean=G,
            diagnostics=diag,
        )
    return G, diag


def barycenter(points: Sequence, cfg: KarcherConfig | None = None):
    """Least-squares mean of SPD matrices or Euclidean points."""
    if all(isinstance(p, EuclideanPoint) for p in points):
        return EuclideanPoint(np.mean([p.coords for p in points], axis=0))
    matrices = points if isinstance(points, MatrixSet) else MatrixSet(points)
    return karcher_mean(matrices, cfg)[0]


def objective(C, points: Sequence) -> float:
    """Sum of squared distances from ``C`` to every point."""
    return float(sum(a.distance_to(C) ** 2 for a in points))


@dataclass(frozen=True)
class MeanConstants:
    """Largest pairwise distance, mean squared spread about ``G``, and ``L``."""

    delta_max: float
    alpha: float

    @property
    def L(self) -> float:
        return self.alpha + 3.0 * self.delta_max**2

    def to_json(self) -> dict:
        return {"delta_max": self.delta_max, "alpha": self.alpha, "L": self.L}


def constants(points: Sequence, G) -> MeanConstants:
    m = len(points)
    delta_max = max(
        (points[i].distance_to(points[j]) for i in range(m) for j in range(i + 1, m)),
        default=0.0,
    )
    alpha = sum(G.distance_to(a) ** 2 for a in points) / m
    return MeanConstants(float(delta_max), float(alpha))


def variance_check(Z, points: Sequence, G) -> float:
    """Slack ``(1/m) sum_j (d^2(Z, A_j) - d^2(G, A_j)) - d^2(Z, G)``; >= 0 when it holds."""
    m = len(points)
    spread = sum(Z.distance_to(a) ** 2 - G.distance_to(a) ** 2 for a in points) / m
    return float(spread - Z.distance_to(G) ** 2)
