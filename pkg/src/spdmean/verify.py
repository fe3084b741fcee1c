"""Sampled checks of the metric identities and inequalities of the SPD cone.

Each property draws its own Philox stream from ``(seed, property index)``
so results do not depend on which other properties ran. Violations are
scaled: an inequality ``lhs <= rhs`` contributes
``(lhs - rhs) / (1 + |lhs| + |rhs|)``, an identity ``x == y`` contributes
``|x - y| / (1 + |x|)`` (Frobenius norms for matrices). A property passes
when its largest violation is at most ``tol``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .means import KarcherConfig, inductive_step, karcher_mean, variance_check
from .spd_core import MatrixSet, SpdMatrix, distance, geodesic, random_spd


@dataclass
class PropertyResult:
    name: str
    samples: int
    max_violation: float
    passed: bool

    def to_json(self) -> dict:
        return asdict(self)


def ineq(lhs: float, rhs: float) -> float:
    return (lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))


def _mat_gap(X: SpdMatrix, Y: SpdMatrix) -> float:
    return float(np.linalg.norm(X.entries - Y.entries) / (1.0 + np.linalg.norm(X.entries)))


class _Sampler:
    def __init__(self, seed: int, tag: int, dim: int, condition_cap: float):
        self.rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag])))
        self.dim = dim
        self.cap = condition_cap

    def spd(self) -> SpdMatrix:
        return random_spd(self.dim, int(self.rng.integers(2**63)), self.cap)

    def t(self) -> float:
        return float(self.rng.uniform(0.0, 1.0))

    def invertible(self) -> np.ndarray:
        u, _ = np.linalg.qr(self.rng.standard_normal((self.dim, self.dim)))
        v, _ = np.linalg.qr(self.rng.standard_normal((self.dim, self.dim)))
        return u @ np.diag(self.rng.uniform(0.5, 2.0, self.dim)) @ v.T


def endpoints(s: _Sampler) -> float:
    A, B = s.spd(), s.spd()
    return max(_mat_gap(A, geodesic(A, B, 0.0)), _mat_gap(B, geodesic(A, B, 1.0)))


def reversal(s: _Sampler) -> float:
    A, B, t = s.spd(), s.spd(), s.t()
    return _mat_gap(geodesic(A, B, t), geodesic(B, A, 1.0 - t))


def distance_symmetry(s: _Sampler) -> float:
    A, B = s.spd(), s.spd()
    d = distance(A, B)
    return abs(d - distance(B, A)) / (1.0 + d)


def triangle(s: _Sampler) -> float:
    A, B, C = s.spd(), s.spd(), s.spd()
    return ineq(distance(A, C), distance(A, B) + distance(B, C))


def congruence_invariance(s: _Sampler) -> float:
    A, B, X = s.spd(), s.spd(), s.invertible()
    d = distance(A, B)
    moved = distance(SpdMatrix(X @ A.entries @ X.T), SpdMatrix(X @ B.entries @ X.T))
    return abs(moved - d) / (1.0 + d)


def semiparallelogram(s: _Sampler) -> float:
    A, B, Z = s.spd(), s.spd(), s.spd()
    lhs = distance(geodesic(A, B, 0.5), Z, squared=True)
    rhs = (
        0.5 * distance(A, Z, squared=True)
        + 0.5 * distance(B, Z, squared=True)
        - 0.25 * distance(A, B, squared=True)
    )
    return ineq(lhs, rhs)


def geodesic_inequality(s: _Sampler) -> float:
    A, B, Z, t = s.spd(), s.spd(), s.spd(), s.t()
    lhs = distance(geodesic(A, B, t), Z, squared=True)
    rhs = (
        (1 - t) * distance(A, Z, squared=True)
        + t * distance(B, Z, squared=True)
        - t * (1 - t) * distance(A, B, squared=True)
    )
    return ineq(lhs, rhs)


def convexity(s: _Sampler) -> float:
    A, A2, B, B2, t = s.spd(), s.spd(), s.spd(), s.spd(), s.t()
    lhs = distance(geodesic(A, A2, t), geodesic(B, B2, t))
    rhs = (1 - t) * distance(A, B) + t * distance(A2, B2)
    return ineq(lhs, rhs)


def _inductive_prefixes(points):
    state, out = None, []
    for p in points:
        state = inductive_step(state, p)
        out.append(state.current)
    return out


def lipschitz_inductive(s: _Sampler) -> float:
    """Distance between two inductive means vs. the mean pairwise distance, all prefixes."""
    length = int(s.rng.integers(2, 13))
    seq_a = [s.spd() for _ in range(length)]
    seq_b = [s.spd() for _ in range(length)]
    sa, sb = _inductive_prefixes(seq_a), _inductive_prefixes(seq_b)
    worst, running = -np.inf, 0.0
    for n in range(1, length + 1):
        running += distance(seq_a[n - 1], seq_b[n - 1])
        worst = max(worst, ineq(distance(sa[n - 1], sb[n - 1]), running / n))
    return worst


def telescoping(s: _Sampler) -> float:
    """Bound on ``d^2(S_{k+m}, Z)`` through ``S_k`` and the points in between."""
    k, m = int(s.rng.integers(1, 9)), int(s.rng.integers(1, 9))
    seq = [s.spd() for _ in range(k + m)]
    Z = s.spd()
    S = _inductive_prefixes(seq)  # S[i] is S_{i+1}
    lhs = distance(S[k + m - 1], Z, squared=True)
    rhs = k / (k + m) * distance(S[k - 1], Z, squared=True)
    rhs += sum(distance(seq[k + j], Z, squared=True) for j in range(m)) / (k + m)
    rhs -= k / (k + m) ** 2 * sum(
        distance(S[k + j - 1], seq[k + j], squared=True) for j in range(m)
    )
    return ineq(lhs, rhs)


_SCALAR_PROPERTIES = (
    endpoints,
    reversal,
    distance_symmetry,
    triangle,
    congruence_invariance,
    semiparallelogram,
    geodesic_inequality,
    convexity,
    lipschitz_inductive,
    telescoping,
)
PROPERTY_NAMES = tuple(f.__name__ for f in _SCALAR_PROPERTIES) + ("variance_inequality",)


def _variance_inequality(s: _Sampler, samples: int, points_per_set: int = 50) -> list[float]:
    out = []
    while len(out) < samples:
        matrices = MatrixSet([s.spd() for _ in range(3)])
        G, _ = karcher_mean(matrices, KarcherConfig(grad_tol=1e-12))
        for _ in range(min(points_per_set, samples - len(out))):
            Z = s.spd()
            lhs = distance(Z, G, squared=True)
            out.append(ineq(lhs, lhs + variance_check(Z, matrices, G)))
    return out


def run_suite(
    seed: int = 0,
    samples: int = 500,
    dim: int = 3,
    tol: float = 1e-8,
    condition_cap: float = 1e3,
    only=None,
) -> list[PropertyResult]:
    """Evaluate every property on ``samples`` random draws."""
    results = []
    for tag, fun in enumerate(_SCALAR_PROPERTIES):
        if only is not None and fun.__name__ not in only:
            continue
        s = _Sampler(seed, tag, dim, condition_cap)
        worst = max(fun(s) for _ in range(samples))
        results.append(PropertyResult(fun.__name__, samples, float(worst), worst <= tol))
    if only is None or "variance_inequality" in only:
        s = _Sampler(seed, len(_SCALAR_PROPERTIES), dim, condition_cap)
        worst = max(_variance_inequality(s, samples))
        results.append(PropertyResult("variance_inequality", samples, float(worst), worst <= tol))
    return results


def format_table(results) -> str:
    rows = [f"{'property':<24}{'samples':>8}  {'max_violation':>14}  status"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        rows.append(f"{r.name:<24}{r.samples:>8}  {r.max_violation:>14.3e}  {status}")
    return "\n".join(rows)
