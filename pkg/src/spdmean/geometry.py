"""Metric-space interface shared by the mean algorithms.

Anything exposing ``geodesic_to(other, t)`` and ``distance_to(other)`` can
be fed to the inductive-mean engine. Two concrete spaces are provided: the
SPD cone with the affine-invariant metric and flat Euclidean space, the
latter serving as a closed-form oracle.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import DimensionMismatch, InputError, NonFiniteEntry
from .spd_core import SpdMatrix, random_spd


@runtime_checkable
class HadamardPoint(Protocol):
    def geodesic_to(self, other, t: float): ...

    def distance_to(self, other) -> float: ...


@dataclass(frozen=True, eq=False)
class EuclideanPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise NonFiniteEntry("coordinates must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def geodesic_to(self, other: EuclideanPoint, t: float) -> EuclideanPoint:
        return euclidean_geodesic(self, other, t)

    def distance_to(self, other: EuclideanPoint) -> float:
        return euclidean_distance(self, other)


def _same_dim(x: EuclideanPoint, y: EuclideanPoint) -> None:
    if x.dim != y.dim:
        raise DimensionMismatch(f"dimensions differ: {x.dim} vs {y.dim}")


def euclidean_geodesic(x: EuclideanPoint, y: EuclideanPoint, t: float) -> EuclideanPoint:
    """Linear interpolation ``(1 - t) x + t y``."""
    _same_dim(x, y)
    if not 0.0 <= t <= 1.0:
        raise InputError(f"geodesic parameter must lie in [0, 1], got {t}")
    return EuclideanPoint((1.0 - t) * x.coords + t * y.coords)


def euclidean_distance(x: EuclideanPoint, y: EuclideanPoint) -> float:
    _same_dim(x, y)
    return float(np.linalg.norm(x.coords - y.coords))


class HadamardSpace(ABC):
    """A geodesic metric space we can sample points from."""

    name = "abstract"

    @abstractmethod
    def random_point(self, rng: np.random.Generator): ...

    def geodesic(self, x, y, t: float):
        return x.geodesic_to(y, t)

    def distance(self, x, y) -> float:
        return x.distance_to(y)


class EuclideanSpace(HadamardSpace):
    name = "euclidean"

    def __init__(self, dim: int, scale: float = 1.0):
        self.dim = dim
        self.scale = scale

    def random_point(self, rng):
        return EuclideanPoint(self.scale * rng.standard_normal(self.dim))


class SpdSpace(HadamardSpace):
    name = "spd"

    def __init__(self, dim: int, condition_cap: float = 1e3):
        self.dim = dim
        self.condition_cap = condition_cap

    def random_point(self, rng) -> SpdMatrix:
        return random_spd(self.dim, int(rng.integers(2**63)), self.condition_cap)


@dataclass
class CertificationReport:
    space: str
    samples: int
    tol: float
    max_violation: float
    worst_index: int
    passed: bool
    violations: list = field(default_factory=list, repr=False)


def semiparallelogram_violation(space: HadamardSpace, x, y, z) -> float:
    """Scaled excess of ``d^2(mid, z)`` over its semiparallelogram bound.

    Negative or zero means the inequality holds; the excess is divided by
    ``1 + |lhs| + |rhs|``.
    """
    mid = space.geodesic(x, y, 0.5)
    lhs = space.distance(mid, z) ** 2
    rhs = (
        0.5 * space.distance(x, z) ** 2
        + 0.5 * space.distance(y, z) ** 2
        - 0.25 * space.distance(x, y) ** 2
    )
    return (lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))


def certify_hadamard(
    space: HadamardSpace, sample_count: int = 200, seed: int = 0, tol: float = 1e-8
) -> CertificationReport:
    """Probe the semiparallelogram law on random triples drawn from ``space``."""
    rng = np.random.Generator(np.random.Philox(seed))
    violations = []
    for _ in range(sample_count):
        x, y, z = (space.random_point(rng) for _ in range(3))
        violations.append(semiparallelogram_violation(space, x, y, z))
    worst = int(np.argmax(violations)) if violations else -1
    max_v = float(violations[worst]) if violations else float("-inf")
    return CertificationReport(
        space=space.name,
        samples=sample_count,
        tol=tol,
        max_violation=max_v,
        worst_index=worst,
        passed=max_v <= tol,
        violations=violations,
    )
