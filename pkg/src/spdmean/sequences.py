"""Index schedules: cyclic, block-permutation, k-block permutation and random.

Positions are 1-based. A block-permutation schedule reorders every
consecutive block of ``m`` positions by its own permutation; the k-block
variant permutes blocks of ``k * m`` positions drawn from ``k`` copies of
each index. Seeded permutations come from a Philox stream keyed by
``(seed, block)`` so any position can be computed without replaying the
prefix.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError, InvalidPermutation

KINDS = ("cyclic", "block_perm", "k_block_perm", "random")
_RANDOM_CHUNK = 4096
_PERM_TAG, _RANDOM_TAG = 0, 1


def _rng(seed: int, block: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag, block])))


@lru_cache(maxsize=4096)
def _seeded_permutation(seed: int, length: int, block: int) -> tuple[int, ...]:
    # Generator.permutation is a Fisher-Yates shuffle
    return tuple(int(i) for i in _rng(seed, block, _PERM_TAG).permutation(length))


@lru_cache(maxsize=64)
def _random_chunk(seed: int, m: int, chunk: int) -> np.ndarray:
    out = _rng(seed, chunk, _RANDOM_TAG).integers(0, m, size=_RANDOM_CHUNK)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Schedule:
    """Which of the ``m`` base points to take at each position.

    ``permutations``, when given, overrides the seed and is cycled if the
    sequence runs past its last entry.
    """

    m: int
    kind: str = "block_perm"
    seed: int = 0
    k: int = 1
    permutations: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise InputError(f"m must be a positive integer, got {self.m!r}")
        if self.kind not in KINDS:
            raise InputError(f"unknown schedule kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InputError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise InputError(f"k must be a positive integer, got {self.k!r}")
        if self.kind != "k_block_perm" and self.k != 1:
            raise InputError("k is only meaningful for k_block_perm schedules")
        if self.permutations is not None:
            if self.kind not in ("block_perm", "k_block_perm"):
                raise InputError("explicit permutations need a permutation schedule")
            perms = tuple(tuple(int(i) for i in p) for p in self.permutations)
            if not perms:
                raise InvalidPermutation("explicit permutation list is empty")
            want = list(range(self.block_length))
            for j, p in enumerate(perms):
                if sorted(p) != want:
                    raise InvalidPermutation(
                        f"permutation {j} is not a bijection on 0..{self.block_length - 1}: {p}"
                    )
            object.__setattr__(self, "permutations", perms)

    @property
    def block_length(self) -> int | None:
        """Positions per block, ``None`` for random schedules."""
        if self.kind == "random":
            return None
        return self.k * self.m

    def permutation(self, block: int) -> tuple[int, ...]:
        """Permutation used for the 0-based ``block``."""
        if self.kind == "cyclic":
            return tuple(range(self.m))
        if self.kind == "random":
            raise InputError("random schedules have no blocks")
        if self.permutations is not None:
            return self.permutations[block % len(self.permutations)]
        return _seeded_permutation(self.seed, self.block_length, block)

    @classmethod
    def from_json(cls, obj, m: int | None = None) -> Schedule:
        """Build from ``{"kind": "block_perm", "m": 4, "seed": 7}`` and friends.

        ``m`` fills in a missing ``"m"`` field and must agree with it otherwise.
        """
        if not isinstance(obj, dict):
            raise InputError("schedule must be a JSON object")
        unknown = set(obj) - {"kind", "m", "seed", "k", "permutations"}
        if unknown:
            raise InputError(f"unknown schedule fields: {sorted(unknown)}")
        mm = obj.get("m", m)
        if m is not None and mm != m:
            raise InputError(f"schedule m={mm} does not match set size {m}")
        perms = obj.get("permutations")
        return cls(
            m=mm,
            kind=obj.get("kind", "block_perm"),
            seed=obj.get("seed", 0),
            k=obj.get("k", 1),
            permutations=None if perms is None else tuple(tuple(p) for p in perms),
        )

    def to_json(self) -> dict:
        out = {"kind": self.kind, "m": self.m}
        if self.kind in ("block_perm", "k_block_perm", "random"):
            out["seed"] = self.seed
        if self.kind == "k_block_perm":
            out["k"] = self.k
        if self.permutations is not None:
            out["permutations"] = [list(p) for p in self.permutations]
        return out


def schedule_index(s: Schedule, n: int) -> int:
    """Index (0-based) of the base point at 1-based position ``n``."""
    if n < 1:
        raise InputError(f"positions are 1-based, got n={n}")
    if s.kind == "cyclic":
        return (n - 1) % s.m
    if s.kind == "random":
        chunk, r = divmod(n - 1, _RANDOM_CHUNK)
        return int(_random_chunk(s.seed, s.m, chunk)[r])
    block, r = divmod(n - 1, s.block_length)
    return s.permutation(block)[r] % s.m


def iter_indices(s: Schedule, n: int | None = None) -> Iterator[int]:
    """Indices for positions ``1..n`` (endless if ``n`` is None)."""
    if s.kind == "random":
        stream = itertools.chain.from_iterable(
            (int(i) for i in _random_chunk(s.seed, s.m, c)) for c in itertools.count()
        )
    else:
        stream = itertools.chain.from_iterable(
            (i % s.m for i in s.permutation(b)) for b in itertools.count()
        )
    return stream if n is None else itertools.islice(stream, n)


def materialize(s: Schedule, points: Sequence, n: int) -> Iterator:
    """Yield ``points[schedule_index(s, j)]`` for ``j = 1..n``."""
    if len(points) != s.m:
        raise InputError(f"schedule expects {s.m} points, set has {len(points)}")
    return (points[i] for i in iter_indices(s, n))
