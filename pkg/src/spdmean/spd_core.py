"""SPD matrices under the affine-invariant metric.

Matrix functions are evaluated through the symmetric eigendecomposition,
which each :class:`SpdMatrix` computes once at validation and keeps.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    EigenFailure,
    InputError,
    NonFiniteEntry,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
)

SYM_TOL = 1e-10
PD_TOL = 1e-12
RECON_TOL = 1e-9


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order, eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def apply(self, fun) -> np.ndarray:
        """Return ``V diag(fun(w)) V^T``, symmetrized."""
        v = self.eigenvectors
        return _sym((v * fun(self.eigenvalues)) @ v.T)


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _eigh(a: np.ndarray) -> EigenDecomposition:
    if a.shape == (1, 1):
        return EigenDecomposition(a[0].copy(), np.ones((1, 1)))
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigendecomposition did not converge: {exc}") from exc
    return EigenDecomposition(w, v)


def _check_square_finite(raw) -> np.ndarray:
    try:
        a = np.array(raw, dtype=float)
    except (ValueError, TypeError) as exc:
        raise NotSquare(f"not a rectangular numeric array: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square 2-D array, got shape {a.shape}")
    if a.shape[0] == 0:
        raise NotSquare("empty matrix")
    if not np.all(np.isfinite(a)):
        raise NonFiniteEntry("matrix has non-finite entries")
    return a


class SpdMatrix:
    """A validated symmetric positive-definite matrix.

    The constructor symmetrizes ``raw`` as ``(raw + raw.T) / 2`` after
    checking that the asymmetry is below ``sym_tol * max(1, max|raw|)``
    and that the smallest eigenvalue exceeds ``pd_tol``. ``entries`` is a
    read-only array.
    """

    __slots__ = ("entries", "_eig", "_roots")

    def __init__(self, raw, sym_tol: float = SYM_TOL, pd_tol: float = PD_TOL):
        a = _check_square_finite(raw)
        scale = max(1.0, float(np.abs(a).max()))
        asym = float(np.abs(a - a.T).max())
        if asym > sym_tol * scale:
            raise NotSymmetric(
                f"asymmetry {asym:.3g} exceeds {sym_tol:.3g} * {scale:.3g}"
            )
        self._set(_sym(a), pd_tol)

    def _set(self, s: np.ndarray, pd_tol: float) -> None:
        eig = _eigh(s)
        lo = float(eig.eigenvalues[0])
        if not lo > pd_tol:
            raise NotPositiveDefinite(f"smallest eigenvalue {lo:.6g} <= {pd_tol:.3g}")
        s.flags.writeable = False
        self.entries = s
        self._eig = eig
        self._roots = None

    @classmethod
    def _from_symmetric(cls, s: np.ndarray, pd_tol: float = PD_TOL) -> SpdMatrix:
        # for outputs of our own symmetrized arithmetic; definiteness is
        # still checked, a NaN fails the same comparison
        self = cls.__new__(cls)
        self._set(_sym(s), pd_tol)
        return self

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def eig(self) -> EigenDecomposition:
        return self._eig

    def _root_pair(self) -> tuple[np.ndarray, np.ndarray]:
        # (S^{1/2}, S^{-1/2}); reused by every geodesic/distance involving self
        if self._roots is None:
            r = np.sqrt(self._eig.eigenvalues)
            self._roots = (self._eig.apply(lambda _: r), self._eig.apply(lambda _: 1.0 / r))
        return self._roots

    def geodesic_to(self, other: SpdMatrix, t: float) -> SpdMatrix:
        return geodesic(self, other, t)

    def distance_to(self, other: SpdMatrix) -> float:
        return distance(self, other)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __repr__(self) -> str:
        return f"SpdMatrix({self.entries.tolist()!r})"


def validate_spd(raw, sym_tol: float = SYM_TOL, pd_tol: float = PD_TOL) -> SpdMatrix:
    """Check ``raw`` and wrap its symmetric part as an :class:`SpdMatrix`.

    Raises
    ------
    NotSquare, NonFiniteEntry, NotSymmetric, NotPositiveDefinite
    """
    return SpdMatrix(raw, sym_tol=sym_tol, pd_tol=pd_tol)


def sym_eig(S: SpdMatrix) -> EigenDecomposition:
    return S.eig


def matrix_power(S: SpdMatrix, t: float) -> SpdMatrix:
    """Spectral power ``V diag(w**t) V^T``."""
    t = float(t)
    if not np.isfinite(t):
        raise InputError(f"exponent must be finite, got {t}")
    return SpdMatrix._from_symmetric(S.eig.apply(lambda w: w**t))


def matrix_log(S: SpdMatrix) -> np.ndarray:
    """Principal logarithm, a symmetric array."""
    return S.eig.apply(np.log)


def matrix_exp(H) -> SpdMatrix:
    """Exponential of a symmetric array."""
    h = _check_square_finite(H)
    scale = max(1.0, float(np.abs(h).max()))
    if float(np.abs(h - h.T).max()) > SYM_TOL * scale:
        raise NotSymmetric("matrix_exp expects a symmetric argument")
    return SpdMatrix._from_symmetric(_eigh(_sym(h)).apply(np.exp))


def _check_dims(A: SpdMatrix, B: SpdMatrix) -> None:
    if A.dim != B.dim:
        raise DimensionMismatch(f"dimensions differ: {A.dim} vs {B.dim}")


def _whitened(A: SpdMatrix, B: SpdMatrix) -> np.ndarray:
    _, isqrt = A._root_pair()
    return _sym(isqrt @ B.entries @ isqrt)


def geodesic(A: SpdMatrix, B: SpdMatrix, t: float) -> SpdMatrix:
    """Point ``A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}``.

    Parameters
    ----------
    A, B : SpdMatrix
        Endpoints, same dimension.
    t : float
        Position along the geodesic, in ``[0, 1]``.

    Returns
    -------
    SpdMatrix
        ``A`` for ``t == 0``, ``B`` for ``t == 1``.
    """
    _check_dims(A, B)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise InputError(f"geodesic parameter must lie in [0, 1], got {t}")
    if t == 0.0 or A is B or np.array_equal(A.entries, B.entries):
        return A
    if t == 1.0:
        return B
    inner = _eigh(_whitened(A, B))
    if not inner.eigenvalues[0] > 0:
        raise NotPositiveDefinite("whitened endpoint lost definiteness")
    sqrt, _ = A._root_pair()
    return SpdMatrix._from_symmetric(sqrt @ inner.apply(lambda w: w**t) @ sqrt)


def distance(A: SpdMatrix, B: SpdMatrix, squared: bool = False) -> float:
    """Affine-invariant distance ``||log(A^{-1/2} B A^{-1/2})||_F``."""
    _check_dims(A, B)
    if A is B or np.array_equal(A.entries, B.entries):
        return 0.0
    if A.dim == 1:
        d2 = float(np.log(B.entries[0, 0] / A.entries[0, 0]) ** 2)
    else:
        try:
            w = np.linalg.eigvalsh(_whitened(A, B))
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(str(exc)) from exc
        d2 = float(np.sum(np.log(w) ** 2))
    return d2 if squared else float(np.sqrt(d2))


def random_spd(dim: int, seed: int, condition_cap: float = 1e3) -> SpdMatrix:
    """Random SPD matrix ``M M^T + eps I`` with condition number <= ``condition_cap``.

    ``M`` is filled with standard normals from a Philox generator keyed by
    ``seed``, so output is reproducible across platforms.
    """
    if dim < 1:
        raise InputError("dim must be >= 1")
    if not condition_cap >= 1:
        raise InputError("condition_cap must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    m = rng.standard_normal((dim, dim))
    s = m @ m.T
    w = np.linalg.eigvalsh(s)
    lo, hi = float(w[0]), float(w[-1])
    if condition_cap == 1:
        return SpdMatrix(np.eye(dim) * max(float(np.mean(w)), 1.0))
    eps = max(0.0, (hi - condition_cap * lo) / (condition_cap - 1.0)) * (1 + 1e-6)
    # floor keeps near-singular draws well clear of pd_tol
    eps = max(eps, 1e-8 * max(hi, 1.0))
    return SpdMatrix(s + eps * np.eye(dim))


def condition_number(S: SpdMatrix) -> float:
    w = S.eig.eigenvalues
    return float(w[-1] / w[0])


class MatrixSet(Sequence):
    """An ordered, non-empty family of SPD matrices of one dimension."""

    def __init__(self, matrices):
        mats = tuple(matrices)
        if not mats:
            raise InputError("a matrix set needs at least one matrix")
        for i, a in enumerate(mats):
            if not isinstance(a, SpdMatrix):
                raise InputError(f"matrix {i}: expected SpdMatrix, got {type(a).__name__}")
            if a.dim != mats[0].dim:
                raise DimensionMismatch(
                    f"matrix {i}: dimension {a.dim} differs from {mats[0].dim}"
                )
        self._matrices = mats

    @classmethod
    def from_arrays(cls, arrays, sym_tol: float = SYM_TOL, pd_tol: float = PD_TOL):
        mats = []
        for i, raw in enumerate(arrays):
            try:
                mats.append(SpdMatrix(raw, sym_tol=sym_tol, pd_tol=pd_tol))
            except InputError as exc:
                raise type(exc)(f"matrix {i}: {exc}") from exc
        return cls(mats)

    @classmethod
    def random(cls, dim: int, m: int, seed: int, condition_cap: float = 1e3):
        seeds = np.random.SeedSequence(seed).generate_state(m, dtype=np.uint64)
        return cls(random_spd(dim, int(s), condition_cap) for s in seeds)

    @property
    def dim(self) -> int:
        return self._matrices[0].dim

    def __getitem__(self, i):
        if isinstance(i, slice):
            return MatrixSet(self._matrices[i])
        return self._matrices[i]

    def __len__(self) -> int:
        return len(self._matrices)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "matrices": [a.entries.ravel().tolist() for a in self._matrices],
        }

    @classmethod
    def from_json(cls, obj) -> MatrixSet:
        """Parse ``{"dim": d, "matrices": [[d*d row-major reals], ...]}``."""
        if not isinstance(obj, dict) or "dim" not in obj or "matrices" not in obj:
            raise InputError('expected an object with "dim" and "matrices"')
        dim = obj["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise InputError(f'"dim" must be a positive integer, got {dim!r}')
        entries = obj["matrices"]
        if not isinstance(entries, list) or not entries:
            raise InputError('"matrices" must be a non-empty list')
        arrays = []
        for i, flat in enumerate(entries):
            if (
                not isinstance(flat, list)
                or len(flat) != dim * dim
                or not all(
                    isinstance(x, (int, float)) and not isinstance(x, bool) for x in flat
                )
            ):
                raise NotSquare(f"matrix {i}: expected a flat list of {dim * dim} numbers")
            arrays.append(np.array(flat, dtype=float).reshape(dim, dim))
        return cls.from_arrays(arrays)


def load_matrix_set(path) -> MatrixSet:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from exc
    return MatrixSet.from_json(obj)


def save_matrix_set(matrices: MatrixSet, path) -> None:
    Path(path).write_text(json.dumps(matrices.to_json()) + "\n", encoding="utf-8")
