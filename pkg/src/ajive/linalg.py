"""Dense SVD and subspace primitives.

Everything downstream works with score subspaces of R^n represented by
orthonormal bases (columns), so this module keeps a small vocabulary:
``TruncatedSvd`` for (U, s, V) triples and ``Subspace`` for bases.
Angles are radians internally; the public angle functions return degrees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "SvdConvergenceError",
    "TruncatedSvd",
    "Subspace",
    "svd",
    "truncate",
    "principal_angles",
    "subspace_distance",
    "random_orthonormal",
    "operator_norm",
    "orthonormal_check",
    "as_rng",
    "sign_fix",
]


class SvdConvergenceError(np.linalg.LinAlgError):
    """Raised when neither LAPACK driver converges."""


@dataclass(frozen=True)
class TruncatedSvd:
    """Thin SVD ``left @ diag(singular_values) @ right.T``.

    ``right`` is stored n x r (columns are score vectors), not as V^T.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular_values.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.left.shape[0], self.right.shape[0])

    def matrix(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T

    def head(self, r: int) -> "TruncatedSvd":
        return TruncatedSvd(self.left[:, :r], self.singular_values[:r], self.right[:, :r])

    def tail(self, r: int) -> "TruncatedSvd":
        return TruncatedSvd(self.left[:, r:], self.singular_values[r:], self.right[:, r:])


@dataclass(frozen=True)
class Subspace:
    """Subspace of R^ambient_dim spanned by the orthonormal columns of ``basis``."""

    basis: np.ndarray

    def __post_init__(self):
        if self.basis.ndim != 2:
            raise ValueError("basis must be a 2-d array")

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @classmethod
    def empty(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def from_span(cls, vectors, tol: float = 1e-10) -> "Subspace":
        """Orthonormal basis for the column span of ``vectors`` (rank revealing)."""
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        if vectors.shape[1] == 0:
            return cls.empty(vectors.shape[0])
        u, s, _ = np.linalg.svd(vectors, full_matrices=False)
        keep = s > tol * max(s[0], np.finfo(float).tiny)
        return cls(u[:, keep])


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sign_fix(right: np.ndarray, left: np.ndarray | None = None, rtol: float = 1e-10):
    """Flip columns so the first non-negligible coordinate of each ``right`` column is positive.

    ``left`` columns are flipped along with their partners.
    """
    right = np.array(right, dtype=float, copy=True)
    left = None if left is None else np.array(left, dtype=float, copy=True)
    for i in range(right.shape[1]):
        col = right[:, i]
        scale = np.max(np.abs(col)) if col.size else 0.0
        if scale == 0.0:
            continue
        first = np.flatnonzero(np.abs(col) > rtol * scale)[0]
        if col[first] < 0:
            right[:, i] = -col
            if left is not None:
                left[:, i] = -left[:, i]
    return right, left


def svd(matrix) -> TruncatedSvd:
    """Full thin SVD with deterministic signs.

    Returns all min(d, n) components, zeros included; use :func:`truncate`
    to keep only the strictly positive part above a threshold.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if min(a.shape) == 0:
        return TruncatedSvd(np.zeros((a.shape[0], 0)), np.zeros(0), np.zeros((a.shape[1], 0)))
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails where the slower QR-iteration driver succeeds
        try:
            u, s, vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise SvdConvergenceError(f"SVD did not converge for {a.shape} matrix") from exc
    v, u = sign_fix(vt.T, u)
    return TruncatedSvd(u, s, v)


def truncate(decomp: TruncatedSvd, threshold: float) -> TruncatedSvd:
    """Keep exactly the components whose singular value is strictly above ``threshold``."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    r = int(np.count_nonzero(decomp.singular_values > threshold))
    return decomp.head(r)


def _basis(x) -> np.ndarray:
    return x.basis if isinstance(x, Subspace) else np.asarray(x, dtype=float)


def _cosines(a, b) -> np.ndarray:
    qa, qb = _basis(a), _basis(b)
    if qa.shape[0] != qb.shape[0]:
        raise ValueError(f"ambient dimensions differ: {qa.shape[0]} vs {qb.shape[0]}")
    k = min(qa.shape[1], qb.shape[1])
    if k == 0:
        return np.zeros(0)
    c = np.linalg.svd(qa.T @ qb, compute_uv=False)[:k]
    return np.clip(c, -1.0, 1.0)


def principal_angles(a, b) -> np.ndarray:
    """Principal angles in degrees, nondecreasing, length min(rank a, rank b)."""
    return np.degrees(np.arccos(_cosines(a, b)))


def subspace_distance(a, b) -> float:
    """sin of the largest principal angle; 0 when either subspace is trivial."""
    c = _cosines(a, b)
    if c.size == 0:
        return 0.0
    # sqrt(1 - c^2) loses accuracy for nearly aligned spaces; use the residual instead
    qa, qb = _basis(a), _basis(b)
    if qa.shape[1] <= qb.shape[1]:
        resid = qa - qb @ (qb.T @ qa)
    else:
        resid = qb - qa @ (qa.T @ qb)
    return float(min(operator_norm(resid), 1.0))


def random_orthonormal(ambient_dim: int, rank: int, orthogonal_to=None, rng=None) -> Subspace:
    """Uniformly distributed ``rank``-dim subspace, optionally inside the complement of another."""
    rng = as_rng(rng)
    constraint = None if orthogonal_to is None else _basis(orthogonal_to)
    taken = 0 if constraint is None else constraint.shape[1]
    if rank < 0 or rank + taken > ambient_dim:
        raise ValueError(
            f"cannot draw a {rank}-dim subspace of R^{ambient_dim} orthogonal to a {taken}-dim subspace"
        )
    g = rng.standard_normal((ambient_dim, rank))
    if constraint is not None and taken:
        g -= constraint @ (constraint.T @ g)
        # second pass keeps cross products at rounding level
        g -= constraint @ (constraint.T @ g)
    q, r = np.linalg.qr(g)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return Subspace(q)


def operator_norm(matrix) -> float:
    a = np.asarray(matrix, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def orthonormal_check(basis, tol: float = 1e-10) -> bool:
    q = _basis(basis)
    return bool(np.max(np.abs(q.T @ q - np.eye(q.shape[1])), initial=0.0) <= tol)
