"""Step 1: per-block signal extraction by thresholded SVD."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blocks import DataBlock
from .linalg import TruncatedSvd, svd

__all__ = ["RankSpec", "SignalEstimate", "scree", "initial_extract", "write_scree"]


@dataclass(frozen=True)
class RankSpec:
    """Either a target rank or a singular-value threshold, not both."""

    rank: int | None = None
    threshold: float | None = None

    def __post_init__(self):
        if (self.rank is None) == (self.threshold is None):
            raise ValueError("RankSpec needs exactly one of rank or threshold")
        if self.rank is not None and (int(self.rank) != self.rank or self.rank < 1):
            raise ValueError(f"rank must be a positive integer, got {self.rank!r}")
        if self.threshold is not None and not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold!r}")

    @classmethod
    def coerce(cls, spec) -> "RankSpec":
        if isinstance(spec, RankSpec):
            return spec
        if isinstance(spec, (int, np.integer)):
            return cls(rank=int(spec))
        raise TypeError(f"cannot interpret {spec!r} as a RankSpec; pass an int rank or RankSpec")


@dataclass(frozen=True)
class SignalEstimate:
    """Low-rank estimate of one block's signal.

    ``svd`` holds the retained components, ``full_svd`` every component of the
    block (reused by the resampling bounds), ``residual`` is X - A_tilde.
    """

    block_name: str
    svd: TruncatedSvd
    threshold: float
    residual: np.ndarray
    all_singular_values: np.ndarray
    full_svd: TruncatedSvd = field(repr=False, default=None)
    warnings: tuple[str, ...] = ()

    @property
    def rank(self) -> int:
        return self.svd.rank

    @property
    def shape(self) -> tuple[int, int]:
        return self.residual.shape

    @property
    def scores(self) -> np.ndarray:
        """Orthonormal basis (n x rank) of the estimated signal score space."""
        return self.svd.right

    def approximation(self) -> np.ndarray:
        return self.svd.matrix()


def scree(block: DataBlock | np.ndarray) -> np.ndarray:
    x = block.values if isinstance(block, DataBlock) else np.asarray(block, dtype=float)
    return np.linalg.svd(x, compute_uv=False)


def initial_extract(block: DataBlock, spec, full: TruncatedSvd | None = None) -> SignalEstimate:
    """Thresholded SVD of one block.

    With a rank spec the recorded threshold is the midpoint between the last
    kept and first dropped singular value (0 past the end). ``full`` may
    pass in a precomputed ``linalg.svd(block.values)`` when extracting the
    same block at several ranks.
    """
    spec = RankSpec.coerce(spec)
    x = block.values
    full = svd(x) if full is None else full
    s = full.singular_values
    if spec.rank is not None:
        r = spec.rank
        if r > s.size:
            raise ValueError(f"block {block.name!r}: rank {r} exceeds min(d, n) = {s.size}")
        if s[r - 1] <= s[0] * s.size * np.finfo(float).eps:
            raise ValueError(f"block {block.name!r}: rank {r} exceeds the numerical rank of the matrix")
        nxt = s[r] if r < s.size else 0.0
        if s[r - 1] == nxt:
            raise ValueError(f"block {block.name!r}: singular values {r} and {r + 1} are tied")
        threshold = 0.5 * (s[r - 1] + nxt)
    else:
        threshold = float(spec.threshold)
        r = int(np.count_nonzero(s > threshold))
    kept = full.head(r)
    notes = ()
    if r == 0:
        msg = f"block {block.name!r}: no singular value above threshold {threshold:g}; signal estimate is empty"
        warnings.warn(msg, stacklevel=2)
        notes = (msg,)
    residual = x - kept.matrix()
    return SignalEstimate(block.name, kept, float(threshold), residual, s.copy(), full, notes)


def write_scree(path, values) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("index,singular_value\n")
        for i, v in enumerate(values, start=1):
            fh.write(f"{i},{float(v)!r}\n")
