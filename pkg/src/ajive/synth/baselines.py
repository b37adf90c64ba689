"""Reference methods that do not separate joint from individual variation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blocks import MultiBlockDataset
from ..linalg import TruncatedSvd, svd

__all__ = ["ConcatSvdResult", "PlsResult", "baseline_concat_svd", "baseline_pls"]


@dataclass(frozen=True)
class ConcatSvdResult:
    svd: TruncatedSvd
    approximations: dict

    def __getitem__(self, name) -> np.ndarray:
        return self.approximations[name]


def baseline_concat_svd(dataset: MultiBlockDataset, rank: int) -> ConcatSvdResult:
    """Rank-``rank`` SVD of the row-concatenated blocks, split back per block."""
    if rank < 1:
        raise ValueError("rank must be at least 1")
    stacked = np.vstack([b.values for b in dataset.blocks])
    if rank > min(stacked.shape):
        raise ValueError(f"rank {rank} exceeds min dimension {min(stacked.shape)} of the concatenation")
    dec = svd(stacked).head(rank)
    approx = dec.matrix()
    out, start = {}, 0
    for b in dataset.blocks:
        out[b.name] = approx[start : start + b.n_features]
        start += b.n_features
    return ConcatSvdResult(dec, out)


@dataclass(frozen=True)
class PlsResult:
    """Paired PLS directions.

    ``weights[k]`` is d_k x c (unit columns a_i), ``scores[k]`` is c x n with
    rows a_i^T X_k taken from the deflated blocks; rows are mutually
    orthogonal within a block.
    """

    names: tuple[str, str]
    weights: tuple[np.ndarray, np.ndarray]
    scores: tuple[np.ndarray, np.ndarray]
    covariances: np.ndarray
    approximations: dict

    @property
    def n_components(self) -> int:
        return self.covariances.size

    def score_directions(self, block: int = 0) -> np.ndarray:
        """Unit-norm score vectors (n x c) of one block; zero rows stay zero."""
        s = self.scores[block].T
        norms = np.linalg.norm(s, axis=0)
        out = np.zeros_like(s)
        nz = norms > 0
        out[:, nz] = s[:, nz] / norms[nz]
        return out


def _top_pair(x: np.ndarray, y: np.ndarray, tol: float, max_iter: int):
    """Leading singular pair of x @ y.T by power iteration, never forming the product."""
    # start from the top left singular vector of y, deterministic and rarely orthogonal
    b = np.linalg.svd(y, full_matrices=False)[0][:, 0] if y.any() else np.eye(y.shape[0])[:, 0]
    sigma = 0.0
    for _ in range(max_iter):
        a = x @ (y.T @ b)
        na = np.linalg.norm(a)
        if na == 0:
            return np.eye(x.shape[0])[:, 0], b, 0.0
        a /= na
        b_new = y @ (x.T @ a)
        sigma_new = np.linalg.norm(b_new)
        if sigma_new == 0:
            return a, b, 0.0
        b_new /= sigma_new
        done = abs(sigma_new - sigma) <= tol * sigma_new and np.linalg.norm(b_new - b) <= np.sqrt(tol)
        b, sigma = b_new, sigma_new
        if done:
            break
    return a, b, float(sigma)


def _project_out(x: np.ndarray, s: np.ndarray) -> np.ndarray:
    ss = s @ s
    return x if ss == 0 else x - np.outer(x @ s, s) / ss


def baseline_pls(
    dataset: MultiBlockDataset, n_components: int, tol: float = 1e-12, max_iter: int = 5000, center_atol: float = 1e-8
) -> PlsResult:
    """Two-block PLS by deflation.

    Each step takes the unit pair (a, b) maximizing a^T X Y^T b on the
    deflated blocks, then removes the new score directions from the
    columns of each block so later scores are orthogonal to earlier ones.
    The approximations project each original block on its score span.
    """
    if len(dataset) != 2:
        raise ValueError(f"PLS needs exactly 2 blocks, got {len(dataset)}")
    bx, by = dataset.blocks
    for b in (bx, by):
        scale = max(np.abs(b.values).max(), 1.0)
        if np.abs(b.values.mean(axis=1)).max() > center_atol * scale:
            raise ValueError(f"block {b.name!r} is not row-centered")
    max_rank = min(np.linalg.matrix_rank(bx.values), np.linalg.matrix_rank(by.values))
    if not 1 <= n_components <= max_rank:
        raise ValueError(f"n_components must lie in [1, {max_rank}] (min block rank)")

    x, y = bx.values.copy(), by.values.copy()
    wa, wb, sa, sb, cov = [], [], [], [], []
    for _ in range(n_components):
        a, b, s = _top_pair(x, y, tol, max_iter)
        ta, tb = a @ x, b @ y
        wa.append(a)
        wb.append(b)
        sa.append(ta)
        sb.append(tb)
        cov.append(s)
        x, y = _project_out(x, ta), _project_out(y, tb)

    sa, sb = np.array(sa), np.array(sb)
    approx = {}
    for name, values, scores in ((bx.name, bx.values, sa), (by.name, by.values, sb)):
        q = scores.T[:, np.linalg.norm(scores, axis=1) > 0]
        q = np.linalg.qr(q)[0] if q.size else q
        approx[name] = values @ q @ q.T
    return PlsResult((bx.name, by.name), (np.array(wa).T, np.array(wb).T), (sa, sb), np.array(cov), approx)
