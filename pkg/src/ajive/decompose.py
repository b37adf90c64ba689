"""Step 3: final joint / individual / noise decomposition."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .blocks import MultiBlockDataset, write_matrix
from .extract import SignalEstimate
from .linalg import Subspace, TruncatedSvd, svd, truncate

__all__ = ["BlockDecomposition", "AjiveDecomposition", "recheck_joint", "finalize", "write_decomposition", "verify_outputs"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockDecomposition:
    """One block's share of the decomposition.

    ``joint_svd`` and ``individual_svd`` give the block specific
    representation: scores are ``diag(s) @ right.T``, loadings ``left``.
    """

    name: str
    joint: np.ndarray
    individual: np.ndarray
    noise: np.ndarray
    threshold: float
    joint_svd: TruncatedSvd
    individual_svd: TruncatedSvd
    cns_loadings: np.ndarray

    @property
    def individual_rank(self) -> int:
        return self.individual_svd.rank

    @property
    def joint_scores(self) -> np.ndarray:
        return self.joint_svd.singular_values[:, None] * self.joint_svd.right.T

    @property
    def joint_loadings(self) -> np.ndarray:
        return self.joint_svd.left

    @property
    def individual_scores(self) -> np.ndarray:
        return self.individual_svd.singular_values[:, None] * self.individual_svd.right.T

    @property
    def individual_loadings(self) -> np.ndarray:
        return self.individual_svd.left

    @property
    def individual_normalized_scores(self) -> np.ndarray:
        return self.individual_svd.right.T

    def signal(self) -> np.ndarray:
        return self.joint + self.individual


@dataclass
class AjiveDecomposition:
    joint_basis: Subspace
    blocks: list[BlockDecomposition]
    initial_ranks: tuple[int, ...] = ()
    candidate_joint_rank: int | None = None
    dropped: list[dict] = field(default_factory=list)
    diagnostics: object = None

    @property
    def joint_rank(self) -> int:
        return self.joint_basis.rank

    @property
    def cns_scores(self) -> np.ndarray:
        """Common normalized scores, joint_rank x n."""
        return self.joint_basis.basis.T

    @property
    def individual_ranks(self) -> list[int]:
        return [b.individual_rank for b in self.blocks]

    @property
    def signal_ranks(self) -> list[int]:
        return [self.joint_rank + b.individual_rank for b in self.blocks]

    def __getitem__(self, name) -> BlockDecomposition:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def summary(self) -> dict:
        return {
            "blocks": [b.name for b in self.blocks],
            "initial_ranks": list(self.initial_ranks),
            "thresholds": {b.name: b.threshold for b in self.blocks},
            "candidate_joint_rank": self.candidate_joint_rank,
            "joint_rank": self.joint_rank,
            "individual_ranks": {b.name: b.individual_rank for b in self.blocks},
            "signal_ranks": {b.name: r for b, r in zip(self.blocks, self.signal_ranks)},
            "dropped_components": self.dropped,
        }


def recheck_joint(
    dataset: MultiBlockDataset, estimates: Sequence[SignalEstimate], candidate: Subspace
) -> tuple[Subspace, list[dict]]:
    """Keep candidate direction v only if |X_k v| exceeds t_k in every block.

    Returns the surviving basis and one record per dropped column.
    """
    basis = candidate.basis
    keep, dropped = [], []
    for i in range(basis.shape[1]):
        v = basis[:, i]
        failing = []
        norms = {}
        for block, est in zip(dataset.blocks, estimates):
            norm = float(np.linalg.norm(block.values @ v))
            norms[block.name] = norm
            if not norm > est.threshold:
                failing.append(block.name)
        if failing:
            logger.info("dropping joint candidate %d: below threshold in %s", i + 1, ", ".join(failing))
            dropped.append({"component": i + 1, "failing_blocks": failing, "projection_norms": norms})
        else:
            keep.append(i)
    return Subspace(basis[:, keep].copy()), dropped


def _numerical_rank(s: np.ndarray, shape) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > s[0] * max(shape) * np.finfo(float).eps))


def finalize(dataset: MultiBlockDataset, estimates: Sequence[SignalEstimate], joint: Subspace) -> AjiveDecomposition:
    """Project every block on the joint space and rethreshold the remainder."""
    vj = joint.basis
    blocks = []
    for block, est in zip(dataset.blocks, estimates):
        x = block.values
        xj = x @ vj
        jmat = xj @ vj.T
        perp = x - jmat
        ind = truncate(svd(perp), est.threshold)
        imat = ind.matrix()
        noise = x - jmat - imat

        js = svd(jmat)
        js = js.head(min(_numerical_rank(js.singular_values, x.shape), joint.rank))

        norms = np.linalg.norm(xj, axis=0)
        loadings = np.zeros_like(xj)
        nz = norms > 0
        loadings[:, nz] = xj[:, nz] / norms[nz]
        if not np.all(nz):
            warnings.warn(f"block {block.name!r} has no energy along some joint direction", stacklevel=2)
        blocks.append(BlockDecomposition(block.name, jmat, imat, noise, est.threshold, js, ind, loadings))
    return AjiveDecomposition(joint, blocks, tuple(e.rank for e in estimates))


def write_decomposition(result: AjiveDecomposition, out_dir, object_labels=None, feature_labels=None) -> Path:
    """Write the output directory: full matrices, CNS/BSS/INS pieces and summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    feature_labels = feature_labels or {}
    comp = lambda prefix, k: [f"{prefix}{i + 1}" for i in range(k)]
    write_matrix(out / "cns_scores.csv", result.cns_scores, comp("joint", result.joint_rank), object_labels)
    for b in result.blocks:
        fl = feature_labels.get(b.name)
        write_matrix(out / f"joint_{b.name}.csv", b.joint, fl, object_labels)
        write_matrix(out / f"individual_{b.name}.csv", b.individual, fl, object_labels)
        write_matrix(out / f"noise_{b.name}.csv", b.noise, fl, object_labels)
        write_matrix(out / f"cns_loadings_{b.name}.csv", b.cns_loadings, fl, comp("joint", result.joint_rank))
        write_matrix(out / f"bss_joint_scores_{b.name}.csv", b.joint_scores, comp("joint", b.joint_svd.rank), object_labels)
        write_matrix(out / f"bss_joint_loadings_{b.name}.csv", b.joint_loadings, fl, comp("joint", b.joint_svd.rank))
        write_matrix(out / f"bss_individual_scores_{b.name}.csv", b.individual_scores, comp("indiv", b.individual_rank), object_labels)
        write_matrix(out / f"bss_individual_loadings_{b.name}.csv", b.individual_loadings, fl, comp("indiv", b.individual_rank))
        write_matrix(out / f"ins_scores_{b.name}.csv", b.individual_normalized_scores, comp("indiv", b.individual_rank), object_labels)
    summary = result.summary()
    if result.diagnostics is not None:
        summary["diagnostics"] = result.diagnostics.to_dict()
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return out


def verify_outputs(dataset: MultiBlockDataset, out_dir, rtol: float = 1e-10) -> list[str]:
    """Reload a written decomposition and check additivity and joint/individual orthogonality.

    Returns a list of failure messages (empty when everything holds).
    """
    from .blocks import read_matrix

    out = Path(out_dir)
    problems = []
    summary = json.loads((out / "summary.json").read_text())
    if summary["joint_rank"]:
        vj = read_matrix(out / "cns_scores.csv")[0].T
    else:
        vj = np.zeros((dataset.n_objects, 0))
    for block in dataset.blocks:
        x = block.values
        scale = max(np.linalg.norm(x), np.finfo(float).tiny)
        parts = [read_matrix(out / f"{kind}_{block.name}.csv")[0] for kind in ("joint", "individual", "noise")]
        if np.linalg.norm(x - sum(parts)) > rtol * scale:
            problems.append(f"{block.name}: joint + individual + noise does not reproduce the block")
        if np.linalg.norm(parts[1] @ vj) > rtol * scale:
            problems.append(f"{block.name}: individual matrix is not orthogonal to the joint space")
        if np.linalg.norm(parts[0] - parts[0] @ vj @ vj.T) > rtol * scale:
            problems.append(f"{block.name}: joint matrix leaves the joint space")
    return problems
