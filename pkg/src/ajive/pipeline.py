"""End-to-end AJIVE: extraction, segmentation, final decomposition."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .blocks import MultiBlockDataset
from .bounds import DEFAULT_REPLICATES, BoundCutoffs
from .decompose import AjiveDecomposition, finalize, recheck_joint
from .extract import RankSpec, SignalEstimate, initial_extract
from .linalg import Subspace
from .segment import SegmentationDiagnostics, run_step2, stack_scores

__all__ = ["ajive", "extract_all", "diagnose"]


def extract_all(dataset: MultiBlockDataset, ranks: Sequence) -> list[SignalEstimate]:
    ranks = list(ranks)
    if len(ranks) != len(dataset):
        raise ValueError(f"got {len(ranks)} rank specs for {len(dataset)} blocks")
    return [initial_extract(b, RankSpec.coerce(r)) for b, r in zip(dataset.blocks, ranks)]


def diagnose(
    dataset: MultiBlockDataset,
    ranks: Sequence,
    n_replicates: int = DEFAULT_REPLICATES,
    seed=None,
    cutoffs: BoundCutoffs | None = None,
) -> SegmentationDiagnostics:
    """Step 1 and Step 2 only, for exploring initial ranks."""
    estimates = extract_all(dataset, ranks)
    diag, _, _ = run_step2(estimates, n_replicates, seed, cutoffs)
    return diag


def ajive(
    dataset: MultiBlockDataset,
    ranks: Sequence,
    n_replicates: int = DEFAULT_REPLICATES,
    seed=None,
    cutoffs: BoundCutoffs | None = None,
    joint_rank: int | None = None,
) -> AjiveDecomposition:
    """Decompose every block into joint, individual and noise matrices.

    Parameters
    ----------
    dataset : MultiBlockDataset
    ranks : sequence of int or RankSpec
        Initial signal rank (or threshold) per block.
    n_replicates : int
        Replicates for each simulated bound distribution.
    seed : int, optional
        Master seed; the run is deterministic given it.
    cutoffs : BoundCutoffs, optional
        Percentile choices (angle scale).
    joint_rank : int, optional
        Skip the bound-based selection and take this many leading stacked
        directions as joint candidates (they are still rechecked).
    """
    estimates = extract_all(dataset, ranks)
    diag = None
    if joint_rank is None:
        diag, candidate, _ = run_step2(estimates, n_replicates, seed, cutoffs)
    else:
        stack = stack_scores(estimates)
        if not 0 <= joint_rank <= min(stack.ranks):
            raise ValueError(f"joint_rank must lie in [0, {min(stack.ranks)}]")
        candidate = Subspace(stack.svd.right[:, :joint_rank].copy())
    joint, dropped = recheck_joint(dataset, estimates, candidate)
    result = finalize(dataset, estimates, joint)
    result.candidate_joint_rank = candidate.rank
    result.dropped = dropped
    result.diagnostics = diag
    return result
