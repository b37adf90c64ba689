"""Step 2: joint score space segmentation.

The retained score bases of all blocks are stacked into ``M`` and
decomposed. A right singular vector of ``M`` with squared singular value
near K is close to every block's score space; with two blocks the squared
singular values map to principal angles through phi = arccos(sigma^2 - 1).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import (
    BoundCutoffs,
    BoundDistribution,
    BoundKind,
    DEFAULT_REPLICATES,
    combine_wedin_multiblock,
    combine_wedin_two_block,
    cutoff,
    random_direction_angle,
    random_direction_ssv,
    resample_wedin_block,
)
from .extract import SignalEstimate
from .linalg import Subspace, TruncatedSvd, svd

__all__ = [
    "Verdict",
    "StackedScores",
    "SegmentationDiagnostics",
    "Step2Distributions",
    "stack_scores",
    "angles_from_stack",
    "segment_joint",
    "simulate_step2",
    "run_step2",
]


class Verdict(str, enum.Enum):
    JOINT = "joint"
    INDIVIDUAL_CORRELATED = "individual_correlated"
    NOISE = "noise"


@dataclass(frozen=True)
class StackedScores:
    matrix: np.ndarray
    svd: TruncatedSvd
    ranks: tuple[int, ...]

    @property
    def n_blocks(self) -> int:
        return len(self.ranks)

    @property
    def squared_singular_values(self) -> np.ndarray:
        return self.svd.singular_values**2


@dataclass
class SegmentationDiagnostics:
    squared_singular_values: np.ndarray
    principal_angles_deg: np.ndarray | None
    view: str
    wedin_cutoff: float
    random_cutoff: float
    wedin_percentile: float
    random_percentile: float
    joint_rank_candidate: int
    verdicts: list[Verdict]
    flags: list[str] = field(default_factory=list)
    ranks: tuple[int, ...] = ()
    wedin_summary: dict | None = None
    random_summary: dict | None = None
    # the other view for two blocks: {"wedin_cutoff", "random_cutoff", ...}
    ssv_view: dict | None = None

    @property
    def wedin_uninformative(self) -> bool:
        return "wedin_bound_uninformative" in self.flags

    def to_dict(self) -> dict:
        out = {
            "ranks": list(self.ranks),
            "view": self.view,
            "ssv": [float(v) for v in self.squared_singular_values],
            "angles_deg": None if self.principal_angles_deg is None else [float(v) for v in self.principal_angles_deg],
            "wedin_cutoff": self.wedin_cutoff,
            "random_cutoff": self.random_cutoff,
            "wedin_percentile": self.wedin_percentile,
            "random_percentile": self.random_percentile,
            "wedin_samples_summary": self.wedin_summary,
            "random_samples_summary": self.random_summary,
            "verdicts": [v.value for v in self.verdicts],
            "joint_rank_candidate": self.joint_rank_candidate,
            "flags": list(self.flags),
        }
        if self.ssv_view is not None:
            out["ssv_view"] = self.ssv_view
        return out

    def write_json(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2))


def stack_scores(estimates: Sequence[SignalEstimate]) -> StackedScores:
    estimates = list(estimates)
    if len(estimates) < 2:
        raise ValueError("need at least 2 signal estimates")
    ns = {e.shape[1] for e in estimates}
    if len(ns) != 1:
        raise ValueError(f"estimates disagree on the number of objects: {sorted(ns)}")
    for e in estimates:
        if e.rank == 0:
            raise ValueError(f"block {e.block_name!r} has an empty signal estimate")
    m = np.vstack([e.scores.T for e in estimates])
    return StackedScores(m, svd(m), tuple(e.rank for e in estimates))


def angles_from_stack(stack: StackedScores) -> np.ndarray:
    """Principal angles (degrees) between the two blocks' score spaces."""
    if stack.n_blocks != 2:
        raise ValueError(f"principal angles need exactly 2 blocks, got {stack.n_blocks}")
    k = min(stack.ranks)
    cos = np.clip(stack.squared_singular_values[:k] - 1.0, -1.0, 1.0)
    return np.degrees(np.arccos(cos))


@dataclass(frozen=True)
class Step2Distributions:
    """Simulated distributions needed for segmentation."""

    wedin_blocks: tuple[BoundDistribution, ...]
    wedin: BoundDistribution
    random: BoundDistribution
    # two-block runs also carry the ssv view
    wedin_ssv: BoundDistribution | None = None
    random_ssv: BoundDistribution | None = None


def _child_seeds(seed, count: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(x) for x in ss.generate_state(count, dtype=np.uint64)]


def simulate_step2(estimates: Sequence[SignalEstimate], n_replicates: int = DEFAULT_REPLICATES, seed=None) -> Step2Distributions:
    """Wedin and random-direction distributions for the given estimates.

    Each block's Wedin resampling and the random-direction simulation use
    independent child seeds of ``seed``; the random-direction null depends
    only on (n, ranks), never on the data scale.
    """
    estimates = list(estimates)
    k = len(estimates)
    n = estimates[0].shape[1]
    ranks = [e.rank for e in estimates]
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
    seeds = _child_seeds(seed, k + 1)
    blocks = tuple(resample_wedin_block(e, n_replicates, s) for e, s in zip(estimates, seeds))
    ssv_wedin = combine_wedin_multiblock(blocks)
    ssv_random = random_direction_ssv(n, ranks, n_replicates, seeds[-1])
    if k == 2:
        return Step2Distributions(
            blocks,
            combine_wedin_two_block(*blocks),
            random_direction_angle(n, ranks[0], ranks[1], n_replicates, seeds[-1]),
            ssv_wedin,
            ssv_random,
        )
    return Step2Distributions(blocks, ssv_wedin, ssv_random)


def _check_params(dist: BoundDistribution, n: int, ranks: list[int], what: str):
    p = dist.params or {}
    if "n" in p and p["n"] is not None and p["n"] != n:
        raise ValueError(f"{what} distribution was simulated for n={p['n']}, estimates have n={n}")
    if "ranks" in p and p["ranks"] is not None and list(p["ranks"]) != list(ranks):
        raise ValueError(f"{what} distribution was simulated for ranks {p['ranks']}, estimates have {ranks}")


def segment_joint(
    estimates: Sequence[SignalEstimate],
    wedin_dist: BoundDistribution,
    random_dist: BoundDistribution,
    cutoffs: BoundCutoffs | None = None,
    stack: StackedScores | None = None,
) -> tuple[SegmentationDiagnostics, Subspace]:
    """Classify the stacked-score components and return the candidate joint basis.

    Angle-valued distributions select the two-block angle rule (joint iff the
    angle is below both cutoffs); ssv-valued ones the multi-block rule (joint
    iff sigma^2 is above both cutoffs). Cutoff ties count as not joint.
    """
    estimates = list(estimates)
    cutoffs = cutoffs or BoundCutoffs()
    stack = stack or stack_scores(estimates)
    ranks = list(stack.ranks)
    n = stack.matrix.shape[1]
    _check_params(wedin_dist, n, ranks, "Wedin")
    _check_params(random_dist, n, ranks, "random-direction")

    angle_kinds = (BoundKind.WEDIN_JOINT_ANGLE, BoundKind.RANDOM_ANGLE)
    ssv_kinds = (BoundKind.WEDIN_JOINT_SSV, BoundKind.RANDOM_SSV)
    kinds = (wedin_dist.kind, random_dist.kind)
    if kinds == angle_kinds:
        view = "angle"
    elif kinds == ssv_kinds:
        view = "ssv"
    else:
        raise ValueError(f"incompatible distribution kinds {kinds[0].value}, {kinds[1].value}")

    wp, rp = cutoffs.resolve(view)
    w_cut, r_cut = cutoff(wedin_dist, wp), cutoff(random_dist, rp)
    k = min(ranks)
    ssv = stack.squared_singular_values
    angles = angles_from_stack(stack) if stack.n_blocks == 2 else None

    if view == "angle":
        if angles is None:
            raise ValueError("angle distributions need exactly 2 blocks")
        stat = angles
        passes_w, passes_r = stat < w_cut, stat < r_cut
        uninformative = w_cut > r_cut
    else:
        stat = ssv[:k]
        passes_w, passes_r = stat > w_cut, stat > r_cut
        uninformative = w_cut < r_cut

    verdicts = []
    for pw, pr in zip(passes_w, passes_r):
        if not pr:
            verdicts.append(Verdict.NOISE)
        elif pw:
            verdicts.append(Verdict.JOINT)
        else:
            verdicts.append(Verdict.INDIVIDUAL_CORRELATED)
    joint_rank = int(np.count_nonzero(passes_w & passes_r))
    flags = ["wedin_bound_uninformative"] if uninformative else []

    diag = SegmentationDiagnostics(
        squared_singular_values=ssv.copy(),
        principal_angles_deg=angles,
        view=view,
        wedin_cutoff=w_cut,
        random_cutoff=r_cut,
        wedin_percentile=wp,
        random_percentile=rp,
        joint_rank_candidate=joint_rank,
        verdicts=verdicts,
        flags=flags,
        ranks=tuple(ranks),
        wedin_summary=wedin_dist.summary(),
        random_summary=random_dist.summary(),
    )
    return diag, Subspace(stack.svd.right[:, :joint_rank].copy())


def run_step2(
    estimates: Sequence[SignalEstimate],
    n_replicates: int = DEFAULT_REPLICATES,
    seed=None,
    cutoffs: BoundCutoffs | None = None,
    dists: Step2Distributions | None = None,
) -> tuple[SegmentationDiagnostics, Subspace, Step2Distributions]:
    """Simulate the bounds and segment; two-block runs report both views."""
    estimates = list(estimates)
    cutoffs = cutoffs or BoundCutoffs()
    stack = stack_scores(estimates)
    dists = dists or simulate_step2(estimates, n_replicates, seed)
    diag, joint = segment_joint(estimates, dists.wedin, dists.random, cutoffs, stack)
    if dists.wedin_ssv is not None:
        wp, rp = cutoffs.resolve("ssv")
        w_cut, r_cut = cutoff(dists.wedin_ssv, wp), cutoff(dists.random_ssv, rp)
        diag.ssv_view = {
            "wedin_cutoff": w_cut,
            "random_cutoff": r_cut,
            "wedin_percentile": wp,
            "random_percentile": rp,
            "wedin_samples_summary": dists.wedin_ssv.summary(),
            "random_samples_summary": dists.random_ssv.summary(),
        }
    return diag, joint, dists
