"""Coverage of the resampled Wedin bound as a prediction bound for the true angle.

Each trial regenerates the toy noise, estimates every block at several
ranks, and checks whether a percentile of the resampled bound (as an angle)
is at least the true largest angle between the signal score space and the
estimate's score space.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..bounds import DEFAULT_REPLICATES, resample_wedin_block
from ..linalg import subspace_distance, svd
from ..extract import RankSpec, initial_extract
from .truth import ToyConfig, make_toy

__all__ = ["CoverageTable", "coverage_simulation", "DEFAULT_TRIALS", "FULL_TRIALS", "DEFAULT_RANK_SPECS"]

DEFAULT_TRIALS = 500
FULL_TRIALS = 10_000
DEFAULT_PERCENTILES = (50.0, 90.0, 95.0, 99.0)
# under, correct and over specified ranks per toy block
DEFAULT_RANK_SPECS = {"X": (1, 2, 3), "Y": (2, 3, 4)}
# degrees; rounding slack so an exact (noiseless) estimate counts as covered
ANGLE_ATOL = 1e-9


@dataclass
class CoverageTable:
    """Coverage percentages indexed by block, percentile and rank."""

    percentiles: tuple[float, ...]
    rank_specs: dict
    # block -> array (n_percentiles, n_ranks) of covered counts
    counts: dict
    n_trials: int
    seed: int
    n_replicates: int
    config: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def coverage(self, block: str) -> np.ndarray:
        """Percent covered, rows = percentiles, columns = ranks."""
        return 100.0 * np.asarray(self.counts[block], dtype=float) / self.n_trials

    def value(self, block: str, percentile: float, rank: int) -> float:
        i = list(self.percentiles).index(float(percentile))
        j = list(self.rank_specs[block]).index(rank)
        return float(self.coverage(block)[i, j])

    def format(self, block: str) -> str:
        ranks = self.rank_specs[block]
        lines = [f"{block}\t" + "\t".join(str(r) for r in ranks)]
        for p, row in zip(self.percentiles, self.coverage(block)):
            lines.append(f"{p:g}%\t" + "\t".join(f"{v:.1f}%" for v in row))
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        """One row per block and nominal level, one column per rank."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        width = max(len(r) for r in self.rank_specs.values())
        rows = ["block,nominal," + ",".join(f"rank_{i + 1}" for i in range(width))]
        for block, ranks in self.rank_specs.items():
            rows.append(f"{block},rank," + ",".join(str(r) for r in ranks))
            for p, vals in zip(self.percentiles, self.coverage(block)):
                rows.append(f"{block},{p:g}," + ",".join(f"{v:.2f}" for v in vals))
        path.write_text("\n".join(rows) + "\n")

    def metadata(self) -> dict:
        return {
            "seed": self.seed,
            "n_trials": self.n_trials,
            "n_replicates": self.n_replicates,
            "percentiles": list(self.percentiles),
            "rank_specs": {k: list(v) for k, v in self.rank_specs.items()},
            "config": self.config,
            "elapsed_seconds": self.elapsed_seconds,
            "coverage": {b: self.coverage(b).tolist() for b in self.rank_specs},
        }

    def write(self, out_dir, stem: str = "coverage") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
        self.to_csv(csv_path)
        json_path.write_text(json.dumps(self.metadata(), indent=2))
        return csv_path, json_path


def _signal_scores(config: ToyConfig, names) -> dict:
    """Right singular vectors of each noiseless toy signal, with its rank."""
    _, truth = make_toy(config, seed=0)
    out = {}
    for name in names:
        bt = truth[name]
        dec = svd(bt.signal)
        out[name] = (dec.right, bt.rank)
    return out


def _trial(args) -> dict:
    seq, config, rank_specs, percentiles, n_replicates, signal = args
    data_seq, bound_seq = seq.spawn(2)
    dataset, _ = make_toy(config, seed=np.random.default_rng(data_seq))
    bound_seeds = iter(bound_seq.generate_state(sum(len(r) for r in rank_specs.values()), dtype=np.uint64))
    out = {}
    for name, ranks in rank_specs.items():
        block = dataset[name]
        full = svd(block.values)
        right, true_rank = signal[name]
        hits = np.zeros((len(percentiles), len(ranks)), dtype=int)
        for j, r in enumerate(ranks):
            est = initial_extract(block, RankSpec(rank=r), full)
            # under-specified: compare with the leading r signal directions
            true_angle = np.degrees(np.arcsin(subspace_distance(right[:, : min(r, true_rank)], est.scores)))
            dist = resample_wedin_block(est, n_replicates, int(next(bound_seeds)))
            angles = np.degrees(np.arcsin(dist.samples))
            cuts = np.percentile(angles, percentiles)
            hits[:, j] = cuts >= true_angle - ANGLE_ATOL
        out[name] = hits
    return out


def coverage_simulation(
    n_trials: int = DEFAULT_TRIALS,
    rank_specs: dict | Sequence[int] | None = None,
    percentiles: Sequence[float] = DEFAULT_PERCENTILES,
    seed: int = 0,
    block: str | None = None,
    n_replicates: int = DEFAULT_REPLICATES,
    config: ToyConfig | None = None,
    workers: int = 1,
) -> CoverageTable:
    """Simulate coverage of the resampled Wedin percentile bounds on the toy data.

    Parameters
    ----------
    n_trials : int
        Independent noise realizations. 500 is the desk-scale default;
        ``FULL_TRIALS`` matches the larger published setting.
    rank_specs : dict or sequence of int, optional
        Ranks per block name. A plain sequence applies to ``block``.
    percentiles : sequence of float
        Nominal levels of the prediction bounds.
    seed : int
        Master seed. Trial ``t`` uses the t-th spawned child, so results do
        not depend on ``workers``.
    block : str, optional
        Restrict the run to one block ("X" or "Y").
    workers : int
        Worker processes; 1 runs in-process.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if rank_specs is None:
        specs = dict(DEFAULT_RANK_SPECS)
    elif isinstance(rank_specs, dict):
        specs = {k: tuple(v) for k, v in rank_specs.items()}
    else:
        if block is None:
            raise ValueError("a plain rank list needs block=")
        specs = {block: tuple(rank_specs)}
    if block is not None:
        specs = {block: specs[block]}
    percentiles = tuple(float(p) for p in percentiles)
    config = config or ToyConfig()

    start = time.perf_counter()
    children = np.random.SeedSequence(seed).spawn(n_trials)
    signal = _signal_scores(config, specs)
    jobs = [(c, config, specs, percentiles, n_replicates, signal) for c in children]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_trial, jobs, chunksize=max(1, n_trials // (4 * workers))))
    else:
        results = [_trial(j) for j in jobs]
    counts = {name: sum(r[name] for r in results) for name in specs}
    return CoverageTable(
        percentiles,
        specs,
        counts,
        n_trials,
        seed,
        n_replicates,
        asdict(config),
        time.perf_counter() - start,
    )
