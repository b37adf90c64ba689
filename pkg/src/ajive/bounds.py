"""Perturbation bounds and null distributions that drive joint-rank selection.

Two families of simulated distributions are produced here:

* resampled Wedin bounds: how far each block's estimated score space may
  have been pushed from its signal space by noise, estimated by measuring the
  data's energy in random directions orthogonal to the retained subspace;
* random-direction nulls: how close score spaces of the given ranks get
  when they are independent uniformly random subspaces.

Every distribution is reproducible from ``(seed, n_replicates, shapes)``:
replicate ``i`` draws only from the child stream ``SeedSequence(seed).spawn(..)[i]``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from .extract import SignalEstimate
from .linalg import TruncatedSvd, operator_norm, principal_angles, random_orthonormal, svd

__all__ = [
    "BoundKind",
    "BoundDistribution",
    "BoundCutoffs",
    "DEFAULT_REPLICATES",
    "replicate_streams",
    "resample_wedin_block",
    "combine_wedin_two_block",
    "combine_wedin_multiblock",
    "random_direction_ssv",
    "random_direction_angle",
    "cutoff",
    "wedin_oracle",
]

DEFAULT_REPLICATES = 1000
SUMMARY_PERCENTILES = (1, 5, 50, 95, 99)


class BoundKind(str, enum.Enum):
    WEDIN_BLOCK_SIN = "wedin_block_sin"
    WEDIN_JOINT_ANGLE = "wedin_joint_angle"
    WEDIN_JOINT_SSV = "wedin_joint_ssv"
    RANDOM_ANGLE = "random_angle"
    RANDOM_SSV = "random_ssv"


@dataclass(frozen=True)
class BoundDistribution:
    kind: BoundKind
    samples: np.ndarray
    n_replicates: int
    seed: int | tuple | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "kind", BoundKind(self.kind))
        if samples.shape != (self.n_replicates,):
            raise ValueError(f"expected {self.n_replicates} samples, got shape {samples.shape}")

    def percentile(self, q: float) -> float:
        return cutoff(self, q)

    def summary(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": self.n_replicates,
            "percentiles": {str(p): cutoff(self, p) for p in SUMMARY_PERCENTILES},
        }

    def to_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(f"{self.kind.value}\n")
            for v in self.samples:
                fh.write(f"{float(v)!r}\n")

    def write_summary(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2))


@dataclass(frozen=True)
class BoundCutoffs:
    """Percentile choices; ``None`` picks the default for the view in use.

    Angle view: Wedin 95th, random 5th. Squared-singular-value view: Wedin
    5th, random 95th (large ssv corresponds to a small angle).
    """

    wedin_percentile: float | None = None
    random_percentile: float | None = None

    def __post_init__(self):
        for p in (self.wedin_percentile, self.random_percentile):
            if p is not None and not 0 < p < 100:
                raise ValueError(f"percentiles must lie in (0, 100), got {p}")

    def resolve(self, view: str) -> tuple[float, float]:
        """Percentiles (wedin, random) for ``view`` in {"angle", "ssv"}.

        User percentiles are given on the angle scale and mirrored for ssv.
        """
        w = 95.0 if self.wedin_percentile is None else float(self.wedin_percentile)
        r = 5.0 if self.random_percentile is None else float(self.random_percentile)
        if view == "angle":
            return w, r
        if view == "ssv":
            return 100.0 - w, 100.0 - r
        raise ValueError(f"unknown view {view!r}")


def _seed_entropy(seed):
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(2**63))
    if seed is None:
        return int(np.random.SeedSequence().entropy)
    return int(seed)


def replicate_streams(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(c) for c in np.random.SeedSequence(seed).spawn(n)]


def _gaussian_gram(rng: np.random.Generator, m: int, r: int) -> np.ndarray:
    """Z^T Z for an m x r standard Gaussian Z."""
    if m == 0:
        return np.zeros((r, r))
    if m <= 512 or m < r:
        z = rng.standard_normal((m, r))
        return z.T @ z
    # Bartlett decomposition of Wishart(m, I_r)
    a = np.zeros((r, r))
    a[np.diag_indices(r)] = np.sqrt(rng.chisquare(m - np.arange(r)))
    low = np.tril_indices(r, -1)
    a[low] = rng.standard_normal(len(low[0]))
    return a @ a.T


def _complement_energy(rng, rest_values: np.ndarray, null_dim: int, r: int) -> float:
    """Operator norm of the data restricted to a uniform random r-dim subspace
    orthogonal to the retained directions.

    Writing that subspace as the orthonormalised projection of an ambient
    Gaussian matrix, only its coordinates on the remaining singular directions
    (``rest_values``) and the Gram matrix of its null-space part matter, so
    both are drawn directly instead of materialising an ambient-size matrix.
    """
    z = rng.standard_normal((rest_values.size, r))
    gram = z.T @ z + _gaussian_gram(rng, null_dim, r)
    chol = np.linalg.cholesky(gram)
    t = scipy.linalg.solve_triangular(chol, (rest_values[:, None] * z).T, lower=True)
    return operator_norm(t)


def resample_wedin_block(
    estimate: SignalEstimate, n_replicates: int = DEFAULT_REPLICATES, seed=None, method: str = "reduced"
) -> BoundDistribution:
    """Resampled distribution of the block's Wedin bound on sin(angle).

    Each replicate draws a random r-dim subspace V* of R^n orthogonal to the
    retained score basis and U* of R^d orthogonal to the retained loadings,
    and records ``min(max(|X V*|, |X^T U*|) / sigma_min, 1)``.

    ``method="direct"`` draws V* and U* explicitly in the ambient spaces.
    The default ``"reduced"`` draws the same distribution from coordinates
    on the block's remaining singular directions, which costs O(min(d, n) r)
    per replicate instead of O(d n r).
    """
    if method not in ("reduced", "direct"):
        raise ValueError(f"unknown method {method!r}")
    r = estimate.rank
    d, n = estimate.shape
    if r < 1:
        raise ValueError(f"block {estimate.block_name!r}: empty signal estimate has no Wedin bound")
    if 2 * r > min(d, n):
        raise ValueError(
            f"block {estimate.block_name!r}: rank {r} leaves no room for an orthogonal "
            f"{r}-dim draw in a {d}x{n} block"
        )
    smin = estimate.svd.singular_values[-1]
    seed = _seed_entropy(seed)
    out = np.empty(n_replicates)
    if method == "direct":
        x = estimate.residual + estimate.approximation()
        for i, rng in enumerate(replicate_streams(seed, n_replicates)):
            v = random_orthonormal(n, r, estimate.svd.right, rng).basis
            u = random_orthonormal(d, r, estimate.svd.left, rng).basis
            out[i] = min(max(operator_norm(x @ v), operator_norm(x.T @ u)) / smin, 1.0)
    else:
        full = estimate.full_svd if estimate.full_svd is not None else svd(estimate.residual + estimate.approximation())
        q = full.singular_values.size
        rest = full.singular_values[r:q]
        for i, rng in enumerate(replicate_streams(seed, n_replicates)):
            row = _complement_energy(rng, rest, n - q, r)
            col = _complement_energy(rng, rest, d - q, r)
            out[i] = min(max(row, col) / smin, 1.0)
    return BoundDistribution(
        BoundKind.WEDIN_BLOCK_SIN,
        out,
        n_replicates,
        seed,
        {"block": estimate.block_name, "n": n, "rank": r, "method": method},
    )


def _require(dists, kind):
    for dist in dists:
        if dist.kind is not kind:
            raise ValueError(f"expected {kind.value} distributions, got {dist.kind.value}")
    sizes = {dist.n_replicates for dist in dists}
    if len(sizes) != 1:
        raise ValueError(f"replicate counts differ: {sorted(sizes)}")


def combine_wedin_two_block(d1: BoundDistribution, d2: BoundDistribution) -> BoundDistribution:
    """Bound on the largest angle between the two perturbed copies of a joint
    direction: theta_1 + theta_2, capped at 90 degrees. Replicates pair by index."""
    _require((d1, d2), BoundKind.WEDIN_BLOCK_SIN)
    theta = np.degrees(np.arcsin(np.clip(d1.samples, 0, 1))) + np.degrees(np.arcsin(np.clip(d2.samples, 0, 1)))
    return BoundDistribution(
        BoundKind.WEDIN_JOINT_ANGLE,
        np.minimum(theta, 90.0),
        d1.n_replicates,
        (d1.seed, d2.seed),
        {"n": d1.params.get("n"), "ranks": [d1.params.get("rank"), d2.params.get("rank")]},
    )


def combine_wedin_multiblock(dists: Sequence[BoundDistribution]) -> BoundDistribution:
    """Lower bound K - sum_k sin^2(theta_k) on the squared singular value of a joint direction."""
    dists = list(dists)
    if len(dists) < 2:
        raise ValueError("need at least 2 block distributions")
    _require(dists, BoundKind.WEDIN_BLOCK_SIN)
    s = np.clip(np.vstack([dist.samples for dist in dists]), 0, 1)
    return BoundDistribution(
        BoundKind.WEDIN_JOINT_SSV,
        len(dists) - np.sum(s**2, axis=0),
        dists[0].n_replicates,
        tuple(dist.seed for dist in dists),
        {"n": dists[0].params.get("n"), "ranks": [dist.params.get("rank") for dist in dists]},
    )


def _random_top_ssv(n: int, ranks: Sequence[int], n_replicates: int, seed) -> np.ndarray:
    for r in ranks:
        if r < 1 or r > n:
            raise ValueError(f"rank {r} is not in [1, {n}]")
    out = np.empty(n_replicates)
    for i, rng in enumerate(replicate_streams(seed, n_replicates)):
        m = np.vstack([random_orthonormal(n, r, rng=rng).basis.T for r in ranks])
        out[i] = np.linalg.svd(m, compute_uv=False)[0] ** 2
    return out


def random_direction_ssv(n: int, ranks: Sequence[int], n_replicates: int = DEFAULT_REPLICATES, seed=None) -> BoundDistribution:
    """Largest squared singular value of stacked independent random score bases."""
    ranks = [int(r) for r in ranks]
    if len(ranks) < 2:
        raise ValueError("need at least 2 ranks")
    seed = _seed_entropy(seed)
    return BoundDistribution(
        BoundKind.RANDOM_SSV,
        _random_top_ssv(n, ranks, n_replicates, seed),
        n_replicates,
        seed,
        {"n": n, "ranks": ranks},
    )


def random_direction_angle(n: int, r1: int, r2: int, n_replicates: int = DEFAULT_REPLICATES, seed=None) -> BoundDistribution:
    """Smallest principal angle (degrees) between two independent random subspaces.

    Uses the same draws as :func:`random_direction_ssv` with the same seed.
    """
    seed = _seed_entropy(seed)
    ssv = _random_top_ssv(n, [r1, r2], n_replicates, seed)
    return BoundDistribution(
        BoundKind.RANDOM_ANGLE,
        np.degrees(np.arccos(np.clip(ssv - 1.0, -1.0, 1.0))),
        n_replicates,
        seed,
        {"n": n, "ranks": [int(r1), int(r2)]},
    )


def cutoff(dist: BoundDistribution, percentile: float) -> float:
    """Empirical percentile, linear interpolation between order statistics."""
    samples = dist.samples if isinstance(dist, BoundDistribution) else np.asarray(dist, dtype=float)
    if samples.size == 0:
        raise ValueError("no samples")
    return float(np.percentile(samples, percentile))


def _rank(matrix, rtol: float = 1e-10) -> int:
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def wedin_oracle(truth, estimate: SignalEstimate, case: str | None = None) -> dict:
    """Exact Wedin bound for one block when signal and noise are known.

    ``truth`` needs ``signal`` and ``noise`` arrays (e.g. a ``BlockTruth``).
    ``case`` is "under", "correct" or "over" relative to the true signal
    rank; it is inferred when omitted and must agree with the ranks otherwise.

    Returns the bound on sin(largest angle), the same bound as an angle in
    degrees, and the true principal angles (degrees) between the rank-matched
    signal score space and the estimate's score space.
    """
    a = np.asarray(truth.signal, dtype=float)
    e = np.asarray(truth.noise, dtype=float)
    r_true = _rank(a)
    r_est = estimate.rank
    inferred = "correct" if r_est == r_true else ("under" if r_est < r_true else "over")
    if case is None:
        case = inferred
    if case != inferred:
        raise ValueError(f"case {case!r} inconsistent with ranks (estimate {r_est}, signal {r_true})")
    if r_est == 0:
        raise ValueError("empty estimate")

    sa = svd(a)
    if case == "under":
        a1 = sa.head(r_est)
        effective = e + (a - a1.matrix())
        signal_scores = a1.right
    elif case == "correct":
        effective = e
        signal_scores = sa.head(r_true).right
    else:
        u, v = sa.head(r_true).left, sa.head(r_true).right
        off = e - u @ (u.T @ e)
        off = off - (off @ v) @ v.T
        e0 = svd(off).head(r_est - r_true).matrix()
        effective = e - e0
        signal_scores = v

    est = estimate.svd
    num = max(operator_norm(effective @ est.right), operator_norm(effective.T @ est.left))
    bound = min(num / est.singular_values[-1], 1.0)
    return {
        "case": case,
        "theoretical_bound": float(bound),
        "theoretical_angle": float(np.degrees(np.arcsin(bound))),
        "true_angles": principal_angles(signal_scores, est.right),
    }
