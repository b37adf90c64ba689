"""Ground-truth generators: the two-block toy and random model datasets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..blocks import DataBlock, MultiBlockDataset
from ..linalg import Subspace, as_rng, principal_angles

__all__ = ["BlockTruth", "GroundTruth", "ToyConfig", "make_toy", "toy_scores", "random_model"]


@dataclass(frozen=True)
class BlockTruth:
    name: str
    joint: np.ndarray
    individual: np.ndarray
    noise: np.ndarray
    joint_rank: int
    individual_rank: int

    @property
    def signal(self) -> np.ndarray:
        return self.joint + self.individual

    @property
    def rank(self) -> int:
        return self.joint_rank + self.individual_rank

    def signal_part(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        """(A_1, A_0): the rank-r truncated SVD of the signal and what it leaves out."""
        u, s, vt = np.linalg.svd(self.signal, full_matrices=False)
        a1 = (u[:, :r] * s[:r]) @ vt[:r]
        return a1, self.signal - a1


@dataclass(frozen=True)
class GroundTruth:
    blocks: tuple[BlockTruth, ...]
    joint_space: Subspace
    individual_spaces: tuple[Subspace, ...]

    def __getitem__(self, key) -> BlockTruth:
        if isinstance(key, str):
            for b in self.blocks:
                if b.name == key:
                    return b
            raise KeyError(key)
        return self.blocks[key]

    def individual_angles(self) -> dict:
        """Smallest principal angle (degrees) between each pair of individual spaces."""
        out = {}
        for i in range(len(self.blocks)):
            for j in range(i + 1, len(self.blocks)):
                a = principal_angles(self.individual_spaces[i], self.individual_spaces[j])
                out[(self.blocks[i].name, self.blocks[j].name)] = float(a[0]) if a.size else 90.0
        return out


@dataclass(frozen=True)
class ToyConfig:
    """Settings for the two-block toy example.

    ``x_*`` / ``y_*`` amplitudes are the signal singular values of each
    pattern (before any mixing). The X noise scale of 5000 against signals
    of a few 1e5 puts X about four orders of magnitude above Y.

    Default amplitudes were tuned by simulation:

    - every signal singular value is at least 1.5 times the expected noise
      operator norm (about 1e5 for X, 110 for Y);
    - X joint 5e5 and X individual 2e5 give resampled-bound coverage for
      X at its correct rank near 62 / 90 / 94 / 98 % at nominal
      50 / 90 / 95 / 99, and keep the CNS direction within 4 degrees of the
      true joint direction;
    - in Y the joint loadings overlap the two-group loadings, so Y's
      principal components mix them; ``y_joint = 957`` puts 79.6 % of the
      joint score direction's energy in Y's third component;
    - the two-group pattern (1500) dominates the three-group one (900), so a
      rank-2 SVD of the concatenated blocks misses most of Y's individual
      signal.
    """

    n: int = 100
    x_features: int = 100
    y_features: int = 10_000
    x_noise: float = 5000.0
    y_noise: float = 1.0
    x_joint: float = 5.0e5
    x_individual: float = 2.0e5
    y_joint: float = 957.0
    y_individual_three_group: float = 900.0
    y_individual_two_group: float = 1500.0
    individual_angle: float = 45.0
    # Y joint loadings live on the last `y_joint_rows` features
    y_joint_rows: int = 2000

    def __post_init__(self):
        amps = (self.x_joint, self.x_individual, self.y_joint, self.y_individual_three_group, self.y_individual_two_group)
        if min(amps) <= 0:
            raise ValueError("signal amplitudes must be positive")
        if not 0 < self.individual_angle <= 90:
            raise ValueError("individual_angle must lie in (0, 90]")
        if self.n % 4 or self.n < 12:
            raise ValueError("n must be a multiple of 4 (column quarters) and at least 12")
        if self.x_features % 2 or self.y_features % 2:
            raise ValueError("feature counts must be even")
        if not 0 < self.y_joint_rows <= self.y_features // 2:
            raise ValueError("y_joint_rows must fit in the bottom half of Y")


def _unit(v):
    return v / np.linalg.norm(v)


def toy_scores(n: int = 100, angle: float = 45.0) -> dict:
    """Unit score patterns over the n objects.

    ``joint`` contrasts the left and right halves; ``x`` splits the columns
    into two other groups of n/2 (quarters 1+3 vs 2+4). ``y_two`` is the
    two-group pattern quarters 1+4 vs 2+3. ``y_three`` starts from a
    three-group pattern on thirds, keeps only its part orthogonal to
    the quarter patterns, and is tilted toward ``x`` so that span(x) meets
    span(y_three, y_two) at exactly ``angle`` degrees.
    """
    q = np.repeat(np.arange(4), n // 4)
    sign = lambda groups: np.where(np.isin(q, groups), 1.0, -1.0)
    joint = _unit(sign([0, 1]))
    x = _unit(sign([0, 2]))
    y_two = _unit(sign([0, 3]))
    thirds = np.repeat([1.0, 0.0, -1.0], [n // 3, n // 3, n - 2 * (n // 3)])
    frame = np.column_stack([np.ones(n) / np.sqrt(n), joint, x, y_two])
    u = thirds - frame @ (frame.T @ thirds)
    u = _unit(u)
    theta = np.radians(angle)
    y_three = np.cos(theta) * x + np.sin(theta) * u
    return {"joint": joint, "x": x, "y_three": y_three, "y_two": y_two}


def _rows(d: int, start: int, stop: int) -> np.ndarray:
    v = np.zeros(d)
    v[start:stop] = 1.0
    return _unit(v)


def make_toy(config: ToyConfig | None = None, seed=None) -> tuple[MultiBlockDataset, GroundTruth]:
    """Generate the toy blocks X (100 x 100) and Y (10000 x 100) with ground truth."""
    cfg = config or ToyConfig()
    rng = as_rng(seed)
    n, dx, dy = cfg.n, cfg.x_features, cfg.y_features
    sc = toy_scores(n, cfg.individual_angle)

    x_joint = cfg.x_joint * np.outer(_rows(dx, 0, dx // 2), sc["joint"])
    x_ind = cfg.x_individual * np.outer(_rows(dx, dx // 2, dx), sc["x"])
    y_joint = cfg.y_joint * np.outer(_rows(dy, dy - cfg.y_joint_rows, dy), sc["joint"])
    y_ind = cfg.y_individual_three_group * np.outer(_rows(dy, 0, dy // 2), sc["y_three"]) + (
        cfg.y_individual_two_group * np.outer(_rows(dy, dy // 2, dy), sc["y_two"])
    )
    ex = cfg.x_noise * rng.standard_normal((dx, n))
    ey = cfg.y_noise * rng.standard_normal((dy, n))

    truth = GroundTruth(
        (
            BlockTruth("X", x_joint, x_ind, ex, 1, 1),
            BlockTruth("Y", y_joint, y_ind, ey, 1, 2),
        ),
        Subspace(sc["joint"][:, None]),
        (Subspace(sc["x"][:, None]), Subspace(np.column_stack([sc["y_three"], sc["y_two"]]))),
    )
    dataset = MultiBlockDataset(
        (DataBlock("X", x_joint + x_ind + ex), DataBlock("Y", y_joint + y_ind + ey))
    )
    return dataset, truth


def _random_loadings(rng, d: int, r: int) -> np.ndarray:
    if r == 0:
        return np.zeros((d, 0))
    q, _ = np.linalg.qr(rng.standard_normal((d, r)))
    return q


def random_model(
    seed=None,
    n_blocks: int | None = None,
    n: int | None = None,
    dims: Sequence[int] | None = None,
    joint_rank: int | None = None,
    individual_ranks: Sequence[int] | None = None,
    noise: float | Sequence[float] = 0.0,
    tilt: float | None = None,
    amplitude_range: tuple[float, float] = (1.0, 10.0),
) -> tuple[MultiBlockDataset, GroundTruth]:
    """Random dataset following the joint/individual model.

    Unspecified sizes are drawn at random. Individual score spaces come from
    disjoint pieces of an orthonormal frame in the complement of the joint
    space; the first individual direction of every block is tilted by
    ``tilt`` radians toward one shared direction, so each pair of individual
    spaces meets at arccos(sin(tilt)^2) and the spaces still have trivial
    intersection. Signal loadings are random orthonormal per block, and
    amplitudes are log-uniform over ``amplitude_range``.
    """
    rng = as_rng(seed)
    k = n_blocks or int(rng.integers(2, 5))
    rj = int(rng.integers(0, 3)) if joint_rank is None else joint_rank
    ri = list(individual_ranks) if individual_ranks is not None else [int(rng.integers(1, 4)) for _ in range(k)]
    needed = rj + sum(ri) + 1
    n = n or int(rng.integers(max(needed + 5, 20), max(needed + 5, 20) + 40))
    if n < needed:
        raise ValueError(f"n={n} too small for the requested ranks (need {needed})")
    # at least twice the signal rank so the block leaves room for orthogonal Wedin draws
    dims = list(dims) if dims is not None else [int(rng.integers(2 * (rj + r) + 2, 2 * (rj + r) + 60)) for r in ri]
    tilt = float(rng.uniform(0.0, np.radians(25))) if tilt is None else tilt
    noise = [float(noise)] * k if np.isscalar(noise) else list(noise)

    frame, _ = np.linalg.qr(rng.standard_normal((n, needed)))
    vj = frame[:, :rj]
    shared = frame[:, -1]
    ind_spaces, pos = [], rj
    for r in ri:
        b = frame[:, pos : pos + r].copy()
        pos += r
        if r:
            b[:, 0] = np.cos(tilt) * b[:, 0] + np.sin(tilt) * shared
        ind_spaces.append(b)

    lo, hi = np.log(amplitude_range[0]), np.log(amplitude_range[1])
    blocks, truths = [], []
    for i, (d, r, sd) in enumerate(zip(dims, ri, noise)):
        name = f"block{i + 1}"
        lj = _random_loadings(rng, d, rj)
        li = _random_loadings(rng, d, r)
        # random rotations keep row(J_k) = row(J) without aligning the SVD with the frame
        jmat = lj @ (np.exp(rng.uniform(lo, hi, rj))[:, None] * _random_loadings(rng, rj, rj)) @ vj.T
        imat = li @ (np.exp(rng.uniform(lo, hi, r))[:, None] * _random_loadings(rng, r, r)) @ ind_spaces[i].T
        e = sd * rng.standard_normal((d, n))
        truths.append(BlockTruth(name, jmat, imat, e, rj, r))
        blocks.append(DataBlock(name, jmat + imat + e))
    truth = GroundTruth(tuple(truths), Subspace(vj), tuple(Subspace(b) for b in ind_spaces))
    return MultiBlockDataset(tuple(blocks)), truth
