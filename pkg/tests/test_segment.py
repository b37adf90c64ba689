import json

import numpy as np
import pytest

from ajive.blocks import DataBlock, MultiBlockDataset
from ajive.bounds import BoundDistribution, BoundKind, random_direction_angle
from ajive.linalg import random_orthonormal
from ajive.pipeline import diagnose, extract_all
from ajive.segment import (
    Verdict,
    angles_from_stack,
    run_step2,
    segment_joint,
    simulate_step2,
    stack_scores,
)
from oracles import angles_deg, principal_vectors


class _Est:
    """Minimal stand-in carrying only what stack_scores reads."""

    def __init__(self, scores, name="b"):
        self.scores = scores
        self.rank = scores.shape[1]
        self.shape = (5, scores.shape[0])
        self.block_name = name


def _two_block(seed, n=20, r1=3, r2=2):
    rng = np.random.default_rng(seed)
    return [_Est(random_orthonormal(n, r1, rng=rng).basis), _Est(random_orthonormal(n, r2, rng=rng).basis)]


def test_stack_examples():
    v = random_orthonormal(10, 3, rng=0).basis
    assert np.allclose(stack_scores([_Est(v), _Est(v)]).svd.singular_values[:3], np.sqrt(2))
    e = np.eye(10)
    s = stack_scores([_Est(e[:, :2]), _Est(e[:, 2:5])]).svd.singular_values
    assert np.allclose(s, 1.0)
    u = e[:, :1]
    assert stack_scores([_Est(u), _Est(u), _Est(u)]).svd.singular_values[0] == pytest.approx(np.sqrt(3))


def test_stack_errors():
    with pytest.raises(ValueError):
        stack_scores([_Est(np.eye(4)[:, :1])])
    with pytest.raises(ValueError, match="disagree"):
        stack_scores([_Est(np.eye(4)[:, :1]), _Est(np.eye(5)[:, :1])])
    with pytest.raises(ValueError, match="empty"):
        stack_scores([_Est(np.eye(4)[:, :1]), _Est(np.zeros((4, 0)))])


def test_angle_examples():
    e = np.eye(4)
    assert angles_from_stack(stack_scores([_Est(e[:, :1]), _Est(e[:, :1])]))[0] == pytest.approx(0, abs=1e-6)
    assert angles_from_stack(stack_scores([_Est(e[:, :1]), _Est(e[:, 1:2])]))[0] == pytest.approx(90)
    tilted = (e[:, 0] + e[:, 1])[:, None] / np.sqrt(2)
    assert angles_from_stack(stack_scores([_Est(e[:, :1]), _Est(tilted)]))[0] == pytest.approx(45)
    with pytest.raises(ValueError):
        angles_from_stack(stack_scores([_Est(e[:, :1])] * 3))


@pytest.mark.parametrize("seed", range(10))
def test_stack_invariants(seed):
    ests = _two_block(seed) + [_Est(random_orthonormal(20, 4, rng=seed + 100).basis)]
    st = stack_scores(ests)
    s = st.svd.singular_values
    assert s.max() <= np.sqrt(3) + 1e-10 and s.min() >= -1e-10
    assert st.matrix.shape == (9, 20)
    two = stack_scores(ests[:2])
    ang = angles_from_stack(two)
    assert np.all(np.diff(ang) >= -1e-10)
    assert np.allclose(ang, angles_deg(ests[0].scores, ests[1].scores), atol=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_flag_mean_identity(seed):
    ests = _two_block(seed, n=15, r1=3, r2=3)
    st = stack_scores(ests)
    p, q, c = principal_vectors(ests[0].scores, ests[1].scores)
    sig = st.svd.singular_values
    for i in range(3):
        v = (p[:, i] + q[:, i]) / (np.sqrt(2) * sig[i])
        w = st.svd.right[:, i]
        assert min(np.abs(v - w).max(), np.abs(v + w).max()) <= 1e-8


def _dist(kind, values, n, ranks):
    v = np.asarray(values, float)
    return BoundDistribution(kind, v, v.size, 0, {"n": n, "ranks": ranks})


def test_segment_rules_and_ties():
    e = np.eye(10)
    tilt = lambda deg: np.cos(np.radians(deg)) * e[:, :1] + np.sin(np.radians(deg)) * e[:, 5:6]
    ests = [_Est(np.column_stack([e[:, 0], e[:, 1]])), _Est(np.column_stack([tilt(10)[:, 0], np.cos(np.radians(60)) * e[:, 1] + np.sin(np.radians(60)) * e[:, 6]]))]
    ang = angles_from_stack(stack_scores(ests))
    assert np.allclose(ang, [10, 60])
    # wedin 30, random 50: first joint, second noise
    w = _dist(BoundKind.WEDIN_JOINT_ANGLE, [30.0] * 5, 10, [2, 2])
    r = _dist(BoundKind.RANDOM_ANGLE, [50.0] * 5, 10, [2, 2])
    diag, joint = segment_joint(ests, w, r)
    assert diag.verdicts == [Verdict.JOINT, Verdict.NOISE] and joint.rank == 1
    assert not diag.wedin_uninformative
    # wedin 5: first now individual_correlated
    w = _dist(BoundKind.WEDIN_JOINT_ANGLE, [5.0] * 5, 10, [2, 2])
    diag, joint = segment_joint(ests, w, r)
    assert diag.verdicts[0] is Verdict.INDIVIDUAL_CORRELATED and joint.rank == 0
    # wedin weaker than random: flagged
    w = _dist(BoundKind.WEDIN_JOINT_ANGLE, [70.0] * 5, 10, [2, 2])
    diag, _ = segment_joint(ests, w, r)
    assert diag.wedin_uninformative and diag.joint_rank_candidate == 1
    # a tie at the cutoff is not joint
    w = _dist(BoundKind.WEDIN_JOINT_ANGLE, [ang[0]] * 5, 10, [2, 2])
    diag, _ = segment_joint(ests, w, r)
    assert diag.verdicts[0] is Verdict.INDIVIDUAL_CORRELATED


def test_segment_parameter_checks():
    ests = _two_block(0)
    w = _dist(BoundKind.WEDIN_JOINT_ANGLE, [30.0], 21, [3, 2])
    r = _dist(BoundKind.RANDOM_ANGLE, [50.0], 20, [3, 2])
    with pytest.raises(ValueError, match="n=21"):
        segment_joint(ests, w, r)
    w = _dist(BoundKind.WEDIN_JOINT_ANGLE, [30.0], 20, [2, 2])
    with pytest.raises(ValueError, match="ranks"):
        segment_joint(ests, w, r)
    w = _dist(BoundKind.WEDIN_JOINT_SSV, [1.0], 20, [3, 2])
    with pytest.raises(ValueError, match="incompatible"):
        segment_joint(ests, w, r)


def test_multiblock_rule_uses_ssv():
    rng = np.random.default_rng(1)
    shared = random_orthonormal(30, 1, rng=rng).basis
    ests = []
    for k in range(3):
        other = random_orthonormal(30, 1, orthogonal_to=shared, rng=rng).basis
        ests.append(_Est(np.column_stack([shared[:, 0], other[:, 0]]), f"b{k}"))
    w = _dist(BoundKind.WEDIN_JOINT_SSV, [2.5] * 4, 30, [2, 2, 2])
    r = _dist(BoundKind.RANDOM_SSV, [1.5] * 4, 30, [2, 2, 2])
    diag, joint = segment_joint(ests, w, r)
    assert diag.view == "ssv" and diag.principal_angles_deg is None
    assert diag.joint_rank_candidate == 1
    assert abs(abs(joint.basis[:, 0] @ shared[:, 0]) - 1) < 1e-10


def _scaled(ds, factor):
    return MultiBlockDataset(tuple(DataBlock(b.name, b.values * factor) for b in ds.blocks))


def test_power_of_two_scaling_is_bitwise(toy):
    ds, _ = toy
    a = diagnose(ds, (2, 3), 200, seed=1)
    b = diagnose(_scaled(ds, 2.0**13), (2, 3), 200, seed=1)
    assert np.array_equal(a.squared_singular_values, b.squared_singular_values)
    assert a.verdicts == b.verdicts and a.wedin_cutoff == b.wedin_cutoff


def test_generic_scaling_is_stable(toy):
    ds, _ = toy
    a = diagnose(ds, (2, 3), 200, seed=1)
    b = diagnose(_scaled(ds, 1e4), (2, 3), 200, seed=1)
    assert np.allclose(a.squared_singular_values, b.squared_singular_values, rtol=0, atol=1e-12)
    assert a.verdicts == b.verdicts and a.joint_rank_candidate == b.joint_rank_candidate


def test_toy_rank_grid(toy, tmp_path):
    ds, _ = toy
    d23 = diagnose(ds, (2, 3), 1000, seed=0)
    assert d23.joint_rank_candidate == 1
    assert d23.verdicts[1] is Verdict.INDIVIDUAL_CORRELATED
    assert 40 < d23.principal_angles_deg[1] < 50
    d22 = diagnose(ds, (2, 2), 1000, seed=0)
    assert d22.joint_rank_candidate == 0
    assert d22.verdicts == [Verdict.INDIVIDUAL_CORRELATED] * 2
    d24 = diagnose(ds, (2, 4), 1000, seed=0)
    assert d24.wedin_uninformative
    d23.write_json(tmp_path / "d.json")
    data = json.loads((tmp_path / "d.json").read_text())
    assert data["joint_rank_candidate"] == 1 and data["verdicts"][0] == "joint"
    assert set(data) >= {"ssv", "angles_deg", "wedin_cutoff", "random_cutoff", "flags", "ssv_view"}


def test_step2_reproducible_and_views_agree(toy):
    ds, _ = toy
    ests = extract_all(ds, (2, 3))
    a, ja, da = run_step2(ests, 300, seed=4)
    b, jb, _ = run_step2(ests, 300, seed=4)
    assert a.to_dict() == b.to_dict() and np.array_equal(ja.basis, jb.basis)
    # the random-direction null depends only on (n, ranks) and its seed
    dists = simulate_step2(ests, 300, seed=4)
    assert np.array_equal(dists.random.samples, da.random.samples)
    assert set(a.ssv_view) >= {"wedin_cutoff", "random_cutoff"}
    assert a.ssv_view["wedin_percentile"] == 5.0 and a.ssv_view["random_percentile"] == 95.0
    # the ssv view reaches the same joint count on this data
    ssv = a.squared_singular_values[: min(a.ranks)]
    assert int(np.sum((ssv > a.ssv_view["wedin_cutoff"]) & (ssv > a.ssv_view["random_cutoff"]))) == a.joint_rank_candidate


def test_random_null_ignores_data_scale():
    a = random_direction_angle(100, 2, 3, 50, seed=3).samples
    b = random_direction_angle(100, 2, 3, 50, seed=3).samples
    assert np.array_equal(a, b)
