import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ajive.blocks import DataBlock
from ajive.extract import RankSpec, initial_extract, scree, write_scree
from ajive.linalg import orthonormal_check, principal_angles


def test_rank_spec_validation():
    with pytest.raises(ValueError):
        RankSpec()
    with pytest.raises(ValueError):
        RankSpec(rank=2, threshold=1.0)
    with pytest.raises(ValueError):
        RankSpec(rank=0)
    with pytest.raises(ValueError):
        RankSpec(threshold=-1.0)
    assert RankSpec.coerce(3) == RankSpec(rank=3)
    with pytest.raises(TypeError):
        RankSpec.coerce("3")


def test_scree_toy(toy):
    ds, _ = toy
    sx, sy = scree(ds["X"]), scree(ds["Y"])
    assert sx.size == 100 and sy.size == 100
    assert np.all(np.diff(sx) <= 0)
    assert sx[1] / sx[2] > 2
    assert sy[2] / sy[3] > 2
    assert np.array_equal(scree(np.zeros((3, 4))), np.zeros(3))


def test_midpoint_threshold():
    x = np.diag([10.0, 6.0, 2.0])
    est = initial_extract(DataBlock("a", x), 2)
    assert est.threshold == 4.0
    assert initial_extract(DataBlock("a", x), 3).threshold == 1.0  # next value taken as 0


def test_threshold_spec_counts_strictly():
    x = np.diag([10.0, 6.0, 2.0])
    assert initial_extract(DataBlock("a", x), RankSpec(threshold=6.0)).rank == 1
    assert initial_extract(DataBlock("a", x), RankSpec(threshold=5.9)).rank == 2


def test_toy_x_rank_two_captures_signal(toy):
    ds, truth = toy
    est = initial_extract(ds["X"], 2)
    signal = truth["X"].signal
    _, _, vt = np.linalg.svd(signal)
    assert est.rank == 2
    ang = principal_angles(vt[:2].T, est.scores)
    # the weak individual direction is deliberately noisy; the strong one is not
    assert ang[0] < 10 and ang[1] < 30


def test_noiseless_rank_one_recovery():
    x = np.outer([1.0, 2.0, 3.0], [1.0, -1.0, 0.5, 2.0])
    est = initial_extract(DataBlock("a", x), RankSpec(threshold=1.0))
    assert est.rank == 1
    assert np.linalg.norm(est.approximation() - x) <= 1e-10 * np.linalg.norm(x)


def test_rank_zero_is_a_warning_not_an_error():
    x = np.diag([3.0, 1.0])
    with pytest.warns(UserWarning, match="empty"):
        est = initial_extract(DataBlock("a", x), RankSpec(threshold=5.0))
    assert est.rank == 0 and np.array_equal(est.residual, x) and est.warnings


def test_rank_errors():
    with pytest.raises(ValueError, match="exceeds min"):
        initial_extract(DataBlock("a", np.eye(3)), 4)
    with pytest.raises(ValueError, match="numerical rank"):
        initial_extract(DataBlock("a", np.outer([1.0, 2.0], [1.0, 1.0, 1.0])), 2)
    with pytest.raises(ValueError, match="tied"):
        initial_extract(DataBlock("a", np.eye(3)), 1)


@given(st.integers(0, 2**31), st.integers(1, 4))
def test_estimate_invariants(seed, r):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((7, 6)) * rng.uniform(0.1, 100)
    est = initial_extract(DataBlock("a", x), r)
    s = est.all_singular_values
    assert est.rank == r
    assert np.all(s[:r] > est.threshold) and np.all(s[r:] <= est.threshold)
    assert np.linalg.norm(est.approximation() + est.residual - x) <= 4 * np.finfo(float).eps * np.linalg.norm(x) * 7
    assert orthonormal_check(est.scores)


@given(st.integers(0, 2**31), st.floats(0.1, 3), st.floats(0.1, 3))
def test_lower_threshold_never_lowers_rank(seed, t1, t2):
    x = np.random.default_rng(seed).standard_normal((6, 5))
    lo, hi = sorted((t1, t2))
    b = DataBlock("a", x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert initial_extract(b, RankSpec(threshold=lo)).rank >= initial_extract(b, RankSpec(threshold=hi)).rank


def test_write_scree(tmp_path):
    write_scree(tmp_path / "s.csv", [3.0, 1.5])
    assert (tmp_path / "s.csv").read_text() == "index,singular_value\n1,3.0\n2,1.5\n"
