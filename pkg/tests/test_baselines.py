import numpy as np
import pytest

from ajive.blocks import DataBlock, MultiBlockDataset, center_rows
from ajive.linalg import principal_angles
from ajive.synth import baseline_concat_svd, baseline_pls
from oracles import covariance_grid_search


def _centered(ds):
    return MultiBlockDataset(tuple(center_rows(b) for b in ds.blocks))


def _pair(seed, dx=3, dy=3, n=12):
    rng = np.random.default_rng(seed)
    return _centered(MultiBlockDataset((DataBlock("x", rng.standard_normal((dx, n))), DataBlock("y", rng.standard_normal((dy, n))))))


def test_concat_splits_back_per_block(toy):
    ds, truth = toy
    res = baseline_concat_svd(ds, 2)
    assert res["X"].shape == (100, 100) and res["Y"].shape == (10000, 100)
    assert res.svd.rank == 2
    # the concatenation is dominated by X, so almost none of Y's individual signal survives
    pj = truth.joint_space.projector()
    iy = truth["Y"].individual
    err = np.linalg.norm(res["Y"] - res["Y"] @ pj - iy) / np.linalg.norm(iy)
    assert err > 0.9


def test_concat_full_rank_reproduces_blocks():
    ds = _pair(0, 4, 5, 9)
    res = baseline_concat_svd(ds, 8)
    for b in ds.blocks:
        assert np.linalg.norm(res[b.name] - b.values) <= 1e-8 * np.linalg.norm(b.values)
    with pytest.raises(ValueError):
        baseline_concat_svd(ds, 0)
    with pytest.raises(ValueError, match="exceeds"):
        baseline_concat_svd(ds, 10)


def test_pls_identical_blocks_find_top_singular_vector():
    ds = _pair(1, 4, 4, 15)
    x = ds.blocks[0]
    same = MultiBlockDataset((x, DataBlock("copy", x.values)))
    res = baseline_pls(same, 1)
    u, s, _ = np.linalg.svd(x.values)
    assert abs(abs(res.weights[0][:, 0] @ u[:, 0]) - 1) < 1e-8
    assert res.covariances[0] == pytest.approx(s[0] ** 2, rel=1e-10)


@pytest.mark.parametrize("seed", range(4))
def test_pls_first_pair_matches_grid_search(seed):
    ds = _pair(seed)
    res = baseline_pls(ds, 1)
    a, b = res.weights[0][:, 0], res.weights[1][:, 0]
    x, y = ds.blocks[0].values, ds.blocks[1].values
    _, _, grid = covariance_grid_search(x, y)
    assert a @ x @ y.T @ b == pytest.approx(res.covariances[0], rel=1e-10)
    assert grid <= res.covariances[0] * (1 + 1e-12)
    assert grid >= res.covariances[0] * (1 - 1e-2)


def test_pls_deflation_orthogonality_and_approximations():
    ds = _pair(2, 5, 6, 20)
    res = baseline_pls(ds, 3)
    assert res.n_components == 3
    for k in range(2):
        s = res.scores[k]
        gram = s @ s.T
        assert np.abs(gram - np.diag(np.diag(gram))).max() <= 1e-8 * np.abs(gram).max()
        w = res.weights[k]
        assert np.allclose(np.linalg.norm(w, axis=0), 1.0)
        assert np.allclose(np.linalg.norm(res.score_directions(k), axis=0), 1.0)
    assert np.all(np.diff(res.covariances) <= 1e-10)
    x = ds.blocks[0].values
    approx = res.approximations["x"]
    assert np.linalg.matrix_rank(approx, tol=1e-9) == 3
    # projecting on the score span leaves a residual orthogonal to it
    q = np.linalg.qr(res.scores[0].T)[0]
    assert np.abs((x - approx) @ q).max() <= 1e-10


def test_pls_zero_covariance():
    e = np.eye(6)
    x = np.vstack([e[0] - e[1], e[2] - e[3]])
    y = np.vstack([e[4] - e[5], e[4] - e[5]])
    y = y - y.mean(axis=1, keepdims=True)
    x = x - x.mean(axis=1, keepdims=True)
    # x rows are orthogonal to y rows after centering
    assert np.abs(x @ y.T).max() < 1e-12
    res = baseline_pls(MultiBlockDataset((DataBlock("x", x), DataBlock("y", y))), 1)
    assert res.covariances[0] == 0.0


def test_pls_errors(toy):
    ds, _ = toy
    with pytest.raises(ValueError, match="row-centered"):
        baseline_pls(ds, 1)
    ds3 = MultiBlockDataset(tuple(_pair(0).blocks) + (DataBlock("z", np.zeros((2, 12))),))
    with pytest.raises(ValueError, match="exactly 2"):
        baseline_pls(ds3, 1)
    with pytest.raises(ValueError, match="n_components"):
        baseline_pls(_pair(0), 4)


def test_pls_direction_is_farther_than_ajive_on_toy(toy):
    from ajive.pipeline import ajive

    ds, truth = toy
    res = ajive(ds, (2, 3), seed=0)
    cns = principal_angles(res.joint_basis, truth.joint_space)[0]
    pls = baseline_pls(_centered(ds), 1)
    pls_angle = principal_angles(pls.score_directions(0)[:, :1], truth.joint_space)[0]
    assert pls_angle > cns
