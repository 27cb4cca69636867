import numpy as np
import pytest
from scipy import stats as sps

from tensor_rmt import (DimensionMismatchError, MultiViewParams, Tensor3,
                        ValidationError, cluster_tensor, cluster_unfold,
                        gaussianity_check, gen_multiview, outer3,
                        theory_accuracy)

from .oracles import normal_ks


def test_noiseless_clustering_is_exact(rng):
    n = 40
    labels = np.where(rng.standard_normal(n) >= 0, 1, -1).astype(np.int64)
    u = rng.standard_normal(12); u /= np.linalg.norm(u)
    w = rng.standard_normal(9); w /= np.linalg.norm(w)
    x = Tensor3(5.0 * outer3(u, labels / np.sqrt(n), w).data)
    for fn in (cluster_tensor, cluster_unfold):
        res = fn(x, labels=labels)
        assert res.accuracy == 1.0
        assert res.loss01 in (0.0, 1.0)  # sign ambiguity only


def test_label_sign_invariance(rng):
    mv = MultiViewParams.draw(25, 60, 12, mu_norm=2.0, h_norm=2.0, seed=1)
    s = gen_multiview(mv)
    res = cluster_tensor(s.X, labels=mv.labels)
    res_f = cluster_tensor(s.X, labels=-mv.labels)
    assert res.accuracy == res_f.accuracy
    assert res.accuracy > 0.8
    assert set(np.unique(res.labels_hat)) <= {-1, 1}


def test_single_view_matches_unfolding(rng):
    # with one view the tensor method and the unfolding baseline see the
    # same information; labels must agree exactly
    for seed in range(5):
        mv = MultiViewParams.draw(40, 80, 1, mu_norm=1.2, h_norm=2.0,
                                  seed=seed)
        s = gen_multiview(mv)
        a = cluster_tensor(s.X, labels=mv.labels)
        b = cluster_unfold(s.X, labels=mv.labels)
        agree = np.mean(a.labels_hat == b.labels_hat)
        assert agree in (0.0, 1.0)
        assert a.accuracy == b.accuracy


def test_no_ground_truth():
    mv = MultiViewParams.draw(10, 20, 6, mu_norm=1.0, h_norm=1.0, seed=0)
    s = gen_multiview(mv)
    res = cluster_unfold(s.X)
    assert res.accuracy is None and res.loss01 is None
    with pytest.raises(ValidationError):
        cluster_tensor(s.X.data)
    with pytest.raises(DimensionMismatchError):
        cluster_tensor(s.X, labels=np.ones(3))


def test_theory_accuracy_formula():
    th = theory_accuracy(150, 300, 60, mu_norm=2.5, h_norm=2.0)
    assert th.branch == "outside-support"
    expected = sps.norm.cdf(th.alpha / np.sqrt(1.0 - th.alpha ** 2))
    assert th.accuracy == pytest.approx(expected, abs=1e-12)
    assert 0.5 < th.accuracy <= 1.0
    # no class separation: alignment zero, coin-flip accuracy
    th0 = theory_accuracy(150, 300, 60, mu_norm=0.0, h_norm=2.0)
    assert th0.alpha == 0.0
    assert th0.accuracy == 0.5
    with pytest.raises(ValidationError):
        theory_accuracy(150, 300, 60, mu_norm=-1.0, h_norm=2.0)


def test_theory_accuracy_monotone_in_separation():
    accs = [theory_accuracy(150, 300, 60, mu_norm=b, h_norm=2.5).accuracy
            for b in (1.5, 2.0, 2.5, 3.0)]
    assert all(b >= a - 1e-9 for a, b in zip(accs, accs[1:]))


def test_gaussianity_self_test(rng):
    # synthetic data built exactly from the limit description must pass
    n = 4000
    alpha = 0.8
    y = np.where(rng.standard_normal(n) >= 0, 1.0, -1.0)
    resid = rng.standard_normal(n)
    y_hat = (alpha * y + np.sqrt(1 - alpha ** 2) * resid) / np.sqrt(n)
    rep = gaussianity_check(y_hat, y, alpha)
    assert rep.passed
    assert abs(rep.variance - 1.0) < 0.1
    assert rep.qq_dist == pytest.approx(normal_ks(rep.residuals), abs=1e-12)
    assert rep.residuals.shape == (n,)
    # sign-flipped estimate gives the identical report
    rep_f = gaussianity_check(-y_hat, y, alpha)
    assert rep_f.mean == rep.mean and rep_f.qq_dist == rep.qq_dist


def test_gaussianity_negative_control(rng):
    n = 4000
    alpha = 0.8
    y = np.where(rng.standard_normal(n) >= 0, 1.0, -1.0)
    resid = rng.standard_normal(n) + 1.1  # shifted: must fail
    y_hat = (alpha * y + np.sqrt(1 - alpha ** 2) * resid) / np.sqrt(n)
    rep = gaussianity_check(y_hat, y, alpha)
    assert not rep.passed
    assert abs(rep.mean) > 3.0 / np.sqrt(n)


def test_gaussianity_validation(rng):
    y = np.ones(10)
    with pytest.raises(ValidationError):
        gaussianity_check(y / np.sqrt(10), y, alpha=1.0)
    with pytest.raises(ValidationError):
        gaussianity_check(y / np.sqrt(10), y, alpha=0.0)
    with pytest.raises(DimensionMismatchError):
        gaussianity_check(np.ones(9), y, alpha=0.5)
