import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from coupled_gue import KernelParams, solve
from coupled_gue.montecarlo import estimate_joint, sample_pair


def test_seed_reproducibility():
    a = estimate_joint(2, 0.5, 0.5, 0.5, 20_000, seed=7)
    b = estimate_joint(2, 0.5, 0.5, 0.5, 20_000, seed=7)
    assert a.p_hat == b.p_hat
    assert a.stderr == b.stderr
    c = estimate_joint(2, 0.5, 0.5, 0.5, 20_000, seed=8)
    assert c.p_hat != a.p_hat


def test_estimate_fields():
    est = estimate_joint(1, 0.5, 0.0, 0.0, 50_000, seed=3)
    assert 0.0 <= est.p_hat <= 1.0
    assert est.stderr == pytest.approx(
        math.sqrt(est.p_hat * (1 - est.p_hat) / est.n_samples), abs=1e-15
    )
    assert est.n_samples == 50_000


def test_n1_symmetry_and_orthant():
    est = estimate_joint(1, 0.5, 0.0, 12.0, 100_000, seed=11)
    assert abs(est.p_hat - 0.5) <= 4 * est.stderr
    est = estimate_joint(1, 0.5, 0.0, 0.0, 1_000_000, seed=12)
    assert abs(est.p_hat - 1.0 / 3.0) <= 4 * est.stderr


def test_n1_correlation():
    rng = np.random.default_rng(21)
    l1, l2 = sample_pair(1, 0.5, rng, size=200_000)
    corr = np.corrcoef(l1, l2)[0, 1]
    assert corr == pytest.approx(0.5, abs=0.01)


def test_strong_coupling_coincidence():
    c = 1.0 - 1e-6
    rng = np.random.default_rng(5)
    l1, l2 = sample_pair(4, c, rng, size=2_000)
    spread = math.sqrt(1.0 - c * c)
    assert np.max(np.abs(l1 - l2)) <= 20.0 * spread


def test_n1_joint_cdf_matches_bivariate_normal():
    n_samp = 200_000
    rng = np.random.default_rng(31)
    l1, l2 = sample_pair(1, 0.6, rng, size=n_samp)
    cov = [[0.5, 0.3], [0.3, 0.5]]
    mvn = multivariate_normal(mean=[0.0, 0.0], cov=cov)
    for x in (-0.5, 0.0, 0.7):
        for y in (-0.3, 0.2, 1.0):
            emp = np.mean((l1 <= x) & (l2 <= y))
            assert abs(emp - mvn.cdf([x, y])) <= 5.0 / math.sqrt(n_samp)


def test_cross_validation_against_fredholm():
    n, c = 2, 0.5
    est = estimate_joint(n, c, 0.5, 0.5, 50_000, seed=99)
    p_num = solve(KernelParams(n, c, 0.5, 0.5), 64).prob
    assert abs(est.p_hat - p_num) <= 4 * est.stderr


def test_trivial_threshold():
    est = estimate_joint(2, 0.5, 12.0, 12.0, 5_000, seed=1)
    assert est.p_hat == 1.0


def test_input_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_pair(0, 0.5, rng)
    with pytest.raises(ValueError):
        sample_pair(2, 1.0, rng)
    with pytest.raises(ValueError):
        estimate_joint(2, 0.5, 0.0, 0.0, 999, seed=0)
