import math

import numpy as np
import pytest

from lrsrec.errors import ParameterError
from lrsrec.models import grad, loss
from lrsrec.synthetic import (
    gen_lowrank,
    gen_rpca,
    gen_sensing,
    gen_sparse,
    make_ground_truth,
)


class TestGenLowrank:
    def test_full_rank_at_min_dim(self):
        x, s1, sr, _ = gen_lowrank(5, 8, 5, seed=0)
        assert sr > 0
        assert np.linalg.matrix_rank(x) == 5

    def test_deterministic(self):
        a = gen_lowrank(10, 7, 2, seed=123)
        b = gen_lowrank(10, 7, 2, seed=123)
        assert np.array_equal(a[0], b[0])

    def test_rank_and_scales(self):
        x, s1, sr, alpha = gen_lowrank(20, 20, 3, seed=5)
        sv = np.linalg.svd(x, compute_uv=False)
        assert sv[3] / sv[0] <= 1e-10
        assert s1 == pytest.approx(sv[0])
        assert sr == pytest.approx(sv[2])

    def test_alpha_band_over_seeds(self):
        alphas = [gen_lowrank(50, 50, 3, seed=s)[3] for s in range(100)]
        assert all(1.0 <= a <= 30.0 for a in alphas)

    def test_rank_out_of_range(self):
        with pytest.raises(ParameterError):
            gen_lowrank(5, 5, 6, seed=0)


class TestGenSparse:
    def test_deterministic(self):
        a = gen_sparse(30, 30, 0.1, 2.0, seed=9)
        b = gen_sparse(30, 30, 0.1, 2.0, seed=9)
        assert np.array_equal(a, b)

    def test_tiny_beta_may_be_empty(self):
        s = gen_sparse(5, 5, 1e-6, 1.0, seed=3)
        assert np.count_nonzero(s) >= 0  # empty support is valid

    def test_density_band_and_caps(self):
        d, beta = 100, 0.1
        cap = math.ceil(1.5 * beta * d)
        for seed in range(50):
            s = gen_sparse(d, d, beta, 1.0, seed=seed)
            frac = np.count_nonzero(s) / (d * d)
            assert 0.08 <= frac <= 0.12
            assert np.count_nonzero(s, axis=1).max() <= cap
            assert np.count_nonzero(s, axis=0).max() <= cap

    def test_value_range(self):
        s = gen_sparse(50, 50, 0.2, 3.0, seed=1)
        assert np.abs(s).max() <= 3.0

    def test_beta_out_of_range(self):
        with pytest.raises(ParameterError):
            gen_sparse(5, 5, 0.0, 1.0, seed=0)


class TestGenSensing:
    def test_planted_consistency(self):
        truth = make_ground_truth(10, 10, 2, 0.1, 2.0, seed=4)
        model = gen_sensing(truth.x_star, truth.s_star, 25, 0.0, seed=5)
        total = truth.x_star + truth.s_star
        assert loss(model, total) == pytest.approx(0.0, abs=1e-22)
        assert np.allclose(grad(model, total), 0.0, atol=1e-12)

    def test_hand_inner_product(self):
        x = np.eye(2)
        s = np.zeros((2, 2))
        model = gen_sensing(x, s, 1, 0.0, seed=0)
        # y_1 = <A_1, I> with no noise
        assert model.measurements[0] == pytest.approx(np.trace(model.matrices[0]))

    def test_noise_variance(self):
        x = np.zeros((3, 3))
        model = gen_sensing(x, x, 1000, 1.0, seed=8)
        resid = model.measurements - model.apply(x)
        assert 0.85 <= resid.var() <= 1.15

    def test_param_errors(self):
        x = np.zeros((3, 3))
        with pytest.raises(ParameterError):
            gen_sensing(x, x, 0, 0.0, seed=0)
        with pytest.raises(ParameterError):
            gen_sensing(x, x, 5, -1.0, seed=0)


class TestGenRpca:
    def test_full_noiseless_exact(self):
        truth = make_ground_truth(12, 9, 2, 0.1, 2.0, seed=2)
        model = gen_rpca(truth.x_star, truth.s_star, 1.0, 0.0, seed=3)
        assert model.p == 1.0
        assert model.mask.all()
        assert np.array_equal(model.observed, truth.x_star + truth.s_star)

    def test_partial_fraction_band(self):
        x = np.zeros((100, 100))
        model = gen_rpca(x, x, 0.5, 0.0, seed=6)
        assert 0.45 <= model.mask.mean() <= 0.55
        assert model.p == pytest.approx(model.mask.mean())

    def test_noise_scale(self):
        d = 100
        x = np.zeros((d, d))
        model = gen_rpca(x, x, 1.0, 2.0, seed=7)
        # per-cell variance nu^2/(d1 d2) within 20%
        target = 4.0 / (d * d)
        assert abs(model.observed.var() - target) <= 0.2 * target

    def test_planted_consistency(self):
        truth = make_ground_truth(10, 10, 2, 0.1, 2.0, seed=4)
        model = gen_rpca(truth.x_star, truth.s_star, 0.7, 0.0, seed=5)
        total = truth.x_star + truth.s_star
        assert loss(model, total) == pytest.approx(0.0, abs=1e-22)
        assert np.allclose(grad(model, total), 0.0)

    def test_param_errors(self):
        x = np.zeros((3, 3))
        with pytest.raises(ParameterError):
            gen_rpca(x, x, 0.0, 0.0, seed=0)
        with pytest.raises(ParameterError):
            gen_rpca(x, x, 1.5, 0.0, seed=0)


class TestGroundTruth:
    def test_invariants(self):
        truth = make_ground_truth(40, 30, 3, 0.1, 3.0, seed=11)
        sv = np.linalg.svd(truth.x_star, compute_uv=False)
        assert sv[3] / sv[0] <= 1e-10
        assert truth.s_count == np.count_nonzero(truth.s_star)
        cap_row = math.ceil(1.5 * truth.beta * 30)
        cap_col = math.ceil(1.5 * truth.beta * 40)
        assert np.count_nonzero(truth.s_star, axis=1).max() <= cap_row
        assert np.count_nonzero(truth.s_star, axis=0).max() <= cap_col
        assert truth.sigma1 >= truth.sigma_r > 0
        assert truth.alpha_actual >= 1.0

    def test_determinism(self):
        a = make_ground_truth(20, 20, 2, 0.1, 2.0, seed=77)
        b = make_ground_truth(20, 20, 2, 0.1, 2.0, seed=77)
        assert np.array_equal(a.x_star, b.x_star)
        assert np.array_equal(a.s_star, b.s_star)
