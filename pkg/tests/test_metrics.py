import math

import numpy as np
import pytest

from ghtsparse import (
    Dictionary,
    DimensionMismatchError,
    build_gaussian_dictionary,
    matrix_support,
    psnr,
    rmse,
    support_mismatch_ratio,
)


class TestRmse:
    def test_exact_fit_is_zero(self):
        d = Dictionary(np.eye(4))
        z = np.random.default_rng(0).normal(size=(4, 6))
        assert rmse(d, z, z) == 0.0

    def test_formula_scaling(self):
        # D = I, Z = 0, ||Y||_F^2 = 4P  ->  rmse 2
        p = 7
        y = np.zeros((4, p))
        y[0, :] = 2.0
        assert rmse(Dictionary(np.eye(4)), np.zeros((4, p)), y) == pytest.approx(2.0)

    def test_naive_elementwise_oracle(self):
        rng = np.random.default_rng(1)
        d = build_gaussian_dictionary(5, 9, 0.1, 1)
        z = rng.normal(size=(9, 4))
        y = rng.normal(size=(5, 4))
        total = 0.0
        for i in range(5):
            for j in range(4):
                entry = -y[i, j]
                for k in range(9):
                    entry += d.data[i, k] * z[k, j]
                total += entry * entry
        assert abs(rmse(d, z, y) - math.sqrt(total / 4)) < 1e-12

    def test_zero_iff_exact(self):
        d = build_gaussian_dictionary(6, 10, 0.1, 2)
        z = np.random.default_rng(2).normal(size=(10, 3))
        y = d.data @ z
        assert rmse(d, z, y) < 1e-14
        y[0, 0] += 1e-6
        assert rmse(d, z, y) > 1e-8

    def test_dimension_mismatch(self):
        d = build_gaussian_dictionary(6, 10, 0.1, 3)
        with pytest.raises(DimensionMismatchError):
            rmse(d, np.zeros((9, 3)), np.zeros((6, 3)))


class TestPsnr:
    def test_identical_images(self):
        image = np.random.default_rng(3).uniform(0, 255, size=(16, 16))
        assert psnr(image, image) == math.inf

    def test_unit_mse_value(self):
        ref = np.zeros((10, 10))
        test = np.ones((10, 10))
        assert abs(psnr(ref, test) - 48.1308) < 1e-3

    def test_decreases_with_noise_level(self):
        rng = np.random.default_rng(4)
        ref = rng.uniform(50, 200, size=(64, 64))
        means = []
        for sigma in (5.0, 15.0):
            values = [
                psnr(ref, ref + np.random.default_rng(seed).normal(0, sigma, ref.shape))
                for seed in range(5)
            ]
            means.append(np.mean(values))
        assert means[0] > means[1]

    def test_validation(self):
        with pytest.raises(DimensionMismatchError):
            psnr(np.zeros((2, 2)), np.zeros((3, 2)))
        with pytest.raises(ValueError):
            psnr(np.zeros((2, 2)), np.zeros((2, 2)), peak=0.0)


class TestSupportMismatchRatio:
    def test_identical_supports(self):
        support = {(0, 1), (2, 3)}
        assert support_mismatch_ratio(support, set(support)) == 0.0

    def test_disjoint_equal_size(self):
        a = {(0, 0), (1, 1)}
        b = {(2, 2), (3, 3)}
        assert support_mismatch_ratio(a, b) == 1.0

    def test_partial_overlap_hand_value(self):
        a = {(0, 0), (1, 1), (2, 2), (3, 3)}
        b = {(0, 0), (1, 1), (2, 2), (9, 9)}
        assert support_mismatch_ratio(a, b) == pytest.approx((4 - 3) / 4)

    def test_empty_vs_empty(self):
        assert support_mismatch_ratio(set(), set()) == 0.0

    def test_empty_vs_nonempty(self):
        assert support_mismatch_ratio(set(), {(0, 0)}) == 1.0

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = {(int(r), int(c)) for r, c in rng.integers(0, 6, size=(rng.integers(0, 10), 2))}
            b = {(int(r), int(c)) for r, c in rng.integers(0, 6, size=(rng.integers(0, 10), 2))}
            forward = support_mismatch_ratio(a, b)
            assert forward == support_mismatch_ratio(b, a)
            assert 0.0 <= forward <= 1.0


class TestMatrixSupport:
    def test_positions(self):
        m = np.zeros((3, 4))
        m[0, 1] = 2.0
        m[2, 3] = -1.0
        assert matrix_support(m) == {(0, 1), (2, 3)}

    def test_empty(self):
        assert matrix_support(np.zeros((2, 2))) == set()
