"""Tests for the experiment sample generators."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm, skew

from sing.datagen import (
    gen_gaussian,
    gen_gaussian_grid,
    gen_modified_rademacher,
    gen_stochastic_volatility,
    grid_precision,
)
from sing.errors import NotPositiveDefiniteError
from sing.graphops import Graph


class TestModifiedRademacher:
    def test_shape_names_truth(self):
        ds = gen_modified_rademacher(5, 2000, seed=7)
        assert ds.data.shape == (2000, 10)
        assert ds.names[:4] == ("X1", "Y1", "X2", "Y2")
        assert ds.truth == Graph.from_edges(10, [(1, 2), (3, 4), (5, 6), (7, 8), (9, 10)])

    def test_pairs_uncorrelated_but_squares_correlated(self):
        n = 2000
        ds = gen_modified_rademacher(3, n, seed=1)
        for i in range(3):
            x = ds.data[:, 2 * i]
            y = ds.data[:, 2 * i + 1]
            assert abs(np.corrcoef(x, y)[0, 1]) < 4.0 / np.sqrt(n)
            assert np.corrcoef(x**2, y**2)[0, 1] > 0.2

    def test_marginals_symmetric(self):
        ds = gen_modified_rademacher(2, 10_000, seed=3)
        for col in range(4):
            assert abs(skew(ds.data[:, col])) < 0.1

    def test_bit_reproducible(self):
        a = gen_modified_rademacher(4, 500, seed=11)
        b = gen_modified_rademacher(4, 500, seed=11)
        np.testing.assert_array_equal(a.data, b.data)
        c = gen_modified_rademacher(4, 500, seed=12)
        assert not np.array_equal(a.data, c.data)


class TestStochasticVolatility:
    def test_shape_names_truth(self):
        ds = gen_stochastic_volatility(6, 100, seed=5)
        assert ds.data.shape == (100, 8)
        assert ds.names == ("mu", "phi", "Z1", "Z2", "Z3", "Z4", "Z5", "Z6")
        expected = {(1, 2)}
        expected |= {(1, t + 3) for t in range(6)}
        expected |= {(2, t + 3) for t in range(6)}
        expected |= {(t + 3, t + 4) for t in range(5)}
        assert ds.truth == Graph.from_edges(8, expected)
        assert ds.truth.n_edges == 3 * 6

    def test_phi_mean_matches_quadrature_oracle(self):
        n = 40_000
        ds = gen_stochastic_volatility(3, n, seed=9)
        phi = ds.data[:, 1]
        # oracle: E[2 e^z / (1 + e^z) - 1], z ~ N(3, 1), by numeric integration
        expected, _ = quad(
            lambda z: (2 * np.exp(z) / (1 + np.exp(z)) - 1) * norm.pdf(z, loc=3, scale=1),
            -10,
            16,
        )
        se = phi.std(ddof=1) / np.sqrt(n)
        assert abs(phi.mean() - expected) < 3 * se + 1e-4

    def test_phi_within_unit_interval(self):
        ds = gen_stochastic_volatility(4, 5000, seed=2)
        assert np.all(np.abs(ds.data[:, 1]) < 1.0)

    def test_diagnostic_mode_drops_phi_column(self):
        ds = gen_stochastic_volatility(4, 50, seed=2, phi_value=0.0)
        assert ds.data.shape == (50, 5)
        assert ds.names == ("mu", "Z1", "Z2", "Z3", "Z4")
        assert ds.truth == Graph.from_edges(5, [(1, 2), (1, 3), (1, 4), (1, 5)])

    def test_bit_reproducible(self):
        a = gen_stochastic_volatility(5, 300, seed=21)
        b = gen_stochastic_volatility(5, 300, seed=21)
        np.testing.assert_array_equal(a.data, b.data)


class TestGaussian:
    def test_identity_precision_independent_normals(self):
        ds = gen_gaussian(np.eye(3), 20_000, seed=4)
        assert ds.truth.n_edges == 0
        cov = np.cov(ds.data.T)
        np.testing.assert_allclose(cov, np.eye(3), atol=5.0 / np.sqrt(20_000))

    def test_sample_covariance_matches_inverse_precision(self):
        theta = np.array([[1.0, 0.4, 0.0], [0.4, 1.0, 0.4], [0.0, 0.4, 1.0]])
        n = 40_000
        ds = gen_gaussian(theta, n, seed=6)
        cov = np.cov(ds.data.T)
        np.testing.assert_allclose(cov, np.linalg.inv(theta), atol=5.0 / np.sqrt(n))
        assert ds.truth == Graph.from_edges(3, [(1, 2), (2, 3)])

    def test_non_spd_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            gen_gaussian(np.array([[1.0, 2.0], [2.0, 1.0]]), 10, seed=0)
        with pytest.raises(NotPositiveDefiniteError):
            gen_gaussian(np.array([[1.0, 0.5], [0.4, 1.0]]), 10, seed=0)

    def test_grid_dimensions_and_edges(self):
        theta = grid_precision(4)
        assert theta.shape == (16, 16)
        eigs = np.linalg.eigvalsh(theta)
        assert eigs[0] > 0
        ds = gen_gaussian_grid(4, 100, seed=8)
        assert ds.data.shape == (100, 16)
        assert ds.truth.n_edges == 24  # 2 * 4 * 3

    def test_bit_reproducible(self):
        a = gen_gaussian_grid(3, 200, seed=13)
        b = gen_gaussian_grid(3, 200, seed=13)
        np.testing.assert_array_equal(a.data, b.data)
