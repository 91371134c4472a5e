import math

import numpy as np
import pytest

from estimator.blocking import BlockMoments, block_second_moments, lower_median, partition
from estimator.contamination import DistributionSpec
from estimator.covariance_mom import (cov_error_bound, cov_membership_eps, cov_mom_estimate, cov_objective,
                                      empirical_covariance, frobenius_error, operator_error, pca_error_bound,
                                      psd_projection, robust_pca, sigma_weak_oracle, sym_eigendecomposition,
                                      top_projector)
from estimator.mean_mom import lm_mom_estimate
from estimator.model import Dataset, DirectionPool, RngStream, make_direction_pool
from util.exceptions import IllegalArgumentError

LINE = DirectionPool([[1.0]])


def gaussian_data(n, dim, seed, scale=1.0):
    return Dataset(scale * RngStream(seed).generator().standard_normal((n, dim)))


def test_objective_by_hand():
    moments = BlockMoments([[[1.0]], [[2.0]], [[3.0]]])
    assert cov_objective([[2.0]], moments, LINE) == 0.0
    assert cov_objective([[0.0]], moments, LINE) == 2.0


def test_membership_eps_checks_both_tails():
    moments = BlockMoments([[[0.0]], [[5.0]], [[10.0]]])
    assert cov_objective([[5.0]], moments, LINE) == 0.0
    assert cov_membership_eps([[5.0]], moments, LINE) == 5.0
    assert cov_membership_eps([[0.0]], moments, LINE) == 5.0
    identical = BlockMoments([[[2.0]], [[2.0]], [[2.0]]])
    assert cov_membership_eps([[2.0]], identical, LINE) == 0.0
    with pytest.raises(IllegalArgumentError):
        cov_membership_eps(np.eye(2), moments, make_direction_pool(2, 5, rng=RngStream(0)))


def test_cov_mom_records_membership_eps():
    data = gaussian_data(600, 2, 22)
    pool = make_direction_pool(2, 60, rng=RngStream(23))
    rng = RngStream(24)
    estimate = cov_mom_estimate(data, 12, pool, rng)
    moments = block_second_moments(data, partition(600, 12, rng))
    assert estimate.membership_eps == cov_membership_eps(estimate.matrix, moments, pool)
    residuals = np.abs(np.einsum('md,kde,me->km', pool.directions, moments.moments - estimate.matrix,
                                 pool.directions))
    covered = np.count_nonzero(residuals <= estimate.membership_eps + 1e-12, axis=0)
    assert np.all(covered >= 6)


def test_objective_identical_moments():
    x = np.array([1.0, -2.0])
    data = Dataset(np.tile(x, (12, 1)))
    moments = block_second_moments(data, partition(12, 4, RngStream(0)))
    pool = make_direction_pool(2, 10, rng=RngStream(1))
    assert cov_objective(np.outer(x, x), moments, pool) == pytest.approx(0.0, abs=1e-12)


def test_cov_mom_constant_rows():
    x = np.array([1.0, 2.0])
    data = Dataset(np.tile(x, (20, 1)))
    estimate = cov_mom_estimate(data, 5, make_direction_pool(2, 20, rng=RngStream(2)), RngStream(3))
    assert np.allclose(estimate.matrix, np.outer(x, x), atol=1e-9)
    assert estimate.achieved_eps <= 1e-9
    assert not estimate.centered


def test_cov_mom_one_dimension_is_scalar_mom():
    data = gaussian_data(301, 1, 4)
    rng = RngStream(5)
    estimate = cov_mom_estimate(data, 21, LINE, rng, psd_project=False)
    moments = block_second_moments(data, partition(301, 21, rng))
    assert estimate.matrix[0, 0] == lower_median(moments.moments[:, 0, 0])
    assert estimate.achieved_eps == 0.0


def test_cov_mom_certificate():
    data = gaussian_data(1000, 2, 6)
    pool = make_direction_pool(2, 100, rng=RngStream(7))
    rng = RngStream(8)
    estimate = cov_mom_estimate(data, 20, pool, rng)
    moments = block_second_moments(data, partition(1000, 20, rng))
    assert cov_objective(estimate.matrix, moments, pool) == pytest.approx(estimate.achieved_eps, abs=1e-9)
    assert np.min(np.linalg.eigvalsh(estimate.matrix)) >= -1e-12
    assert estimate.psd_projected
    assert cov_objective(estimate.raw_matrix, moments, pool) == pytest.approx(estimate.raw_eps, abs=1e-9)


def test_cov_mom_centering_uses_lm_mom():
    data = Dataset(gaussian_data(800, 2, 9).values + np.array([3.0, -1.0]))
    pool = make_direction_pool(2, 50, rng=RngStream(10))
    rng = RngStream(11)
    estimate = cov_mom_estimate(data, 16, pool, rng, center='mom_mean')
    assert estimate.centered
    assert np.array_equal(estimate.mean_used, lm_mom_estimate(data, 16, pool, rng).point)
    assert operator_error(estimate.matrix, np.eye(2)) < 0.5


def test_cov_mom_rejects_center_mode():
    with pytest.raises(IllegalArgumentError):
        cov_mom_estimate(gaussian_data(10, 1, 0), 2, LINE, RngStream(0), center='median')


@pytest.mark.parametrize("factor", [2.0, 0.5, 4.0])
def test_cov_mom_scale_equivariance(factor):
    data = gaussian_data(800, 3, 25)
    pool = make_direction_pool(3, 80, rng=RngStream(26))
    estimate = cov_mom_estimate(data, 16, pool, RngStream(27)).matrix
    scaled = cov_mom_estimate(Dataset(factor * data.values), 16, pool, RngStream(27)).matrix
    expected = factor ** 2 * estimate
    assert np.linalg.norm(scaled - expected) <= 1e-6 * np.linalg.norm(expected)


def test_psd_projection():
    projected, clipped = psd_projection(np.diag([2.0, -1.0]))
    assert np.allclose(projected, np.diag([2.0, 0.0]))
    assert clipped == pytest.approx(-1.0)


def test_psd_projection_moves_objective_by_clipped_eigenvalue():
    data = gaussian_data(400, 3, 28)
    pool = make_direction_pool(3, 50, rng=RngStream(29))
    moments = block_second_moments(data, partition(400, 10, RngStream(30)))
    generator = RngStream(31).generator()
    for _ in range(50):
        a = generator.standard_normal((3, 3))
        y = 0.5 * (a + a.T)
        projected, clipped = psd_projection(y)
        assert cov_objective(projected, moments, pool) <= cov_objective(y, moments, pool) + abs(clipped) + 1e-12


def test_bounds():
    assert cov_error_bound(math.sqrt(2.0), 50, 4000) == pytest.approx(1.2649, abs=1e-4)
    assert cov_error_bound(0.0, 50, 4000) == 0.0
    assert pca_error_bound(math.sqrt(2.0), 4.0, 50, 4000) == pytest.approx(1.2649 / 4.0, abs=1e-4)
    assert pca_error_bound(1.0, 0.0, 50, 4000) == math.inf


def test_sigma_weak_oracle():
    pool = make_direction_pool(2, 30, rng=RngStream(12))
    point_mass = DistributionSpec('point_mass', 2)
    assert sigma_weak_oracle(point_mass, np.zeros((2, 2)), pool, 10000, RngStream(13)) == 0.0
    isotropic = DistributionSpec('gaussian', 2)
    assert sigma_weak_oracle(isotropic, np.eye(2), pool, 40000, RngStream(14)) == pytest.approx(math.sqrt(2.0),
                                                                                                abs=0.1)
    stretched = DistributionSpec('gaussian', 2, scale=np.diag([4.0, 1.0]))
    value = sigma_weak_oracle(stretched, np.diag([4.0, 1.0]), pool, 40000, RngStream(15))
    assert value == pytest.approx(math.sqrt(32.0), rel=0.05)
    with pytest.raises(IllegalArgumentError):
        sigma_weak_oracle(isotropic, np.eye(2), pool, 9999, RngStream(16))


def test_sym_eigendecomposition():
    eigvals, _ = sym_eigendecomposition(np.eye(3))
    assert np.allclose(eigvals, [1.0, 1.0, 1.0])
    eigvals, eigvecs = sym_eigendecomposition(np.diag([1.0, 3.0]))
    assert np.allclose(eigvals, [3.0, 1.0])
    assert np.allclose(np.abs(eigvecs[:, 0]), [0.0, 1.0])


def test_sym_eigendecomposition_reconstructs_random_matrices():
    generator = RngStream(32).generator()
    for instance in range(50):
        dim = 1 + instance % 6
        a = generator.standard_normal((dim, dim)) * 10.0 ** generator.integers(-2, 3)
        a = 0.5 * (a + a.T)
        eigvals, eigvecs = sym_eigendecomposition(a)
        reconstructed = (eigvecs * eigvals) @ eigvecs.T
        assert np.linalg.norm(reconstructed - a) <= 1e-8 * (1.0 + np.linalg.norm(a))
        assert np.allclose(eigvecs.T @ eigvecs, np.eye(dim), rtol=0.0, atol=1e-10)
        assert np.all(np.diff(eigvals) <= 0.0)


def test_top_projector_is_idempotent():
    a = np.array([[4.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, 1.0]])
    _, eigvecs = sym_eigendecomposition(a)
    for k in (1, 2):
        projector = top_projector(eigvecs, k)
        assert np.allclose(projector @ projector, projector)
        assert np.allclose(projector, projector.T)
        assert np.trace(projector) == pytest.approx(k)


def test_robust_pca_rank_one_data():
    rows = [[2.0, 0.0] if i % 2 == 0 else [-2.0, 0.0] for i in range(40)]
    result = robust_pca(Dataset(rows), 4, 1, make_direction_pool(2, 20, rng=RngStream(17)), RngStream(18),
                        center='none')
    assert np.allclose(result.projector, np.diag([1.0, 0.0]), atol=1e-9)
    assert result.bound is None


def test_robust_pca_with_sigma_hint():
    data = Dataset(RngStream(19).generator().standard_normal((3000, 3)) * np.array([math.sqrt(5.0), 1.0, 1.0]))
    pool = make_direction_pool(3, 100, rng=RngStream(20))
    result = robust_pca(data, 30, 1, pool, RngStream(21), sigma_hint=math.sqrt(50.0))
    assert result.bound == pytest.approx(pca_error_bound(math.sqrt(50.0), result.gap, 30, 3000))
    assert result.gap_ok == (result.gap >= 16.0 * math.sqrt(50.0) * math.sqrt(30 / 3000))
    truth = np.diag([1.0, 0.0, 0.0])
    assert operator_error(result.projector, truth) < 0.5
    with pytest.raises(IllegalArgumentError):
        robust_pca(data, 30, 3, pool, RngStream(21))


def test_matrix_errors():
    a = np.array([[1.0, 2.0], [2.0, 5.0]])
    assert frobenius_error(a, a) == 0.0
    assert frobenius_error(np.eye(2), np.zeros((2, 2))) == pytest.approx(math.sqrt(2.0))
    assert operator_error(np.diag([1.0, -3.0]), np.zeros((2, 2))) == pytest.approx(3.0)
    with pytest.raises(IllegalArgumentError):
        operator_error(np.eye(2), np.eye(3))


def test_empirical_covariance():
    data = Dataset([[1.0, 0.0], [-1.0, 0.0], [3.0, 2.0], [1.0, 2.0]])
    centered = empirical_covariance(data)
    assert np.allclose(centered, np.cov(data.values.T, bias=True))
    raw = empirical_covariance(data, center=False)
    assert np.allclose(raw, data.values.T @ data.values / 4)
