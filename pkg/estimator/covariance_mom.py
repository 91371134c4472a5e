""" Median-of-means covariance estimation by trace duality, and robust PCA. """

import logging
import math

import numpy as np
import scipy.linalg

from estimator.blocking import partition, block_second_moments, lower_median_along
from estimator.contamination import sample_clean
from estimator.mean_mom import lm_mom_estimate
from estimator.model import as_sym_matrix, symmetrize
from util.exceptions import IllegalArgumentError

# get root logger
logger = logging.getLogger('robust-mom_logger')

CENTER_MODES = (None, 'none', 'mom_mean')
ORACLE_CHUNK = 4096


class CovEstimate(object):

    def __init__(self, matrix, achieved_eps, centered, mean_used, n_blocks, psd_projected=False,
                 raw_matrix=None, raw_eps=None, iterations=0, membership_eps=None):
        self.matrix = matrix
        self.achieved_eps = achieved_eps
        self.centered = centered
        self.mean_used = mean_used
        self.n_blocks = n_blocks
        self.psd_projected = psd_projected
        # optimizer output before the PSD projection
        self.raw_matrix = matrix if raw_matrix is None else raw_matrix
        self.raw_eps = achieved_eps if raw_eps is None else raw_eps
        self.iterations = iterations
        # two-sided radius, see cov_membership_eps
        self.membership_eps = membership_eps


class PcaResult(object):

    def __init__(self, projector, eigvals, k, gap, bound=None, gap_ok=None, covariance=None):
        self.projector = projector
        self.eigvals = eigvals
        self.k = k
        self.gap = gap
        self.bound = bound
        self.gap_ok = gap_ok
        self.covariance = covariance


def _quadratic_forms(matrices, directions):
    """ u^T A u for every matrix (leading axis) and direction. """
    return np.einsum('md,...de,me->...m', directions, matrices, directions)


def _median_quadratic_forms(moments, pool):
    if pool.size < 1:
        raise IllegalArgumentError("Empty direction pool.")
    if moments.dim != pool.dim:
        raise IllegalArgumentError("Dimension mismatch between block moments and direction pool.")
    # lower median of (q_k - c) is lower median of q_k minus c
    return lower_median_along(_quadratic_forms(moments.moments, pool.directions), axis=0)


def _max_residual(y, medians, pool):
    return float(np.max(np.abs(medians - _quadratic_forms(y, pool.directions))))


def cov_objective(y, moments, pool):
    """
    Smallest eps with Y in every set {Y: |[M_k - Y, u u^T]| <= eps for more than K/2 blocks} of the pool.
    :return: max over u of |lower_median_k(u^T M_k u - u^T Y u)|.
    """
    y = as_sym_matrix(y, moments.dim)
    return _max_residual(y, _median_quadratic_forms(moments, pool), pool)


def cov_membership_eps(y, moments, pool):
    """
    Smallest eps such that |u^T M_k u - u^T Y u| <= eps holds on at least half of the blocks, for every u in
    the pool. Checks both tails, which the signed median of cov_objective does not.
    :return: max over u of lower_median_k |u^T M_k u - u^T Y u|.
    """
    y = as_sym_matrix(y, moments.dim)
    if pool.size < 1:
        raise IllegalArgumentError("Empty direction pool.")
    if moments.dim != pool.dim:
        raise IllegalArgumentError("Dimension mismatch between block moments and direction pool.")
    residuals = _quadratic_forms(moments.moments, pool.directions) - _quadratic_forms(y, pool.directions)
    return float(np.max(lower_median_along(np.abs(residuals), axis=0)))


def psd_projection(a):
    """ Clip negative eigenvalues at zero. """
    eigvals, eigvecs = scipy.linalg.eigh(a)
    return symmetrize((eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.T), float(min(0.0, eigvals[0]))


def cov_mom_estimate(data, n_blocks, pool, rng, center=None, psd_project=True, max_iters=500, tol=1e-8,
                     step_decay=0.5):
    """
    Covariance (second moment) estimate in the intersection of the median sets over u u^T, u in the pool.
    :param data: Dataset.
    :param n_blocks: Number of blocks K.
    :param pool: DirectionPool.
    :param rng: RngStream for the partition (shared with the mean estimate when centering).
    :param center: None (raw second moments) or 'mom_mean' (subtract lm_mom_estimate first).
    :param psd_project: Clip negative eigenvalues after optimization.
    :param max_iters: Iteration limit.
    :param tol: Stop once objective or step fall below tol.
    :return: The CovEstimate.
    """
    if center not in CENTER_MODES:
        raise IllegalArgumentError("Unknown center mode: " + str(center))

    mean_used = None
    if center == 'mom_mean':
        mean_used = lm_mom_estimate(data, n_blocks, pool, rng).point

    moments = block_second_moments(data, partition(data.n_samples, n_blocks, rng), mean_used)
    medians = _median_quadratic_forms(moments, pool)
    directions = pool.directions

    best_y = lower_median_along(moments.moments, axis=0)
    best = _max_residual(best_y, medians, pool)
    step = best
    iterations = 0

    while iterations < max_iters and best > tol and step > tol:
        iterations += 1
        residuals = medians - _quadratic_forms(best_y, directions)
        worst = int(np.argmax(np.abs(residuals)))
        u = directions[worst]
        candidate = best_y + step * np.sign(residuals[worst]) * np.outer(u, u)
        value = _max_residual(candidate, medians, pool)
        if value < best:
            best_y, best = candidate, value
        else:
            step *= step_decay

    estimate = CovEstimate(best_y, best, mean_used is not None, mean_used, n_blocks, iterations=iterations)
    if psd_project:
        projected, clipped = psd_projection(best_y)
        estimate.matrix = projected
        estimate.achieved_eps = _max_residual(projected, medians, pool)
        estimate.psd_projected = True
        if clipped < 0.0:
            logger.debug("PSD projection clipped eigenvalue " + str(clipped) + ".")

    estimate.membership_eps = cov_membership_eps(estimate.matrix, moments, pool)

    logger.debug("cov_mom_estimate: K=" + str(n_blocks) + ", iterations=" + str(iterations) + ", achieved_eps="
                 + str(estimate.achieved_eps) + ", membership_eps="
                 + str(estimate.membership_eps) + ".")
    return estimate


def cov_error_bound(sigma, n_blocks, n_samples):
    """ 8 sigma sqrt(K/N). """
    if sigma < 0 or n_blocks < 1 or n_samples < 1:
        raise IllegalArgumentError("Covariance bound needs sigma >= 0 and positive K, N.")
    return 8.0 * sigma * math.sqrt(n_blocks / n_samples)


def pca_error_bound(sigma, gap, n_blocks, n_samples):
    """ (8/gap) sigma sqrt(K/N), infinite without a gap. """
    if gap <= 0:
        return math.inf
    return 8.0 / gap * sigma * math.sqrt(n_blocks / n_samples)


def sigma_weak_oracle(sampler, true_second_moment, pool, n_mc, rng):
    """
    Monte Carlo value of sigma = sup_u E(u^T S u - (u^T Y)^2)^2)^(1/2) over the pool.
    :param sampler: DistributionSpec of Y (finite fourth moments).
    :param true_second_moment: Matrix S the estimator targets.
    :param pool: DirectionPool.
    :param n_mc: Number of draws (>= 10^4).
    :param rng: RngStream.
    :return: sigma.
    """
    if n_mc < 10000:
        raise IllegalArgumentError("sigma oracle needs at least 10^4 draws, got " + str(n_mc) + ".")
    if not sampler.has_finite_fourth_moment():
        logger.warning("sigma oracle used on a law without finite fourth moment; the value is not reliable.")
    true_second_moment = as_sym_matrix(true_second_moment, pool.dim)
    targets = _quadratic_forms(true_second_moment, pool.directions)
    draws = sample_clean(sampler, n_mc, rng).values
    squares = np.zeros(pool.size)
    for start in range(0, n_mc, ORACLE_CHUNK):
        projections = draws[start:start + ORACLE_CHUNK] @ pool.directions.T
        squares += np.sum((targets - projections ** 2) ** 2, axis=0)
    sigma = math.sqrt(float(np.max(squares)) / n_mc)
    logger.debug("sigma oracle over " + str(pool.size) + " directions: " + str(sigma))
    return sigma


def sym_eigendecomposition(a):
    """
    :return: (eigenvalues in non-increasing order, matching orthonormal eigenvectors as columns).
    """
    a = as_sym_matrix(a)
    eigvals, eigvecs = scipy.linalg.eigh(symmetrize(a))
    return eigvals[::-1].copy(), eigvecs[:, ::-1].copy()


def top_projector(eigvecs, k):
    basis = eigvecs[:, :k]
    return symmetrize(basis @ basis.T)


def robust_pca(data, n_blocks, k, pool, rng, sigma_hint=None, center='mom_mean'):
    """
    Projector on the top-k eigenvectors of the centered, PSD-projected covariance estimate.
    :param data: Dataset.
    :param n_blocks: Number of blocks K.
    :param k: Target rank, 1 <= k < d.
    :param pool: DirectionPool.
    :param rng: RngStream.
    :param sigma_hint: Optional sigma; enables the error bound and the gap condition.
    :return: The PcaResult.
    """
    if not 1 <= k < data.dim:
        raise IllegalArgumentError("Target rank must be in [1, " + str(data.dim - 1) + "], got " + str(k) + ".")

    estimate = cov_mom_estimate(data, n_blocks, pool, rng, center=center, psd_project=True)
    eigvals, eigvecs = sym_eigendecomposition(estimate.matrix)
    gap = float(eigvals[k - 1] - eigvals[k])

    bound, gap_ok = None, None
    if sigma_hint is not None:
        bound = pca_error_bound(sigma_hint, gap, n_blocks, data.n_samples)
        gap_ok = gap >= 16.0 * sigma_hint * math.sqrt(n_blocks / data.n_samples)

    return PcaResult(top_projector(eigvecs, k), eigvals, k, gap, bound, gap_ok, estimate)


def frobenius_error(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape != b.shape:
        raise IllegalArgumentError("Dimension mismatch: " + str(a.shape) + " vs. " + str(b.shape) + ".")
    return float(np.linalg.norm(a - b, 'fro'))


def operator_error(a, b):
    """ Largest absolute eigenvalue of a - b. """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape != b.shape:
        raise IllegalArgumentError("Dimension mismatch: " + str(a.shape) + " vs. " + str(b.shape) + ".")
    return float(np.max(np.abs(scipy.linalg.eigvalsh(symmetrize(a - b)))))


def empirical_covariance(data, center=True):
    values = data.values - data.values.mean(axis=0) if center else data.values
    return symmetrize(values.T @ values / data.n_samples)
