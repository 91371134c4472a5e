""" Median-of-means estimators of a mean vector and their error bounds. """

import logging
import math

import numpy as np

from estimator.blocking import partition, block_means, lower_median_along
from estimator.contamination import sample_clean
from estimator.model import as_vector
from util.exceptions import IllegalArgumentError

# get root logger
logger = logging.getLogger('robust-mom_logger')

# distance below which a Weiszfeld iterate sits on an input point
ANCHOR_DISTANCE = 1e-12
ORACLE_CHUNK = 4096


class MeanEstimate(object):
    """
    Output of lm_mom_estimate: the point, the smallest tolerance eps for which the point lies in
    every median set of the pool, and optimizer diagnostics.
    """

    def __init__(self, point, achieved_eps, n_blocks, pool_size, iterations, history=None):
        self.point = point
        self.achieved_eps = achieved_eps
        self.n_blocks = n_blocks
        self.pool_size = pool_size
        self.iterations = iterations
        # best objective after every iteration (non-increasing)
        self.history = history if history is not None else [achieved_eps]


class BoundInputs(object):

    def __init__(self, r_weak, n_blocks, n_samples, dim=1):
        if r_weak < 0:
            raise IllegalArgumentError("Weak variance term R must not be negative.")
        if n_blocks < 1 or n_samples < 1 or dim < 1:
            raise IllegalArgumentError("Block count, sample count and dimension must be positive.")
        self.r_weak = float(r_weak)
        self.n_blocks = int(n_blocks)
        self.n_samples = int(n_samples)
        self.dim = int(dim)


def _median_projections(means, pool):
    """ Lower median over blocks of <X_k, v> for every pool direction v. """
    if pool.size < 1:
        raise IllegalArgumentError("Empty direction pool.")
    if means.dim != pool.dim:
        raise IllegalArgumentError("Dimension mismatch between block means and direction pool.")
    return lower_median_along(means.means @ pool.directions.T, axis=0)


def _max_residual(y, medians, pool):
    return float(np.max(np.abs(medians - pool.directions @ y)))


def mom_objective(y, means, pool):
    """
    Smallest eps for which y lies in every set {y: |Med(<X_k, v>) - <y, v>| <= eps}.
    :param y: Candidate point.
    :param means: BlockMeans.
    :param pool: DirectionPool.
    :return: max over v of |lower_median(<X_k, v>) - <y, v>|.
    """
    y = as_vector(y, means.dim)
    return _max_residual(y, _median_projections(means, pool), pool)


def _coordinatewise_median(means):
    return lower_median_along(means.means, axis=0)


def lm_mom_estimate(data, n_blocks, pool, rng, max_iters=500, step_decay=0.5, tol=1e-8):
    """
    Point of the intersection of median sets over the pool, found by minimizing the max residual
    with subgradient steps along the worst direction (step shrinks on non-improvement).
    :param data: Dataset.
    :param n_blocks: Number of blocks K.
    :param pool: DirectionPool.
    :param rng: RngStream for the partition.
    :param max_iters: Iteration limit.
    :param step_decay: Factor applied to the step after a step that did not improve.
    :param tol: Stop once objective or step fall below tol.
    :return: The MeanEstimate.
    """
    if not 0.0 < step_decay < 1.0:
        raise IllegalArgumentError("Step decay must be in (0, 1).")

    means = block_means(data, partition(data.n_samples, n_blocks, rng))
    medians = _median_projections(means, pool)
    directions = pool.directions

    best_y = _coordinatewise_median(means)
    best = _max_residual(best_y, medians, pool)
    history = [best]
    step = best
    iterations = 0

    while iterations < max_iters and best > tol and step > tol:
        iterations += 1
        residuals = medians - directions @ best_y
        # argmax returns the lowest pool index among ties
        worst = int(np.argmax(np.abs(residuals)))
        candidate = best_y + step * np.sign(residuals[worst]) * directions[worst]
        value = _max_residual(candidate, medians, pool)
        if value < best:
            best_y, best = candidate, value
        else:
            step *= step_decay
        history.append(best)

    logger.debug("lm_mom_estimate: K=" + str(n_blocks) + ", pool=" + str(pool.size) + ", iterations="
                 + str(iterations) + ", achieved_eps=" + str(best) + ".")
    return MeanEstimate(best_y, best, n_blocks, pool.size, iterations, history)


def coordinatewise_mom(data, n_blocks, rng):
    """
    Lower median of the block means in every coordinate (one shared partition).
    """
    means = block_means(data, partition(data.n_samples, n_blocks, rng))
    return _coordinatewise_median(means)


def _weiszfeld_objective(y, points):
    return float(np.sum(np.linalg.norm(points - y, axis=1)))


def geometric_median(points, tol=1e-9, max_iters=1000):
    """
    Weiszfeld iteration with the Vardi-Zhang modification at input points.
    :param points: n x d array (or list of vectors).
    :param tol: Relative step tolerance.
    :param max_iters: Iteration limit.
    :return: The geometric median.
    """
    points = np.array(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.shape[0] < 1:
        raise IllegalArgumentError("Geometric median of an empty point set.")
    if points.shape[0] == 1:
        return points[0].copy()

    scale = max(1.0, float(np.max(np.ptp(points, axis=0))))
    y = points.mean(axis=0)

    for _ in range(max_iters):
        diffs = points - y
        distances = np.linalg.norm(diffs, axis=1)
        anchored = distances < ANCHOR_DISTANCE
        free = ~anchored
        if not np.any(free):
            return y

        weights = 1.0 / distances[free]
        weiszfeld = (points[free] * weights[:, None]).sum(axis=0) / weights.sum()
        n_anchored = int(np.count_nonzero(anchored))
        if n_anchored == 0:
            y_new = weiszfeld
        else:
            pull = (diffs[free] * weights[:, None]).sum(axis=0)
            pull_norm = float(np.linalg.norm(pull))
            # subgradient condition: y is optimal
            if pull_norm <= n_anchored:
                return y
            share = n_anchored / pull_norm
            y_new = (1.0 - share) * weiszfeld + share * y

        moved = float(np.linalg.norm(y_new - y))
        y = y_new
        if moved <= tol * scale:
            break

    # an input point can be optimal while the iterates only approach it
    nearest = points[int(np.argmin(np.linalg.norm(points - y, axis=1)))]
    if _weiszfeld_objective(nearest, points) <= _weiszfeld_objective(y, points):
        return nearest.copy()
    return y


def geomedian_mom(data, n_blocks, rng):
    means = block_means(data, partition(data.n_samples, n_blocks, rng))
    return geometric_median(means.means)


def empirical_mean(data):
    return data.values.mean(axis=0)


def mean_error_bound(inputs):
    """
    8 R sqrt(K/N): radius exceeded with probability at most exp(-K/128).
    """
    if inputs.n_blocks > inputs.n_samples:
        raise IllegalArgumentError("Number of blocks must not exceed the number of samples.")
    return 8.0 * inputs.r_weak * math.sqrt(inputs.n_blocks / inputs.n_samples)


def markov_radius(r_weak, n_blocks, n_samples, alpha):
    """
    Radius r with P(|<X_1 - mu, v>| > r) <= 1/(4 alpha) for a block mean, by Markov's inequality.
    """
    if alpha <= 1:
        raise IllegalArgumentError("alpha must be > 1.")
    return r_weak * math.sqrt(4.0 * alpha * n_blocks / n_samples)


def lemma_failure_cap(n_blocks, alpha):
    """ Probability cap exp(-K/(8 alpha^2)) of the block-majority event. """
    if alpha <= 1:
        raise IllegalArgumentError("alpha must be > 1.")
    return math.exp(-n_blocks / (8.0 * alpha ** 2))


def r_weak_oracle(sampler, mu, pool, n_mc, rng):
    """
    Monte Carlo value of R = sup_v E(<Y - mu, v>^2)^(1/2) over the pool.
    :param sampler: DistributionSpec of Y.
    :param mu: Mean vector.
    :param pool: DirectionPool.
    :param n_mc: Number of draws (>= 1000).
    :param rng: RngStream.
    :return: R.
    """
    if n_mc < 1000:
        raise IllegalArgumentError("R oracle needs at least 1000 draws, got " + str(n_mc) + ".")
    mu = as_vector(mu, pool.dim)
    draws = sample_clean(sampler, n_mc, rng).values - mu
    squares = np.zeros(pool.size)
    for start in range(0, n_mc, ORACLE_CHUNK):
        projections = draws[start:start + ORACLE_CHUNK] @ pool.directions.T
        squares += np.sum(projections ** 2, axis=0)
    r_weak = math.sqrt(float(np.max(squares)) / n_mc)
    logger.debug("R oracle over " + str(pool.size) + " directions: " + str(r_weak))
    return r_weak


def block_means_of(data, n_blocks, rng):
    """ Block means of a fresh partition (shared helper for estimators built on block means). """
    return block_means(data, partition(data.n_samples, n_blocks, rng))

