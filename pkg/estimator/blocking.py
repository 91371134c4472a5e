""" Block partitions, block statistics, and the lower median. """

import logging
import math

import numpy as np

from estimator.model import as_vector
from util.exceptions import IllegalArgumentError, InsufficientSamplesError

# get root logger
logger = logging.getLogger('robust-mom_logger')


class BlockPartition(object):
    """
    K disjoint blocks of equal size m = floor(N/K); the remaining N - K*m indices are discarded.
    """

    def __init__(self, n_samples, blocks, discarded):
        """
        :param n_samples: Number of samples N that were partitioned.
        :param blocks: K x m integer array with the sample indices of each block.
        :param discarded: Indices not assigned to any block.
        """
        blocks = np.array(blocks, dtype=np.int64)
        discarded = np.array(discarded, dtype=np.int64).reshape(-1)
        if blocks.ndim != 2 or blocks.shape[0] < 1 or blocks.shape[1] < 1:
            raise IllegalArgumentError("A partition needs at least one non-empty block.")
        blocks.setflags(write=False)
        discarded.setflags(write=False)
        self.n_samples = int(n_samples)
        self.blocks = blocks
        self.discarded = discarded

    @property
    def n_blocks(self):
        return self.blocks.shape[0]

    @property
    def block_size(self):
        return self.blocks.shape[1]

    @property
    def assignments(self):
        return [list(block) for block in self.blocks]


class BlockMeans(object):

    def __init__(self, means):
        self.means = np.asarray(means, dtype=np.float64)

    @property
    def n_blocks(self):
        return self.means.shape[0]

    @property
    def dim(self):
        return self.means.shape[1]


class BlockMoments(object):

    def __init__(self, moments):
        self.moments = np.asarray(moments, dtype=np.float64)

    @property
    def n_blocks(self):
        return self.moments.shape[0]

    @property
    def dim(self):
        return self.moments.shape[1]


def partition(n_samples, n_blocks, rng=None, shuffle=True):
    """
    Randomly permute the sample indices and split them into K consecutive runs of m = floor(N/K).
    :param n_samples: Number of samples N.
    :param n_blocks: Number of blocks K (1 <= K <= N).
    :param rng: RngStream for the permutation.
    :param shuffle: False keeps the identity order (deterministic mode).
    :return: The BlockPartition.
    """
    if n_blocks < 1 or n_blocks > n_samples:
        raise IllegalArgumentError("Number of blocks must be in [1, " + str(n_samples) + "], got "
                                   + str(n_blocks) + ".")

    if shuffle:
        if rng is None:
            raise IllegalArgumentError("A random partition needs an RngStream.")
        order = rng.generator().permutation(n_samples)
    else:
        order = np.arange(n_samples)

    block_size = n_samples // n_blocks
    used = n_blocks * block_size
    return BlockPartition(n_samples, order[:used].reshape(n_blocks, block_size), order[used:])


def _check_partition(data, part):
    if part.n_samples != data.n_samples or np.max(part.blocks) >= data.n_samples:
        raise IllegalArgumentError("Partition of " + str(part.n_samples) + " samples does not fit "
                                   + str(data) + ".")


def block_means(data, part):
    _check_partition(data, part)
    return BlockMeans(data.values[part.blocks].mean(axis=1))


def block_second_moments(data, part, center=None):
    """
    Block second moment matrices M_k = (1/m) sum_{i in B_k} (X_i - c)(X_i - c)^T.
    :param data: The Dataset.
    :param part: The BlockPartition.
    :param center: Optional center c (zero vector if None).
    :return: The BlockMoments.
    """
    _check_partition(data, part)
    samples = data.values[part.blocks]
    if center is not None:
        samples = samples - as_vector(center, data.dim)
    moments = np.einsum('kmi,kmj->kij', samples, samples) / part.block_size
    return BlockMoments(0.5 * (moments + np.swapaxes(moments, 1, 2)))


def lower_median_index(n):
    """ 0-based index of the ceil(n/2)-th order statistic. """
    return (n + 1) // 2 - 1


def lower_median(values):
    """
    Smallest x_i with #{x_j <= x_i} >= n/2 and #{x_j >= x_i} >= n/2, i.e. the ceil(n/2)-th order statistic.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise IllegalArgumentError("Median of an empty list.")
    kth = lower_median_index(values.size)
    return float(np.partition(values, kth)[kth])


def lower_median_along(values, axis=0):
    """
    Lower median along one axis of an array (e.g., over the blocks of K x M projections).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape[axis] == 0:
        raise IllegalArgumentError("Median of an empty list.")
    kth = lower_median_index(values.shape[axis])
    return np.take(np.partition(values, kth, axis=axis), kth, axis=axis)


def choose_block_count(delta, dim, corrupt_count, n_samples, c_vc=4, c_out=16):
    """
    K = min(floor(N/2), max(ceil(128 log(1/delta)), c_vc (d+1), c_out |O|, 1)).
    :param delta: Confidence parameter in (0, 1).
    :param dim: Dimension d (VC dimension of halfspaces is d+1).
    :param corrupt_count: Number of corrupted samples |O| (estimate).
    :param n_samples: Number of samples N.
    :return: The number of blocks K.
    """
    if not 0.0 < delta < 1.0:
        raise IllegalArgumentError("Confidence delta must be in (0, 1), got " + str(delta) + ".")
    if corrupt_count < 0:
        raise IllegalArgumentError("Number of corrupted samples must not be negative.")

    # rounding guards ceil against log(1/e^-1) = 1.0000000000000002
    confidence_blocks = math.ceil(round(128.0 * math.log(1.0 / delta), 9))
    lower_bound = max(confidence_blocks, c_vc * (dim + 1), c_out * corrupt_count, 1)
    n_blocks = min(n_samples // 2, lower_bound)

    if n_blocks < 1 or n_samples // n_blocks < 1:
        raise InsufficientSamplesError("Insufficient samples for requested confidence: N=" + str(n_samples)
                                       + " cannot hold " + str(lower_bound) + " blocks.")
    if n_blocks < lower_bound:
        logger.warning("Block count capped at N/2=" + str(n_blocks) + " (rule asks for " + str(lower_bound) + ").")

    return n_blocks
