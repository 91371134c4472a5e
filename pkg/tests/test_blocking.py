import math

import numpy as np
import pytest

from estimator.blocking import (block_means, block_second_moments, choose_block_count, lower_median,
                                lower_median_along, partition)
from estimator.model import Dataset, RngStream
from util.exceptions import IllegalArgumentError, InsufficientSamplesError


@pytest.mark.parametrize("n_samples, n_blocks, block_size, n_discarded",
                         [(10, 3, 3, 1), (6, 3, 2, 0), (5, 5, 1, 0), (7, 1, 7, 0)])
def test_partition_sizes(n_samples, n_blocks, block_size, n_discarded):
    part = partition(n_samples, n_blocks, RngStream(0))
    assert part.n_blocks == n_blocks
    assert part.block_size == block_size
    assert part.discarded.size == n_discarded
    indices = np.concatenate([part.blocks.reshape(-1), part.discarded])
    assert sorted(indices.tolist()) == list(range(n_samples))


def test_partition_is_reproducible():
    first = partition(100, 7, RngStream(9, 1))
    second = partition(100, 7, RngStream(9, 1))
    assert np.array_equal(first.blocks, second.blocks)


def test_partition_without_shuffle_keeps_order():
    part = partition(4, 2, shuffle=False)
    assert part.assignments == [[0, 1], [2, 3]]


@pytest.mark.parametrize("n_blocks", [0, 11])
def test_partition_rejects_block_count(n_blocks):
    with pytest.raises(IllegalArgumentError):
        partition(10, n_blocks, RngStream(0))


def test_block_means_by_hand():
    data = Dataset([0.0, 2.0, 4.0, 6.0])
    means = block_means(data, partition(4, 2, shuffle=False))
    assert means.means[:, 0].tolist() == [1.0, 5.0]


def test_block_means_constant_data():
    data = Dataset(np.tile([1.5, -2.0], (30, 1)))
    means = block_means(data, partition(30, 6, RngStream(1)))
    assert np.array_equal(means.means, np.tile([1.5, -2.0], (6, 1)))


def test_single_block_is_empirical_mean():
    values = RngStream(2).generator().standard_normal((9, 2))
    part = partition(9, 1, RngStream(3))
    means = block_means(Dataset(values), part)
    assert np.allclose(means.means[0], values.mean(axis=0))


def test_block_means_rejects_foreign_partition():
    with pytest.raises(IllegalArgumentError):
        block_means(Dataset([1.0, 2.0]), partition(4, 2, shuffle=False))


def test_block_second_moments():
    x = np.array([1.0, 2.0])
    data = Dataset(np.tile(x, (6, 1)))
    part = partition(6, 3, RngStream(0))
    assert np.allclose(block_second_moments(data, part).moments, np.outer(x, x))
    assert np.allclose(block_second_moments(data, part, center=x).moments, 0.0)
    moments = block_second_moments(Dataset([1.0, -1.0]), partition(2, 1, shuffle=False))
    assert moments.moments[0].tolist() == [[1.0]]


def test_block_second_moments_are_psd():
    data = Dataset(RngStream(1).generator().standard_normal((240, 4)) * np.array([3.0, 1.0, 0.2, 5.0]))
    moments = block_second_moments(data, partition(240, 12, RngStream(2)), center=np.array([0.5, 0.0, -1.0, 2.0]))
    directions = RngStream(3).generator().standard_normal((100, 4))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    forms = np.einsum('md,kde,me->km', directions, moments.moments, directions)
    assert np.min(forms) >= -1e-9


@pytest.mark.parametrize("values, expected", [([2, 1, 3], 2), ([1, 2, 3, 4], 2), ([5, 5, 5], 5), ([7], 7)])
def test_lower_median(values, expected):
    assert lower_median(values) == expected


def test_lower_median_rejects_empty():
    with pytest.raises(IllegalArgumentError):
        lower_median([])


def test_lower_median_matches_sorting():
    generator = RngStream(5).generator()
    for _ in range(1000):
        n = int(generator.integers(1, 30))
        values = generator.integers(-5, 6, size=n).astype(float) if n % 2 else generator.standard_normal(n)
        assert lower_median(values) == sorted(values)[(n - 1) // 2]


def test_lower_median_along_matches_lower_median():
    values = RngStream(4).generator().standard_normal((10, 3))
    medians = lower_median_along(values, axis=0)
    for j in range(3):
        assert medians[j] == lower_median(values[:, j])


@pytest.mark.parametrize("delta, dim, corrupt, expected", [
    (math.exp(-1.0), 1, 0, 128),
    (0.5, 1, 0, 89),
    (math.exp(-1.0), 1, 100, 1600),
    (0.9, 40, 0, 164),
])
def test_choose_block_count(delta, dim, corrupt, expected):
    assert choose_block_count(delta, dim, corrupt, 10 ** 6) == expected


def test_choose_block_count_is_capped():
    assert choose_block_count(0.05, 2, 100, 2000) == 1000


def test_choose_block_count_errors():
    with pytest.raises(IllegalArgumentError):
        choose_block_count(1.0, 1, 0, 100)
    with pytest.raises(InsufficientSamplesError):
        choose_block_count(0.5, 1, 0, 1)


def test_insufficient_samples_is_an_argument_error():
    # callers catching IllegalArgumentError (the CLI maps it to exit code 1) also see this case
    with pytest.raises(IllegalArgumentError, match="Insufficient samples"):
        choose_block_count(0.5, 1, 0, 1)
    assert issubclass(InsufficientSamplesError, IllegalArgumentError)
