import math

import numpy as np
import pytest

from estimator.blocking import partition
from estimator.contamination import (ContaminationSpec, DistributionSpec, adversarial_corrupt, contaminate,
                                     corrupt_count, huber_contaminate, sample_clean)
from estimator.covariance_mom import empirical_covariance, operator_error
from estimator.model import RngStream
from util.exceptions import IllegalArgumentError


def clean_gaussian(n, dim=2, seed=0):
    return sample_clean(DistributionSpec('gaussian', dim), n, RngStream(seed))


def test_point_mass_rows():
    data = sample_clean(DistributionSpec('point_mass', 2, mean=[1.0, -4.0]), 5, RngStream(0))
    assert np.array_equal(data.values, np.tile([1.0, -4.0], (5, 1)))


def test_gaussian_covariance():
    data = clean_gaussian(100000, seed=1)
    assert operator_error(empirical_covariance(data), np.eye(2)) < 0.05


def test_gaussian_mean_and_scale():
    spec = DistributionSpec('gaussian', 2, mean=[3.0, 1.0], scale=[[4.0, 1.0], [1.0, 2.0]])
    data = sample_clean(spec, 100000, RngStream(2))
    assert np.allclose(data.values.mean(axis=0), [3.0, 1.0], atol=0.05)
    assert operator_error(empirical_covariance(data), spec.scale) < 0.15


@pytest.mark.parametrize("df, tolerance", [(3.0, 0.25), (5.0, 0.1), (10.0, 0.1)])
def test_student_t_has_unit_second_moment(df, tolerance):
    data = sample_clean(DistributionSpec('student_t', 1, df=df), 100000, RngStream(3))
    assert float(np.mean(data.values ** 2)) == pytest.approx(1.0, rel=tolerance)


@pytest.mark.parametrize("spec", [
    DistributionSpec('pareto', 2, mean=[1.0, 1.0], tail_index=6.0),
    DistributionSpec('lognormal', 2, mean=[1.0, 1.0], sigma=0.5),
])
def test_skewed_laws_are_standardized(spec):
    data = sample_clean(spec, 100000, RngStream(4))
    assert np.allclose(data.values.mean(axis=0), [1.0, 1.0], atol=0.05)
    assert operator_error(empirical_covariance(data), np.eye(2)) < 0.15


def test_distribution_validation():
    with pytest.raises(IllegalArgumentError):
        DistributionSpec('student_t', 1, df=2.0)
    with pytest.raises(IllegalArgumentError):
        DistributionSpec('pareto', 1, tail_index=1.5)
    with pytest.raises(IllegalArgumentError):
        DistributionSpec('cauchy', 1)
    with pytest.raises(IllegalArgumentError):
        DistributionSpec('gaussian', 2, scale=[[1.0, 0.0], [0.0, -1.0]])


def test_distribution_helpers():
    spec = DistributionSpec.from_dict({"kind": "student_t", "df": 3.0, "mean": [1.0, 2.0]}, 2)
    assert spec.kind == 'student_t'
    assert not spec.has_finite_fourth_moment()
    assert np.array_equal(spec.second_moment(), np.eye(2))
    assert np.array_equal(spec.centered().mean, np.zeros(2))
    assert DistributionSpec.from_dict(spec.to_dict(), 2).to_dict() == spec.to_dict()
    assert np.array_equal(DistributionSpec('point_mass', 2).second_moment(), np.zeros((2, 2)))


def test_corrupt_count():
    assert corrupt_count(0.29, 100) == 29
    assert corrupt_count(0.05, 2000) == 100
    assert corrupt_count(0.0, 10) == 0


def test_huber_identity_for_zero_eps():
    clean = clean_gaussian(50)
    sample = huber_contaminate(clean, 0.0, DistributionSpec('point_mass', 2, mean=[9.0, 9.0]), RngStream(5))
    assert sample.data is clean
    assert sample.outlier_indices == []


def test_huber_replacement_count():
    clean = clean_gaussian(10000, seed=6)
    q_spec = DistributionSpec('point_mass', 2, mean=[50.0, 50.0])
    sample = huber_contaminate(clean, 0.1, q_spec, RngStream(7))
    assert 850 <= len(sample.outlier_indices) <= 1150
    assert np.all(sample.data.values[sample.outlier_indices] == 50.0)
    kept = np.setdiff1d(np.arange(10000), sample.outlier_indices)
    assert np.array_equal(sample.data.values[kept], clean.values[kept])


def test_huber_rejects_bad_arguments():
    with pytest.raises(IllegalArgumentError):
        huber_contaminate(clean_gaussian(10), 1.0, DistributionSpec('gaussian', 2), RngStream(0))
    with pytest.raises(IllegalArgumentError):
        huber_contaminate(clean_gaussian(10), 0.1, DistributionSpec('gaussian', 3), RngStream(0))


def test_far_point_mass():
    clean = clean_gaussian(100, seed=8)
    sample = adversarial_corrupt(clean, 0.05, 'far_point_mass', 100.0, rng=RngStream(9))
    assert len(sample.outlier_indices) == 5
    outliers = sample.data.values[sample.outlier_indices]
    distances = np.linalg.norm(outliers - clean.values.mean(axis=0), axis=1)
    assert np.allclose(distances, 100.0)
    kept = np.setdiff1d(np.arange(100), sample.outlier_indices)
    assert np.array_equal(sample.data.values[kept], clean.values[kept])


def test_mean_shift():
    clean = clean_gaussian(200, seed=10)
    sample = adversarial_corrupt(clean, 0.1, 'mean_shift', 3.0, rng=RngStream(11))
    shift = sample.data.values[sample.outlier_indices] - clean.values[sample.outlier_indices]
    assert len(sample.outlier_indices) == 20
    assert np.allclose(shift, 3.0 / math.sqrt(2.0))


def test_block_concentrated_fills_whole_blocks():
    clean = clean_gaussian(100, seed=12)
    part = partition(100, 10, RngStream(13))
    sample = adversarial_corrupt(clean, 0.25, 'block_concentrated', 10.0, partition_hint=part)
    corrupted = set(sample.outlier_indices)
    fully_corrupted = sum(1 for block in part.blocks if set(block.tolist()) <= corrupted)
    assert len(corrupted) == 25
    assert fully_corrupted == 2
    with pytest.raises(IllegalArgumentError):
        adversarial_corrupt(clean, 0.25, 'block_concentrated', 10.0)


def test_adversarial_identity_and_errors():
    clean = clean_gaussian(30)
    sample = adversarial_corrupt(clean, 0.0, 'far_point_mass', 10.0, rng=RngStream(0))
    assert sample.data is clean
    with pytest.raises(IllegalArgumentError):
        adversarial_corrupt(clean, 0.1, 'teleport', 10.0, rng=RngStream(0))
    with pytest.raises(IllegalArgumentError):
        adversarial_corrupt(clean, 0.1, 'far_point_mass', 10.0)


def test_contaminate_dispatch():
    clean = clean_gaussian(1000, seed=14)
    assert contaminate(clean, ContaminationSpec(), RngStream(0)).data is clean
    huber = contaminate(clean, ContaminationSpec('huber', 0.2, magnitude=8.0), RngStream(15))
    point = np.ones(2) * 8.0 / math.sqrt(2.0)
    assert np.allclose(huber.data.values[huber.outlier_indices], point)
    adversarial = contaminate(clean, ContaminationSpec('adversarial', 0.05, 'far_point_mass', 20.0), RngStream(16))
    assert len(adversarial.outlier_indices) == 50


def test_contamination_spec_validation():
    with pytest.raises(IllegalArgumentError):
        ContaminationSpec('swap', 0.1)
    with pytest.raises(IllegalArgumentError):
        ContaminationSpec('adversarial', 0.1, 'teleport')
    assert ContaminationSpec('adversarial', 0.05, 'far_point_mass').corrupt_count(2000) == 100
    assert ContaminationSpec().corrupt_count(2000) == 0
