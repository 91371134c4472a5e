""" Clean-data samplers and the Huber / adversarial contamination models. """

import logging
import math

import numpy as np

from estimator.model import Dataset, as_vector, as_sym_matrix
from util.exceptions import IllegalArgumentError

# get root logger
logger = logging.getLogger('robust-mom_logger')

DISTRIBUTION_KINDS = ('gaussian', 'student_t', 'pareto', 'lognormal', 'point_mass')
CONTAMINATION_MODELS = ('none', 'huber', 'adversarial')
ADVERSARIAL_STRATEGIES = ('far_point_mass', 'mean_shift', 'block_concentrated')


class DistributionSpec(object):
    """
    Law of the clean samples Y_1, ..., Y_N. Every kind except point_mass has second moment
    matrix E(Y-mu)(Y-mu)^T equal to `scale`.
    """

    def __init__(self, kind, dim, mean=None, scale=None, df=None, tail_index=None, sigma=None):
        """
        :param kind: One of gaussian, student_t, pareto, lognormal, point_mass.
        :param dim: Dimension d.
        :param mean: Mean vector (default: zero).
        :param scale: Second moment matrix of Y - mean (default: identity).
        :param df: Degrees of freedom (student_t, > 2).
        :param tail_index: Tail index alpha (pareto, > 2).
        :param sigma: Log-scale shape parameter (lognormal, default 1).
        """
        if kind not in DISTRIBUTION_KINDS:
            raise IllegalArgumentError("Unknown distribution kind: " + str(kind))
        if dim < 1:
            raise IllegalArgumentError("Distribution dimension must be positive.")
        self.kind = kind
        self.dim = int(dim)
        self.mean = np.zeros(dim) if mean is None else as_vector(mean, dim)
        self.scale = np.eye(dim) if scale is None else as_sym_matrix(scale, dim)
        if np.min(np.linalg.eigvalsh(self.scale)) < -1e-9 * max(1.0, np.max(np.abs(self.scale))):
            raise IllegalArgumentError("Scale matrix must be positive semidefinite.")
        self.df = df
        self.tail_index = tail_index
        self.sigma = 1.0 if sigma is None else float(sigma)

        if kind == 'student_t' and (df is None or df <= 2):
            raise IllegalArgumentError("student_t needs df > 2 (finite second moment), got " + str(df) + ".")
        if kind == 'pareto' and (tail_index is None or tail_index <= 2):
            raise IllegalArgumentError("pareto needs tail_index > 2, got " + str(tail_index) + ".")
        if kind == 'lognormal' and self.sigma <= 0:
            raise IllegalArgumentError("lognormal needs sigma > 0.")

        # matrix square root, valid for singular scales
        eigvals, eigvecs = np.linalg.eigh(self.scale)
        self._factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))

    def second_moment(self):
        """ Second moment matrix of Y - mean. """
        if self.kind == 'point_mass':
            return np.zeros((self.dim, self.dim))
        return self.scale.copy()

    def has_finite_fourth_moment(self):
        if self.kind == 'student_t':
            return self.df > 4
        if self.kind == 'pareto':
            return self.tail_index > 4
        return True

    def centered(self):
        """ Same law shifted to mean zero. """
        return DistributionSpec(self.kind, self.dim, np.zeros(self.dim), self.scale, self.df, self.tail_index,
                                self.sigma)

    def to_dict(self):
        config = {"kind": self.kind, "mean": self.mean.tolist(), "scale": self.scale.tolist()}
        for key in ("df", "tail_index"):
            if getattr(self, key) is not None:
                config[key] = getattr(self, key)
        if self.kind == 'lognormal':
            config["sigma"] = self.sigma
        return config

    @classmethod
    def from_dict(cls, config_dict, dim):
        return cls(config_dict["kind"], dim, config_dict.get("mean"), config_dict.get("scale"),
                   config_dict.get("df"), config_dict.get("tail_index"), config_dict.get("sigma"))


class ContaminationSpec(object):

    def __init__(self, model='none', eps_corrupt=0.0, strategy=None, magnitude=0.0, q_spec=None):
        if model not in CONTAMINATION_MODELS:
            raise IllegalArgumentError("Unknown contamination model: " + str(model))
        if not 0.0 <= eps_corrupt < 1.0:
            raise IllegalArgumentError("Corruption fraction must be in [0, 1), got " + str(eps_corrupt) + ".")
        if model == 'adversarial' and strategy not in ADVERSARIAL_STRATEGIES:
            raise IllegalArgumentError("Unknown adversarial strategy: " + str(strategy))
        self.model = model
        self.eps_corrupt = float(eps_corrupt)
        self.strategy = strategy
        self.magnitude = float(magnitude)
        self.q_spec = q_spec

    def corrupt_count(self, n_samples):
        """ floor(eps N) for the adversarial model, expected count for Huber. """
        if self.model == 'none':
            return 0
        return corrupt_count(self.eps_corrupt, n_samples)

    def to_dict(self):
        config = {"model": self.model, "eps_corrupt": self.eps_corrupt, "magnitude": self.magnitude}
        if self.strategy:
            config["strategy"] = self.strategy
        if self.q_spec is not None:
            config["q_distribution"] = self.q_spec.to_dict()
        return config


class ContaminatedSample(object):

    def __init__(self, data, outlier_indices, clean_reference=None):
        self.data = data
        self.outlier_indices = sorted(int(i) for i in outlier_indices)
        self.clean_reference = clean_reference


def corrupt_count(eps, n_samples):
    # tolerance keeps floor(0.29 * 100) at 29
    return int(math.floor(eps * n_samples + 1e-9))


def _standardized_coordinates(spec, n, generator):
    """ Coordinate-wise independent, mean zero, unit variance draws. """
    if spec.kind == 'pareto':
        alpha = spec.tail_index
        # numpy draws Lomax(alpha)
        lomax_mean = 1.0 / (alpha - 1.0)
        lomax_std = math.sqrt(alpha / ((alpha - 1.0) ** 2 * (alpha - 2.0)))
        return (generator.pareto(alpha, size=(n, spec.dim)) - lomax_mean) / lomax_std
    s2 = spec.sigma ** 2
    log_mean = math.exp(s2 / 2.0)
    log_std = math.sqrt((math.exp(s2) - 1.0) * math.exp(s2))
    return (generator.lognormal(0.0, spec.sigma, size=(n, spec.dim)) - log_mean) / log_std


def sample_clean(spec, n, rng):
    """
    Draw N i.i.d. samples of the clean law.
    :param spec: The DistributionSpec.
    :param n: Number of samples.
    :param rng: RngStream.
    :return: The Dataset.
    """
    if n < 1:
        raise IllegalArgumentError("Number of samples must be positive.")

    if spec.kind == 'point_mass':
        return Dataset(np.tile(spec.mean, (n, 1)))

    generator = rng.generator()
    if spec.kind == 'gaussian':
        z = generator.standard_normal((n, spec.dim))
    elif spec.kind == 'student_t':
        # scaled so that the second moment matrix equals `scale`
        chi2 = generator.chisquare(spec.df, size=n)
        z = generator.standard_normal((n, spec.dim)) / np.sqrt(chi2 / spec.df)[:, None]
        z *= math.sqrt((spec.df - 2.0) / spec.df)
    else:
        z = _standardized_coordinates(spec, n, generator)

    return Dataset(spec.mean + z @ spec._factor.T)


def huber_contaminate(clean, eps, q_spec, rng):
    """
    Replace each row independently by a draw from Q with probability eps, i.e. sample (1-eps)P + eps Q.
    :return: The ContaminatedSample.
    """
    if not 0.0 <= eps < 1.0:
        raise IllegalArgumentError("Corruption fraction must be in [0, 1), got " + str(eps) + ".")
    if q_spec.dim != clean.dim:
        raise IllegalArgumentError("Dimension mismatch between clean data and contaminating law.")

    generator = rng.generator()
    replaced = np.flatnonzero(generator.random(clean.n_samples) < eps)
    if replaced.size == 0:
        return ContaminatedSample(clean, [], clean)

    values = np.array(clean.values)
    values[replaced] = sample_clean(q_spec, replaced.size, rng.substream(1)).values
    logger.debug("Huber contamination replaced " + str(replaced.size) + " of " + str(clean.n_samples) + " rows.")
    return ContaminatedSample(Dataset(values), replaced, clean)


def _fill_blocks(partition_hint, count):
    """ Indices filling whole blocks of the partition first (most fully corrupted blocks). """
    indices = list(partition_hint.blocks.reshape(-1)[:count])
    if len(indices) < count:
        # remaining outliers land on discarded samples
        indices += list(partition_hint.discarded[:count - len(indices)])
    return indices


def adversarial_corrupt(clean, eps, strategy, magnitude, target_estimator_hint=None, rng=None,
                        partition_hint=None):
    """
    Replace exactly floor(eps N) rows; all other rows stay bit-identical to the clean data.
    :param clean: Clean Dataset.
    :param eps: Corruption fraction in [0, 1).
    :param strategy: far_point_mass, mean_shift, or block_concentrated.
    :param magnitude: Distance of the corruption.
    :param target_estimator_hint: Center for the point mass (default: empirical mean of the clean rows).
    :param rng: RngStream choosing the corrupted indices.
    :param partition_hint: BlockPartition attacked by block_concentrated.
    :return: The ContaminatedSample.
    """
    if not 0.0 <= eps < 1.0:
        raise IllegalArgumentError("Corruption fraction must be in [0, 1), got " + str(eps) + ".")
    if strategy not in ADVERSARIAL_STRATEGIES:
        raise IllegalArgumentError("Unknown adversarial strategy: " + str(strategy))

    count = corrupt_count(eps, clean.n_samples)
    if count == 0:
        return ContaminatedSample(clean, [], clean)

    direction = np.ones(clean.dim) / math.sqrt(clean.dim)
    if target_estimator_hint is not None:
        center = as_vector(target_estimator_hint, clean.dim)
    else:
        center = clean.values.mean(axis=0)

    values = np.array(clean.values)
    if strategy == 'block_concentrated':
        if partition_hint is None:
            raise IllegalArgumentError("Strategy block_concentrated needs a partition hint.")
        if partition_hint.n_samples != clean.n_samples:
            raise IllegalArgumentError("Partition hint does not fit the clean data.")
        outliers = np.array(_fill_blocks(partition_hint, count), dtype=np.int64)
        values[outliers] = center + magnitude * direction
    else:
        if rng is None:
            raise IllegalArgumentError("Strategy " + strategy + " needs an RngStream.")
        outliers = rng.generator().choice(clean.n_samples, size=count, replace=False)
        if strategy == 'far_point_mass':
            values[outliers] = center + magnitude * direction
        else:
            values[outliers] = clean.values[outliers] + magnitude * direction

    logger.debug("Adversary (" + strategy + ") replaced " + str(count) + " of " + str(clean.n_samples) + " rows.")
    return ContaminatedSample(Dataset(values), outliers, clean)


def contaminate(clean, spec, rng, partition_hint=None):
    """
    Apply a ContaminationSpec to clean data.
    :return: The ContaminatedSample.
    """
    if spec.model == 'none' or spec.eps_corrupt == 0.0:
        return ContaminatedSample(clean, [], clean)
    if spec.model == 'huber':
        q_spec = spec.q_spec
        if q_spec is None:
            point = np.ones(clean.dim) * spec.magnitude / math.sqrt(clean.dim)
            q_spec = DistributionSpec('point_mass', clean.dim, mean=point)
        return huber_contaminate(clean, spec.eps_corrupt, q_spec, rng)
    return adversarial_corrupt(clean, spec.eps_corrupt, spec.strategy, spec.magnitude, rng=rng,
                               partition_hint=partition_hint)
