""" Estimators that can be named in an experiment configuration. """
import logging

import numpy as np

from estimator import covariance_mom, mean_mom, tukey_depth
from estimator.blocking import partition, block_means

# get root logger
logger = logging.getLogger('robust-mom_logger')

# what each estimator returns, and so which experiments may use it
OUTPUT_KINDS = {
    "lm_mom": "vector",
    "coordwise_mom": "vector",
    "geomedian_mom": "vector",
    "tukey_mom": "vector",
    "empirical_mean": "vector",
    "cov_mom": "matrix",
    "empirical_cov": "matrix",
    "robust_pca": "projector",
    "empirical_pca": "projector",
    "block_majority": "block_fraction",
}

EXPERIMENT_OUTPUTS = {
    "mean": "vector",
    "tukey": "vector",
    "covariance": "matrix",
    "pca": "projector",
    "lemma7": "block_fraction",
}

DEFAULT_ESTIMATORS = {
    "mean": ["lm_mom", "coordwise_mom", "geomedian_mom", "empirical_mean"],
    "tukey": ["tukey_mom"],
    "covariance": ["cov_mom", "empirical_cov"],
    "pca": ["robust_pca", "empirical_pca"],
    "lemma7": ["block_majority"],
}


##########################
# mean vector estimators #
##########################

def lm_mom(trial):
    """
    Intersection of median sets over the direction pool.
    :param trial: The trial to estimate on.
    :return: (point, achieved tolerance)
    """
    estimate = mean_mom.lm_mom_estimate(trial.data, trial.n_blocks, trial.pool, trial.rng)
    return estimate.point, estimate.achieved_eps


def coordwise_mom(trial):
    return mean_mom.coordinatewise_mom(trial.data, trial.n_blocks, trial.rng), None


def geomedian_mom(trial):
    return mean_mom.geomedian_mom(trial.data, trial.n_blocks, trial.rng), None


def tukey_mom(trial):
    """
    Deepest point with respect to the block means.
    :param trial: The trial to estimate on.
    :return: (point, depth)
    """
    options = trial.config.tukey
    estimate = tukey_depth.tukey_mom(trial.data, trial.n_blocks, trial.rng, n_dirs=options["n_dirs"],
                                     n_anneal_iters=options["n_anneal_iters"])
    return estimate.point, estimate.depth


def empirical_mean(trial):
    return mean_mom.empirical_mean(trial.data), None


#########################
# covariance estimators #
#########################

def cov_mom(trial):
    options = trial.config.covariance
    estimate = covariance_mom.cov_mom_estimate(trial.data, trial.n_blocks, trial.pool, trial.rng,
                                               center=options["center"], psd_project=options["psd_project"])
    if estimate.membership_eps > estimate.achieved_eps:
        logger.debug("Trial " + str(trial.trial_id) + ": two-sided membership radius " + str(estimate.membership_eps)
                     + " exceeds achieved_eps " + str(estimate.achieved_eps) + ".")
    return estimate.matrix, estimate.achieved_eps


def empirical_cov(trial):
    centered = trial.config.covariance["center"] == "mom_mean"
    return covariance_mom.empirical_covariance(trial.data, center=centered), None


##################
# PCA estimators #
##################

def robust_pca(trial):
    """
    Top-k projector of the robust covariance estimate.
    :param trial: The trial to estimate on.
    :return: (projector, estimated eigengap)
    """
    result = covariance_mom.robust_pca(trial.data, trial.n_blocks, trial.config.pca["rank"], trial.pool, trial.rng,
                                       sigma_hint=trial.sigma, center=trial.config.covariance["center"])
    return result.projector, result.gap


def empirical_pca(trial):
    rank = trial.config.pca["rank"]
    centered = trial.config.covariance["center"] == "mom_mean"
    covariance = covariance_mom.empirical_covariance(trial.data, center=centered)
    eigvals, eigvecs = covariance_mom.sym_eigendecomposition(covariance)
    return covariance_mom.top_projector(eigvecs, rank), float(eigvals[rank - 1] - eigvals[rank])


###########################
# block majority (lemma7) #
###########################

def block_majority(trial):
    """
    Fraction of blocks on which |<X_k - mu, v> | exceeds the Markov radius, maximized over the pool.
    :param trial: The trial to evaluate.
    :return: (largest fraction of exceeding blocks, number of directions passing the majority check)
    """
    alpha = trial.config.lemma7["alpha"]
    means = block_means(trial.data, partition(trial.data.n_samples, trial.n_blocks, trial.rng)).means
    radius = mean_mom.markov_radius(trial.r_weak, trial.n_blocks, trial.data.n_samples, alpha)
    exceeding = np.abs((means - trial.truth) @ trial.pool.directions.T) > radius
    passing = sum(1 for column in exceeding.T if tukey_depth.block_majority_check(column, alpha))
    fraction = float(np.max(np.count_nonzero(exceeding, axis=0))) / trial.n_blocks
    return fraction, passing
