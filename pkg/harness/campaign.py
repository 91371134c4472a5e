import codecs
import csv
import json
import logging
import math
import os
import time

from concurrent.futures import ThreadPoolExecutor

import numpy as np

import estimator
from estimator.blocking import partition
from estimator.contamination import contaminate, sample_clean
from estimator.covariance_mom import (cov_error_bound, frobenius_error, operator_error, pca_error_bound,
                                      sigma_weak_oracle, sym_eigendecomposition, top_projector)
from estimator.mean_mom import (BoundInputs, lemma_failure_cap, mean_error_bound, r_weak_oracle)
from estimator.model import RngStream, make_direction_pool, norm_of
from estimator.tukey_depth import depth_range, tukey_error_bound, tukey_failure_cap
from harness.estimators import EXPERIMENT_OUTPUTS
from util.exceptions import IllegalArgumentError, IllegalConfigurationError, IllegalStateError

# get root logger
logger = logging.getLogger('robust-mom_logger')

CSV_COLUMNS = ["trial_id", "estimator", "error", "bound", "within_bound", "certificate", "wall_time_ms"]
QUANTILES = (50, 90, 95, 99)
# observed failure fraction below which a campaign meets the expected (not only the guaranteed) behavior
EXPECTED_FAILURE_FRACTION = 0.05
THREADS_VARIABLE = 'ROBUST_MOM_THREADS'
# stream ids of trials are 0..T-1, oracles draw from a stream no trial can reach
ORACLE_STREAM_ID = 2 ** 63

# sub-streams of a trial stream
CLEAN_STREAM = 0
CONTAMINATION_STREAM = 1
PARTITION_STREAM = 2
POOL_STREAM = 3


def format_float(value):
    """ Shortest round-trip decimal (empty for missing values). """
    if value is None:
        return ""
    return repr(float(value))


def format_certificate(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format_float(value)


class TrialRecord(object):
    """ One estimator on one trial. """

    def __init__(self, trial_id, estimator_name, error, bound, certificate=None, wall_time_ms=0.0):
        self.trial_id = int(trial_id)
        self.estimator = estimator_name
        self.error = float(error)
        self.bound = float(bound)
        # exact comparison, no tolerance
        self.within_bound = self.error <= self.bound
        self.certificate = certificate
        self.wall_time_ms = float(wall_time_ms)

    def to_row(self):
        return [str(self.trial_id), self.estimator, format_float(self.error), format_float(self.bound),
                "true" if self.within_bound else "false", format_certificate(self.certificate),
                format_float(self.wall_time_ms)]

    def __str__(self):
        return "<" + str(self.trial_id) + ", " + self.estimator + ">"


class Trial(object):
    """
    Everything an estimator sees in one trial: the (contaminated) data, the block count, the direction pool,
    the partition stream, and (for certificates that need it) the ground truth and weak variance terms.
    """

    def __init__(self, trial_id, config, data, n_blocks, pool, rng, truth, r_weak=None, sigma=None,
                 outlier_indices=()):
        self.trial_id = trial_id
        self.config = config
        self.data = data
        self.n_blocks = n_blocks
        self.pool = pool
        self.rng = rng
        self.truth = truth
        self.r_weak = r_weak
        self.sigma = sigma
        self.outlier_indices = outlier_indices


class CampaignSummary(object):
    """
    Aggregated results of a campaign (per estimator: error quantiles, failure fraction, failure cap, bound).
    """

    def __init__(self, name, experiment, seed, n_trials, n_blocks, estimators, config, version=estimator.VERSION,
                 r_weak=None, sigma=None, weak_term_source=None, true_gap=None, gap_condition_ok=None,
                 max_outliers=0):
        self.name = name
        self.experiment = experiment
        self.seed = seed
        self.n_trials = n_trials
        self.n_blocks = n_blocks
        # estimator name -> dict with quantiles, failure_fraction, theoretical_failure_cap, bound_value, ...
        self.estimators = estimators
        self.config = config
        self.version = version
        self.r_weak = r_weak
        self.sigma = sigma
        self.weak_term_source = weak_term_source
        self.true_gap = true_gap
        self.gap_condition_ok = gap_condition_ok
        # largest number of corrupted samples |O| seen in a trial
        self.max_outliers = max_outliers

    def to_dict(self):
        return {
            "name": self.name,
            "experiment": self.experiment,
            "version": self.version,
            "seed": self.seed,
            "n_trials": self.n_trials,
            "n_blocks": self.n_blocks,
            "r_weak": self.r_weak,
            "sigma": self.sigma,
            "weak_term_source": self.weak_term_source,
            "true_gap": self.true_gap,
            "gap_condition_ok": self.gap_condition_ok,
            "max_outliers": self.max_outliers,
            "estimators": self.estimators,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, summary_dict):
        return cls(summary_dict["name"], summary_dict["experiment"], summary_dict["seed"],
                   summary_dict["n_trials"], summary_dict["n_blocks"], summary_dict["estimators"],
                   summary_dict["config"], summary_dict["version"], summary_dict.get("r_weak"),
                   summary_dict.get("sigma"), summary_dict.get("weak_term_source"), summary_dict.get("true_gap"),
                   summary_dict.get("gap_condition_ok"), summary_dict.get("max_outliers", 0))

    def __getitem__(self, estimator_name):
        return self.estimators[estimator_name]


class Campaign(object):
    """ Seeded Monte Carlo campaign for one experiment configuration. """

    def __init__(self, configuration, seed=None, threads=None):
        """
        :param configuration: Object of class ExperimentConfiguration.
        :param seed: Overrides the configured seed.
        :param threads: Number of worker threads (default: ROBUST_MOM_THREADS, 0 or unset = all cores).
        """
        self.configuration = configuration
        self.seed = configuration.seed if seed is None else int(seed)
        if threads is None:
            try:
                threads = int(os.environ.get(THREADS_VARIABLE, "0") or "0")
            except ValueError:
                raise IllegalConfigurationError(THREADS_VARIABLE + " must be an integer.")
        if threads < 0:
            raise IllegalArgumentError("Number of threads must not be negative.")
        self.threads = threads or os.cpu_count() or 1
        self.output_kind = EXPERIMENT_OUTPUTS[configuration.experiment]
        self.n_blocks = configuration.resolve_n_blocks()
        # ground truth and weak variance terms, fixed for the whole campaign
        self.truth = None
        self.r_weak = None
        self.sigma = None
        self.weak_term_source = None
        self.true_gap = None
        self.fixed_pool = None
        self.records = []
        self.outlier_counts = {}
        self._prepare()

    ##################
    # ground truth   #
    ##################

    def _oracle_stream(self):
        return RngStream(self.seed, ORACLE_STREAM_ID)

    def _oracle_pool(self):
        pool_config = self.configuration.pool
        return make_direction_pool(self.configuration.dim, int(pool_config["n_random"]),
                                   rng=self._oracle_stream().substream(0), norm=pool_config["norm"])

    def _analytic_r_weak(self):
        distribution = self.configuration.distribution
        if self.configuration.weak_term == "oracle":
            return None
        if distribution.kind == 'point_mass':
            return 0.0
        if distribution.kind != 'gaussian':
            return None
        if self.configuration.pool["norm"] == 'linf':
            return math.sqrt(float(np.max(np.diag(distribution.scale))))
        return math.sqrt(max(float(np.max(np.linalg.eigvalsh(distribution.scale))), 0.0))

    def _analytic_sigma(self, centered):
        distribution = self.configuration.distribution
        if self.configuration.weak_term == "oracle":
            return None
        if distribution.kind == 'point_mass':
            return 0.0
        if distribution.kind == 'gaussian' and (centered or not np.any(distribution.mean)):
            # Var((u^T Y)^2) = 2 (u^T S u)^2 for Gaussian Y
            return math.sqrt(2.0) * max(float(np.max(np.linalg.eigvalsh(distribution.scale))), 0.0)
        return None

    def _determine_r_weak(self):
        r_weak = self._analytic_r_weak()
        if r_weak is not None:
            self.weak_term_source = "analytic"
            return r_weak
        self.weak_term_source = "oracle"
        distribution = self.configuration.distribution
        logger.info("Estimating R with " + str(self.configuration.oracle_mc) + " Monte Carlo draws...")
        return r_weak_oracle(distribution, distribution.mean, self._oracle_pool(), self.configuration.oracle_mc,
                             self._oracle_stream().substream(1))

    def _determine_sigma(self, centered):
        sigma = self._analytic_sigma(centered)
        if sigma is not None:
            self.weak_term_source = "analytic"
            return sigma
        self.weak_term_source = "oracle"
        distribution = self.configuration.distribution
        sampler = distribution.centered() if centered else distribution
        target = self._true_second_moment(centered)
        logger.info("Estimating sigma with " + str(self.configuration.oracle_mc) + " Monte Carlo draws...")
        return sigma_weak_oracle(sampler, target, self._oracle_pool(), self.configuration.oracle_mc,
                                 self._oracle_stream().substream(2))

    def _true_second_moment(self, centered):
        distribution = self.configuration.distribution
        if centered:
            return distribution.second_moment()
        return distribution.second_moment() + np.outer(distribution.mean, distribution.mean)

    def _prepare(self):
        configuration = self.configuration
        experiment = configuration.experiment
        centered = configuration.covariance["center"] == "mom_mean"

        if experiment in ("mean", "tukey", "lemma7"):
            self.truth = configuration.distribution.mean.copy()
            self.r_weak = self._determine_r_weak()
        elif experiment == "covariance":
            self.truth = self._true_second_moment(centered)
            self.sigma = self._determine_sigma(centered)
        else:
            covariance = self._true_second_moment(centered)
            rank = int(configuration.pca["rank"])
            eigvals, eigvecs = sym_eigendecomposition(covariance)
            self.true_gap = float(eigvals[rank - 1] - eigvals[rank])
            self.truth = top_projector(eigvecs, rank)
            self.sigma = self._determine_sigma(centered)

        if experiment == "lemma7":
            n_directions = int(configuration.lemma7["n_directions"])
            self.fixed_pool = make_direction_pool(configuration.dim, max(n_directions - configuration.dim, 0),
                                                  rng=self._oracle_stream().substream(3))

        logger.info("Campaign " + configuration.name + ": K=" + str(self.n_blocks) + ", R="
                    + str(self.r_weak) + ", sigma=" + str(self.sigma) + " (" + str(self.weak_term_source) + ").")

    ##################
    # bounds         #
    ##################

    def bound_for(self, estimator_name):
        """
        :return: (bound value, theoretical failure cap) for an estimator in this campaign.
        """
        configuration = self.configuration
        n_samples = configuration.n_samples
        n_blocks = self.n_blocks
        if self.output_kind == "vector":
            if estimator_name == "tukey_mom" or configuration.experiment == "tukey":
                return (tukey_error_bound(self.r_weak, n_blocks, n_samples, configuration.dim),
                        tukey_failure_cap(n_blocks, configuration.dim))
            return (mean_error_bound(BoundInputs(self.r_weak, n_blocks, n_samples, configuration.dim)),
                    math.exp(-n_blocks / 128.0))
        if self.output_kind == "matrix":
            return cov_error_bound(self.sigma, n_blocks, n_samples), math.exp(-n_blocks / 128.0)
        if self.output_kind == "projector":
            return pca_error_bound(self.sigma, self.true_gap, n_blocks, n_samples), math.exp(-n_blocks / 128.0)
        alpha = float(configuration.lemma7["alpha"])
        return 1.0 / alpha, lemma_failure_cap(n_blocks, alpha)

    def error_of(self, estimate):
        if self.output_kind == "vector":
            return norm_of(np.asarray(estimate) - self.truth, self.configuration.pool["norm"])
        if self.output_kind == "matrix":
            if self.configuration.covariance["error_norm"] == "frobenius":
                return frobenius_error(estimate, self.truth)
            return operator_error(estimate, self.truth)
        if self.output_kind == "projector":
            return operator_error(estimate, self.truth)
        return float(estimate)

    ##################
    # trials         #
    ##################

    def make_trial(self, trial_id):
        """
        Draw the data of one trial: clean sample, contamination (the adversary sees the partition the
        estimators will use), and the direction pool.
        :param trial_id: Index of the trial (its stream id).
        :return: The Trial.
        """
        configuration = self.configuration
        stream = RngStream(self.seed, trial_id)
        partition_stream = stream.substream(PARTITION_STREAM)

        clean = sample_clean(configuration.distribution, configuration.n_samples, stream.substream(CLEAN_STREAM))
        partition_hint = None
        if configuration.contamination.strategy == 'block_concentrated':
            partition_hint = partition(configuration.n_samples, self.n_blocks, partition_stream)
        sample = contaminate(clean, configuration.contamination, stream.substream(CONTAMINATION_STREAM),
                             partition_hint)

        if self.fixed_pool is not None:
            pool = self.fixed_pool
        else:
            pool_config = configuration.pool
            hint = sample.data if pool_config["use_data_hint"] else None
            pool = make_direction_pool(configuration.dim, int(pool_config["n_random"]), dataset_hint=hint,
                                       rng=stream.substream(POOL_STREAM), norm=pool_config["norm"])

        return Trial(trial_id, configuration, sample.data, self.n_blocks, pool, partition_stream, self.truth,
                     self.r_weak, self.sigma, sample.outlier_indices)

    def run_trial(self, trial_id):
        trial = self.make_trial(trial_id)
        self.outlier_counts[trial_id] = len(trial.outlier_indices)
        records = []
        for estimator_name, estimator_function in zip(self.configuration.estimator_names,
                                                      self.configuration.estimators):
            start = time.perf_counter()
            estimate, certificate = estimator_function(trial)
            elapsed_ms = (time.perf_counter() - start) * 1000.0
            bound, _ = self.bound_for(estimator_name)
            wall_time_ms = elapsed_ms if self.configuration.record_timing else 0.0
            records.append(TrialRecord(trial_id, estimator_name, self.error_of(estimate), bound, certificate,
                                       wall_time_ms))
        return records

    def run(self):
        """
        Run all trials (in parallel) and collect the records ordered by trial id.
        :return: The CampaignSummary.
        """
        configuration = self.configuration
        logger.info("Running " + str(configuration.n_trials) + " trials of " + configuration.name + " on "
                    + str(self.threads) + " thread(s)...")

        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            results = list(executor.map(self.run_trial, range(configuration.n_trials)))

        self.records = [record for trial_records in results for record in trial_records]
        if len(self.records) != configuration.n_trials * len(configuration.estimators):
            raise IllegalStateError("Campaign " + configuration.name + " lost trial records.")

        logger.info(str(len(self.records)) + " trial records have been collected.")
        return self.summarize()

    def summarize(self):
        configuration = self.configuration
        estimator_summaries = {}
        for estimator_name in configuration.estimator_names:
            records = [record for record in self.records if record.estimator == estimator_name]
            estimator_summaries[estimator_name] = self._summarize_estimator(estimator_name, records)

        gap_condition_ok = None
        if configuration.experiment == "pca":
            gap_condition_ok = bool(self.true_gap >= 16.0 * self.sigma
                                    * math.sqrt(self.n_blocks / configuration.n_samples))

        return CampaignSummary(configuration.name, configuration.experiment, self.seed, configuration.n_trials,
                               self.n_blocks, estimator_summaries, configuration.config_dict,
                               r_weak=self.r_weak, sigma=self.sigma, weak_term_source=self.weak_term_source,
                               true_gap=self.true_gap, gap_condition_ok=gap_condition_ok,
                               max_outliers=max(self.outlier_counts.values(), default=0))

    def _summarize_estimator(self, estimator_name, records):
        bound, failure_cap = self.bound_for(estimator_name)
        errors = np.array([record.error for record in records])
        failures = sum(1 for record in records if not record.within_bound)
        failure_fraction = failures / len(records) if records else 0.0

        summary = {
            "quantiles": {str(q): float(np.percentile(errors, q)) for q in QUANTILES} if records else {},
            "mean_error": float(np.mean(errors)) if records else None,
            "max_error": float(np.max(errors)) if records else None,
            "failure_fraction": failure_fraction,
            "theoretical_failure_cap": failure_cap,
            "bound_value": bound if math.isfinite(bound) else None,
            "within_cap": failure_fraction <= failure_cap,
            "expected_ok": failure_fraction <= EXPECTED_FAILURE_FRACTION,
        }

        if estimator_name == "tukey_mom" and records:
            depth_lower, _ = depth_range(self.n_blocks, self.configuration.dim)
            min_depth = min(int(record.certificate) for record in records)
            summary["min_depth"] = min_depth
            summary["depth_lower_bound"] = depth_lower
            if min_depth < depth_lower:
                logger.warning("Depth certificate " + str(min_depth) + " below the guaranteed "
                               + str(depth_lower) + " for " + self.configuration.name + ".")

        if not summary["within_cap"]:
            logger.warning("Failure fraction of " + estimator_name + " (" + str(failure_fraction)
                           + ") exceeds the theoretical cap " + str(failure_cap) + ".")
        elif not summary["expected_ok"]:
            logger.warning("Failure fraction of " + estimator_name + " (" + str(failure_fraction)
                           + ") is within the cap but above " + str(EXPECTED_FAILURE_FRACTION) + ".")
        return summary


def run_campaign(configuration, seed=None, threads=None):
    """
    Run a campaign for an experiment configuration.
    :return: (CampaignSummary, list of TrialRecord ordered by trial id)
    """
    campaign = Campaign(configuration, seed, threads)
    summary = campaign.run()
    return summary, campaign.records


##################
# output files   #
##################

def write_trials_csv(records, file_path):
    """
    Export trial records to a UTF-8 CSV file with LF line endings.
    :param records: List of TrialRecord.
    :param file_path: Target file.
    """
    _create_parent_dir(file_path)
    with codecs.open(file_path, 'w', encoding='utf8') as fp:
        logger.info('Exporting trial records to ' + file_path + '...')
        writer = csv.writer(fp, delimiter=',', lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.to_row())
        logger.info(str(len(records)) + ' trial records have been exported.')


def read_trials_csv(file_path):
    """ Read trial records written by write_trials_csv. """
    records = []
    with codecs.open(file_path, encoding='utf8') as fp:
        reader = csv.reader(fp, delimiter=',')
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise IllegalArgumentError("Unexpected header in trial file " + file_path + ": " + str(header))
        for row in reader:
            certificate = None
            if row[5]:
                certificate = float(row[5]) if any(c in row[5] for c in ".einf") else int(row[5])
            record = TrialRecord(row[0], row[1], float(row[2]), float(row[3]), certificate, float(row[6]))
            if record.within_bound != (row[4] == "true"):
                raise IllegalStateError("Inconsistent within_bound flag in trial " + row[0] + ".")
            records.append(record)
    return records


def write_summary_json(summary, file_path):
    _create_parent_dir(file_path)
    with codecs.open(file_path, 'w', encoding='utf8') as fp:
        logger.info('Exporting campaign summary to ' + file_path + '...')
        fp.write(json.dumps(summary.to_dict(), indent=2, allow_nan=False))
        fp.write("\n")


def load_summary_json(file_path):
    with codecs.open(file_path, encoding='utf8') as fp:
        return CampaignSummary.from_dict(json.load(fp))


def _create_parent_dir(file_path):
    parent = os.path.dirname(file_path)
    if parent and not os.path.exists(parent):
        os.makedirs(parent)


emit_csv = write_trials_csv
emit_json = write_summary_json
