import json
import logging
from inspect import signature

import os
from jsmin import jsmin

from estimator.contamination import DistributionSpec, ContaminationSpec
from harness import estimators
from harness.block_count import BlockCountRule
from util.exceptions import IllegalArgumentError, IllegalConfigurationError

# get root logger
logger = logging.getLogger('robust-mom_logger')

EXPERIMENTS = ("mean", "covariance", "tukey", "pca", "lemma7")
NORMS = ("l2", "linf")
ERROR_NORMS = ("operator", "frobenius")
WEAK_TERMS = ("auto", "oracle")

# optional sections and their defaults
DEFAULT_POOL = {"n_random": 500, "use_data_hint": True, "norm": "l2"}
DEFAULT_COVARIANCE = {"center": "mom_mean", "psd_project": True, "error_norm": "operator"}
DEFAULT_PCA = {"rank": 1}
DEFAULT_TUKEY = {"n_dirs": 512, "n_anneal_iters": 200}
DEFAULT_LEMMA7 = {"alpha": 2.0, "n_directions": 100}
DEFAULT_BLOCK_RULE = {"c_vc": 4, "c_out": 16}
DEFAULT_ORACLE_MC = 20000
SEED_LIMIT = 2 ** 64


class ExperimentConfiguration(object):
    """
    An experiment configuration specifies:
        * the experiment (mean, covariance, tukey, pca, lemma7)
        * the clean law and the contamination
        * sample size, dimension, and block count (fixed or "auto(delta)")
        * the direction pool, the estimators to compare, and the number of seeded trials
    """

    def __init__(self, name, config_dict):
        """
        Initialize an experiment configuration.
        :param name: Name of the experiment (file name without extension).
        :param config_dict: A dictionary with all configuration parameters.
        """

        try:
            # name of configured experiment
            self.name = name
            # raw configuration, echoed in the campaign summary
            self.config_dict = config_dict
            # experiment kind
            self.experiment = config_dict["experiment"]
            if self.experiment not in EXPERIMENTS:
                raise IllegalConfigurationError("Unknown experiment: " + str(self.experiment))
            # sample size, dimension, trials, and seed
            self.n_samples = ExperimentConfiguration._positive_int(config_dict, "n_samples")
            self.dim = ExperimentConfiguration._positive_int(config_dict, "dim")
            self.n_trials = ExperimentConfiguration._positive_int(config_dict, "n_trials")
            self.seed = int(config_dict["seed"])
            if not 0 <= self.seed < SEED_LIMIT:
                raise IllegalConfigurationError("Seed must be an unsigned 64-bit integer.")
            # block count: integer or "auto(delta)"
            self.block_rule = BlockCountRule(config_dict["n_blocks"])
            # clean law of the samples
            self.distribution = DistributionSpec.from_dict(config_dict["distribution"], self.dim)
            # contamination (optional, default: none)
            self.contamination = ExperimentConfiguration._parse_contamination(
                config_dict.get("contamination", {}), self.dim)
            # optional sections
            self.pool = ExperimentConfiguration._section(config_dict, "pool", DEFAULT_POOL)
            self.covariance = ExperimentConfiguration._section(config_dict, "covariance", DEFAULT_COVARIANCE)
            self.pca = ExperimentConfiguration._section(config_dict, "pca", DEFAULT_PCA)
            self.tukey = ExperimentConfiguration._section(config_dict, "tukey", DEFAULT_TUKEY)
            self.lemma7 = ExperimentConfiguration._section(config_dict, "lemma7", DEFAULT_LEMMA7)
            self.block_constants = ExperimentConfiguration._section(config_dict, "block_rule", DEFAULT_BLOCK_RULE)
            self.oracle_mc = int(config_dict.get("oracle_mc", DEFAULT_ORACLE_MC))
            # "auto": analytic R and sigma where known, "oracle": always Monte Carlo
            self.weak_term = config_dict.get("weak_term", "auto")
            # wall time makes the trial CSV non-deterministic, so it is off by default
            self.record_timing = bool(config_dict.get("record_timing", False))
            self._validate_sections()
            # load estimators by name
            estimator_names = config_dict.get("estimators")
            if estimator_names is None:
                estimator_names = estimators.DEFAULT_ESTIMATORS[self.experiment]
            if not estimator_names:
                raise IllegalConfigurationError("At least one estimator must be configured.")
            self.estimator_names = list(estimator_names)
            if len(set(self.estimator_names)) != len(self.estimator_names):
                raise IllegalConfigurationError("Estimator names must be unique: " + str(self.estimator_names))
            self.estimators = []
            for estimator_name in self.estimator_names:
                self.estimators.append(self._load_estimator(estimator_name))

        except KeyError as e:
            raise IllegalConfigurationError("Reading configuration failed: Parameter " + str(e) + " not found.")
        except (TypeError, ValueError, IllegalArgumentError) as e:
            raise IllegalConfigurationError("Reading configuration failed: " + str(e))

    @staticmethod
    def _positive_int(config_dict, key):
        value = config_dict[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise IllegalConfigurationError("Parameter " + key + " must be a positive integer, got " + str(value) + ".")
        return value

    @staticmethod
    def _section(config_dict, key, defaults):
        section = config_dict.get(key, {})
        if not isinstance(section, dict):
            raise IllegalConfigurationError("Section " + key + " must be an object.")
        unknown = set(section.keys()) - set(defaults.keys())
        if unknown:
            raise IllegalConfigurationError("Unknown parameter(s) in section " + key + ": "
                                            + ", ".join(sorted(unknown)))
        return {**defaults, **section}

    @staticmethod
    def _parse_contamination(section, dim):
        q_spec = None
        if "q_distribution" in section:
            q_spec = DistributionSpec.from_dict(section["q_distribution"], dim)
        return ContaminationSpec(section.get("model", "none"), section.get("eps_corrupt", 0.0),
                                 section.get("strategy"), section.get("magnitude", 0.0), q_spec)

    def _validate_sections(self):
        if self.pool["norm"] not in NORMS:
            raise IllegalConfigurationError("Unknown pool norm: " + str(self.pool["norm"]))
        if int(self.pool["n_random"]) < 0:
            raise IllegalConfigurationError("pool.n_random must not be negative.")
        if self.covariance["center"] not in ("none", "mom_mean"):
            raise IllegalConfigurationError("Unknown covariance center: " + str(self.covariance["center"]))
        if self.covariance["error_norm"] not in ERROR_NORMS:
            raise IllegalConfigurationError("Unknown error norm: " + str(self.covariance["error_norm"]))
        if self.experiment == "pca" and not 1 <= int(self.pca["rank"]) < self.dim:
            raise IllegalConfigurationError("pca.rank must be in [1, dim-1].")
        if float(self.lemma7["alpha"]) <= 1.0:
            raise IllegalConfigurationError("lemma7.alpha must be > 1.")
        if int(self.lemma7["n_directions"]) < 1 or int(self.tukey["n_dirs"]) < 1:
            raise IllegalConfigurationError("Direction counts must be positive.")
        if self.weak_term not in WEAK_TERMS:
            raise IllegalConfigurationError("Unknown weak_term: " + str(self.weak_term))
        if self.oracle_mc < 10000:
            raise IllegalConfigurationError("oracle_mc must be at least 10000.")

    def _load_estimator(self, estimator_name):
        """
        Load an estimator function by name and check its form (must have one parameter named "trial").
        :param estimator_name: Name of the estimator function to load.
        :return: The estimator function.
        """
        output_kind = estimators.OUTPUT_KINDS.get(estimator_name)
        if output_kind is None:
            raise IllegalConfigurationError("Parsing configuration file failed: Estimator "
                                            + str(estimator_name) + " not found.")
        if output_kind != estimators.EXPERIMENT_OUTPUTS[self.experiment]:
            raise IllegalConfigurationError("Estimator " + estimator_name + " cannot be used in a "
                                            + self.experiment + " experiment.")
        estimator_function = getattr(estimators, estimator_name)
        estimator_parameters = signature(estimator_function).parameters
        # check if estimator has the correct form (only one parameter named "trial")
        if len(estimator_parameters) == 1 and "trial" in estimator_parameters:
            return estimator_function
        raise IllegalConfigurationError("Invalid estimator: " + str(estimator_name))

    def corrupt_count(self):
        return self.contamination.corrupt_count(self.n_samples)

    def resolve_n_blocks(self):
        dim = self.dim
        return self.block_rule.resolve(dim, self.corrupt_count(), self.n_samples,
                                       self.block_constants["c_vc"], self.block_constants["c_out"])

    @classmethod
    def create_from_json(cls, json_config_file):
        """
        Create experiment configuration from a JSON file.
        :param json_config_file: Path to the JSON file with the configuration.
        """

        logger.info("Reading experiment configuration from JSON file...")

        if not os.path.isfile(json_config_file):
            raise IllegalConfigurationError("Configuration file not found: " + str(json_config_file))

        # read config file
        with open(json_config_file, encoding='utf8') as config_file:
            # remove comments from JSON file (which we allow, but the standard does not)
            stripped_json = jsmin(config_file.read())
            # parse JSON file
            try:
                config_dict = json.loads(stripped_json)
            except ValueError as e:
                raise IllegalConfigurationError("Parsing configuration file failed: " + str(e))

        if not isinstance(config_dict, dict):
            raise IllegalConfigurationError("Configuration must be a JSON object.")

        name = os.path.basename(json_config_file).split(".")[0]
        experiment_config = ExperimentConfiguration(name, config_dict)
        logger.info("Experiment configuration successfully imported: " + str(name))

        return experiment_config
