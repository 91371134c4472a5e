""" Command-line interface: run campaigns, evaluate depths, estimates, and bounds. """

import argparse
import json
import logging
import math
import os
import sys

from types import SimpleNamespace

import numpy as np

from estimator.covariance_mom import cov_error_bound, pca_error_bound
from estimator.mean_mom import BoundInputs, lemma_failure_cap, mean_error_bound
from estimator.model import Dataset, RngStream, make_direction_pool
from estimator.tukey_depth import depth_1d, depth_exact_2d, depth_randomized, tukey_error_bound
from harness import estimators
from harness.campaign import Campaign, write_summary_json, write_trials_csv
from harness.experiment_configuration import (ExperimentConfiguration, DEFAULT_COVARIANCE, DEFAULT_LEMMA7,
                                              DEFAULT_PCA, DEFAULT_POOL, DEFAULT_TUKEY, SEED_LIMIT)
from util.exceptions import IllegalArgumentError, IllegalConfigurationError, IllegalStateError
from util.regex import VALUE_SEPARATOR_REGEX

# get global logger
logger = logging.getLogger('robust-mom_logger')

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_CONFIG_ERROR = 2

DEPTH_METHODS = {"1d": depth_1d, "exact2d": depth_exact_2d, "random": depth_randomized}
# estimators that need nothing but the data (block_majority needs the true mean)
DATA_ESTIMATORS = sorted(name for name, kind in estimators.OUTPUT_KINDS.items() if kind != "block_fraction")


def get_argument_parser():
    arg_parser = argparse.ArgumentParser(
        prog='robust-mom',
        description='Median-of-means estimators for means, covariances, and PCA with Monte Carlo bound checks.'
    )
    subparsers = arg_parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    run_parser = subparsers.add_parser('run', help='run a Monte Carlo campaign')
    run_parser.add_argument(
        '-c', '--config',
        required=True,
        help='JSON file with experiment configuration.',
        dest='config_file'
    )
    run_parser.add_argument(
        '-o', '--out-dir',
        required=False,
        default='.',
        help='Output directory for summary.json and trials.csv (default: current directory).',
        dest='out_dir'
    )
    run_parser.add_argument(
        '-s', '--seed',
        type=int,
        required=False,
        default=None,
        help='Overrides the configured seed.',
        dest='seed'
    )

    depth_parser = subparsers.add_parser('depth', help='halfspace depth of a point')
    depth_parser.add_argument(
        '-p', '--points',
        required=True,
        help='CSV file with one point per row.',
        dest='points_file'
    )
    depth_parser.add_argument(
        '-e', '--eta',
        required=True,
        help='Query point as comma-separated list.',
        dest='eta'
    )
    depth_parser.add_argument(
        '-m', '--method',
        required=False,
        choices=sorted(DEPTH_METHODS.keys()),
        default=None,
        help='Depth method (default: 1d for d=1, exact2d for d=2, random otherwise).',
        dest='method'
    )
    depth_parser.add_argument(
        '-nd', '--n-dirs',
        type=int,
        required=False,
        default=512,
        help='Number of random directions for method random (default: 512).',
        dest='n_dirs'
    )
    depth_parser.add_argument(
        '-s', '--seed',
        type=int,
        required=False,
        default=0,
        help='Seed for method random (default: 0).',
        dest='seed'
    )

    estimate_parser = subparsers.add_parser('estimate', help='estimate from a data file')
    estimate_parser.add_argument(
        '-d', '--data',
        required=True,
        help='CSV file with one sample per row.',
        dest='data_file'
    )
    estimate_parser.add_argument(
        '-e', '--estimator',
        required=True,
        choices=DATA_ESTIMATORS,
        help='Estimator name.',
        dest='estimator'
    )
    estimate_parser.add_argument(
        '-k', '--blocks',
        type=int,
        required=True,
        help='Number of blocks K.',
        dest='n_blocks'
    )
    estimate_parser.add_argument(
        '-s', '--seed',
        type=int,
        required=False,
        default=0,
        help='Seed for partition and direction pool (default: 0).',
        dest='seed'
    )

    bounds_parser = subparsers.add_parser('bounds', help='evaluate a theoretical bound')
    bounds_parser.add_argument(
        '-x', '--experiment',
        required=True,
        choices=['mean', 'tukey', 'covariance', 'pca', 'lemma7'],
        help='Experiment whose bound is evaluated.',
        dest='experiment'
    )
    bounds_parser.add_argument(
        '--r',
        type=float,
        required=False,
        default=1.0,
        help='Weak variance term R (sigma for covariance and pca).',
        dest='r_weak'
    )
    bounds_parser.add_argument(
        '--k',
        type=int,
        required=True,
        help='Number of blocks K.',
        dest='n_blocks'
    )
    bounds_parser.add_argument(
        '--n',
        type=int,
        required=False,
        default=None,
        help='Number of samples N.',
        dest='n_samples'
    )
    bounds_parser.add_argument(
        '--dim',
        type=int,
        required=False,
        default=1,
        help='Dimension d (tukey).',
        dest='dim'
    )
    bounds_parser.add_argument(
        '--gap',
        type=float,
        required=False,
        default=None,
        help='Eigengap (pca).',
        dest='gap'
    )
    bounds_parser.add_argument(
        '--alpha',
        type=float,
        required=False,
        default=2.0,
        help='Block-majority constant alpha > 1 (lemma7, default: 2).',
        dest='alpha'
    )
    return arg_parser


def parse_vector(text):
    values = [value for value in VALUE_SEPARATOR_REGEX.split(text.strip()) if value]
    if not values:
        raise IllegalArgumentError("Empty vector: " + text)
    try:
        return np.array([float(value) for value in values])
    except ValueError:
        raise IllegalArgumentError("Not a numeric vector: " + text)


def run_command(args):
    if args.seed is not None and not 0 <= args.seed < SEED_LIMIT:
        raise IllegalConfigurationError("Seed must be an unsigned 64-bit integer, got " + str(args.seed) + ".")
    config = ExperimentConfiguration.create_from_json(args.config_file)
    campaign = Campaign(config, args.seed)
    summary = campaign.run()
    write_trials_csv(campaign.records, os.path.join(args.out_dir, 'trials.csv'))
    write_summary_json(summary, os.path.join(args.out_dir, 'summary.json'))
    return EXIT_OK


def depth_command(args):
    points = Dataset.from_csv(args.points_file)
    eta = parse_vector(args.eta)
    if eta.size != points.dim:
        raise IllegalArgumentError("Query point has dimension " + str(eta.size) + ", points have "
                                   + str(points.dim) + ".")
    method = args.method
    if method is None:
        method = {1: "1d", 2: "exact2d"}.get(points.dim, "random")
    if method == "random":
        result = depth_randomized(points.values, eta, n_dirs=args.n_dirs, rng=RngStream(args.seed))
    else:
        result = DEPTH_METHODS[method](points.values, eta)
    print(json.dumps(result.to_dict()))
    return EXIT_OK


def estimate_command(args):
    data = Dataset.from_csv(args.data_file)
    if not 1 <= args.n_blocks <= data.n_samples:
        raise IllegalArgumentError("Number of blocks must be in [1, " + str(data.n_samples) + "].")
    stream = RngStream(args.seed)
    pool = make_direction_pool(data.dim, DEFAULT_POOL["n_random"], dataset_hint=data, rng=stream.substream(3))
    options = SimpleNamespace(tukey=DEFAULT_TUKEY, covariance=DEFAULT_COVARIANCE,
                              pca={**DEFAULT_PCA, "rank": min(DEFAULT_PCA["rank"], max(data.dim - 1, 1))},
                              lemma7=DEFAULT_LEMMA7)
    trial = SimpleNamespace(data=data, n_blocks=args.n_blocks, pool=pool, rng=stream.substream(2), config=options,
                            truth=None, r_weak=None, sigma=None, trial_id=0)
    estimate, certificate = getattr(estimators, args.estimator)(trial)
    if isinstance(certificate, np.integer):
        certificate = int(certificate)
    print(json.dumps({"estimator": args.estimator, "n_blocks": args.n_blocks,
                      "estimate": np.asarray(estimate).tolist(), "certificate": certificate}))
    return EXIT_OK


def bounds_command(args):
    if args.experiment == 'lemma7':
        value = lemma_failure_cap(args.n_blocks, args.alpha)
    else:
        if args.n_samples is None:
            raise IllegalArgumentError("Bound of experiment " + args.experiment + " needs --n.")
        if args.experiment == 'mean':
            value = mean_error_bound(BoundInputs(args.r_weak, args.n_blocks, args.n_samples, args.dim))
        elif args.experiment == 'tukey':
            value = tukey_error_bound(args.r_weak, args.n_blocks, args.n_samples, args.dim)
        elif args.experiment == 'covariance':
            value = cov_error_bound(args.r_weak, args.n_blocks, args.n_samples)
        else:
            if args.gap is None:
                raise IllegalArgumentError("Bound of experiment pca needs --gap.")
            value = pca_error_bound(args.r_weak, args.gap, args.n_blocks, args.n_samples)
    print(repr(float(value)) if math.isfinite(value) else "inf")
    return EXIT_OK


COMMANDS = {"run": run_command, "depth": depth_command, "estimate": estimate_command, "bounds": bounds_command}


def cli_main(argv):
    """
    Parse the arguments and execute a subcommand.
    :param argv: Command line arguments without the program name.
    :return: Exit code (0: success, 1: runtime error, 2: configuration or usage error).
    """
    parser = get_argument_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse has printed usage or help text
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG_ERROR

    try:
        return COMMANDS[args.command](args)
    except IllegalConfigurationError as e:
        logger.error("Configuration error: " + str(e))
        return EXIT_CONFIG_ERROR
    except (IllegalArgumentError, IllegalStateError, OSError) as e:
        logger.error(str(e))
        return EXIT_RUNTIME_ERROR


def main():
    sys.exit(cli_main(sys.argv[1:]))
