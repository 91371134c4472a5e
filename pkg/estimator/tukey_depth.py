""" Halfspace (Tukey) depth and the Tukey median-of-means. """

import itertools
import logging
import math

import numpy as np

from estimator.mean_mom import block_means_of, geometric_median
from estimator.blocking import lower_median_along
from estimator.model import as_vector
from util.exceptions import IllegalArgumentError, IllegalStateError

# get root logger
logger = logging.getLogger('robust-mom_logger')

TWO_PI = 2.0 * math.pi
# block means scanned by the exact 2-D fallback
FALLBACK_NEIGHBOURS = 16


class DepthResult(object):
    """
    Depth of eta: minimal number of points in a closed halfspace {x: <x - eta, u> <= 0}.
    """

    def __init__(self, depth, n_points, witness_direction):
        self.depth = int(depth)
        self.n_points = int(n_points)
        self.witness_direction = np.asarray(witness_direction, dtype=np.float64)

    @property
    def depth_fraction(self):
        return self.depth / self.n_points

    def to_dict(self):
        return {"depth": self.depth, "depth_fraction": self.depth_fraction,
                "witness_direction": self.witness_direction.tolist()}


class TukeyMomEstimate(object):

    def __init__(self, point, depth, n_blocks, method, candidates_evaluated, means, directions=None):
        self.point = point
        self.depth = depth
        self.n_blocks = n_blocks
        self.method = method
        self.candidates_evaluated = candidates_evaluated
        # block means and direction set the depth certificate refers to
        self.means = means
        self.directions = directions

    def recompute_depth(self):
        return _depth_by_method(self.means, self.point, self.method, self.directions).depth


def _as_points(points, dim=None):
    points = np.array(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1) if dim in (None, 1) else points.reshape(1, -1)
    if points.shape[0] < 1:
        raise IllegalArgumentError("Depth of an empty point set.")
    if dim is not None and points.shape[1] != dim:
        raise IllegalArgumentError("Dimension mismatch: expected " + str(dim) + ", got " + str(points.shape[1]) + ".")
    return points


def count_inside(points, eta, direction):
    """ #{i: <x_i - eta, u> <= 0}. """
    return int(np.count_nonzero((points - eta) @ direction <= 0.0))


def depth_1d(points, eta):
    points = _as_points(points, 1)[:, 0]
    eta = float(as_vector(eta, 1)[0])
    below = int(np.count_nonzero(points <= eta))
    above = int(np.count_nonzero(points >= eta))
    if below <= above:
        return DepthResult(below, points.size, [1.0])
    return DepthResult(above, points.size, [-1.0])


def depth_exact_2d(points, eta):
    """
    Exact halfspace depth in the plane. The count of a direction changes only at directions normal to
    some x_i - eta; sweeping the sorted critical angles and counting at the middle of every arc gives
    the minimum.
    :param points: n x 2 array.
    :param eta: Point in the plane.
    :return: The DepthResult.
    """
    points = _as_points(points, 2)
    eta = as_vector(eta, 2)
    diffs = points - eta
    at_eta = np.all(diffs == 0.0, axis=1)
    n_at_eta = int(np.count_nonzero(at_eta))
    diffs = diffs[~at_eta]
    if diffs.shape[0] == 0:
        return DepthResult(points.shape[0], points.shape[0], [1.0, 0.0])

    # point i is inside for directions phi with (phi - start_i) mod 2pi in [0, pi]
    starts = np.sort(np.mod(np.arctan2(diffs[:, 1], diffs[:, 0]) + 0.5 * math.pi, TWO_PI))
    critical = np.unique(np.mod(np.concatenate([starts, starts + math.pi]), TWO_PI))
    following = np.append(critical[1:], critical[0] + TWO_PI)
    midpoints = 0.5 * (critical + following)

    # count arcs containing each midpoint on the unrolled circle
    unrolled = np.concatenate([starts, starts + TWO_PI, starts + 2.0 * TWO_PI])
    arc_angles = midpoints + TWO_PI
    counts = (np.searchsorted(unrolled, arc_angles, side='right')
              - np.searchsorted(unrolled, arc_angles - math.pi, side='left'))
    best = int(np.argmin(counts))
    witness = np.array([math.cos(midpoints[best]), math.sin(midpoints[best])])
    return DepthResult(count_inside(points, eta, witness), points.shape[0], witness)


def random_directions(n_dirs, dim, rng):
    """ n_dirs uniform directions on the unit sphere. """
    if n_dirs < 1:
        raise IllegalArgumentError("Randomized depth needs at least one direction.")
    draws = rng.generator().standard_normal((n_dirs, dim))
    norms = np.linalg.norm(draws, axis=1)
    # a zero draw has probability zero, replace it by the first axis anyway
    draws[norms == 0.0] = np.eye(dim)[0]
    norms[norms == 0.0] = 1.0
    return draws / norms[:, None]


def depth_randomized(points, eta, n_dirs=512, rng=None, directions=None):
    """
    Minimum of the closed-halfspace count over random directions and their negations;
    an upper bound of the exact depth.
    :param points: n x d array.
    :param eta: Point in R^d.
    :param n_dirs: Number of random directions M.
    :param rng: RngStream for the directions.
    :param directions: Fixed M x d direction set (overrides n_dirs and rng).
    :return: The DepthResult.
    """
    points = np.array(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    eta = as_vector(eta, points.shape[1])
    if directions is None:
        if rng is None:
            raise IllegalArgumentError("Randomized depth needs an RngStream or a direction set.")
        directions = random_directions(n_dirs, points.shape[1], rng)

    projections = (points - eta) @ directions.T
    inside_plus = np.count_nonzero(projections <= 0.0, axis=0)
    inside_minus = np.count_nonzero(projections >= 0.0, axis=0)
    best_plus = int(np.argmin(inside_plus))
    best_minus = int(np.argmin(inside_minus))
    if inside_plus[best_plus] <= inside_minus[best_minus]:
        return DepthResult(inside_plus[best_plus], points.shape[0], directions[best_plus])
    return DepthResult(inside_minus[best_minus], points.shape[0], -directions[best_minus])


def _depth_by_method(points, eta, method, directions=None):
    if method == 'exact1d':
        return depth_1d(points, eta)
    if method == 'exact2d':
        return depth_exact_2d(points, eta)
    if method == 'randomized':
        return depth_randomized(points, eta, directions=directions)
    raise IllegalArgumentError("Unknown depth method: " + str(method))


def depth_range(n, dim):
    """ Maximal depth of n points in R^d lies in [ceil(n/(d+1)), ceil(n/2)]. """
    return int(math.ceil(n / (dim + 1))), int(math.ceil(n / 2))


def _line_intersections(anchors):
    """ Intersections of the lines through pairs of anchors (planar). """
    lines = list(itertools.combinations(range(anchors.shape[0]), 2))
    found = []
    for (a, b), (c, e) in itertools.combinations(lines, 2):
        p, r = anchors[a], anchors[b] - anchors[a]
        q, s = anchors[c], anchors[e] - anchors[c]
        denominator = r[0] * s[1] - r[1] * s[0]
        if abs(denominator) < 1e-15:
            continue
        t = ((q[0] - p[0]) * s[1] - (q[1] - p[1]) * s[0]) / denominator
        found.append(p + t * r)
    return found


def tukey_mom(data, n_blocks, rng, n_dirs=512, n_anneal_iters=200):
    """
    Deepest point with respect to the K block means.
    Candidates (in this order): block means sorted by first coordinate, the coordinate-wise median,
    the geometric median; then one line-search pass per coordinate over midpoints of the projected
    gaps, then random perturbations with shrinking radius. Only strictly deeper points are accepted.
    :param data: Dataset.
    :param n_blocks: Number of blocks K.
    :param rng: RngStream (partition, direction set, perturbations).
    :param n_dirs: Number of random directions for d > 2.
    :param n_anneal_iters: Number of random perturbation steps.
    :return: The TukeyMomEstimate.
    """
    means = block_means_of(data, n_blocks, rng).means
    dim = means.shape[1]
    directions = None
    if dim == 1:
        method = 'exact1d'
    elif dim == 2:
        method = 'exact2d'
    else:
        method = 'randomized'
        directions = random_directions(n_dirs, dim, rng.substream(1))

    def depth_of(eta):
        return _depth_by_method(means, eta, method, directions).depth

    ordered = means[np.argsort(means[:, 0], kind='stable')]
    candidates = list(ordered) + [lower_median_along(means, axis=0), geometric_median(means)]

    best_point, best_depth = None, -1
    for candidate in candidates:
        value = depth_of(candidate)
        if value > best_depth:
            best_point, best_depth = np.array(candidate), value
    evaluated = len(candidates)

    # line search, one pass per coordinate
    for j in range(dim):
        values = np.unique(means[:, j])
        for midpoint in 0.5 * (values[:-1] + values[1:]):
            candidate = best_point.copy()
            candidate[j] = midpoint
            value = depth_of(candidate)
            evaluated += 1
            if value > best_depth:
                best_point, best_depth = candidate, value

    upper = depth_range(n_blocks, dim)[1]
    if n_anneal_iters > 0 and best_depth < upper:
        generator = rng.substream(2).generator()
        radius = float(np.median(np.abs(means - best_point))) + 1e-12
        for iteration in range(n_anneal_iters):
            shrink = 1.0 - iteration / n_anneal_iters
            candidate = best_point + radius * shrink * generator.standard_normal(dim)
            value = depth_of(candidate)
            evaluated += 1
            if value > best_depth:
                best_point, best_depth = candidate, value

    lower = depth_range(n_blocks, dim)[0]
    if method == 'exact2d' and best_depth < lower:
        order = np.argsort(np.linalg.norm(means - best_point, axis=1))[:FALLBACK_NEIGHBOURS]
        for candidate in _line_intersections(means[order]):
            value = depth_of(candidate)
            evaluated += 1
            if value > best_depth:
                best_point, best_depth = np.array(candidate), value

    if method != 'randomized' and best_depth < lower:
        logger.warning("Tukey MOM depth " + str(best_depth) + " below the guaranteed " + str(lower) + ".")

    estimate = TukeyMomEstimate(best_point, best_depth, n_blocks, method, evaluated, means, directions)
    if estimate.recompute_depth() != best_depth:
        raise IllegalStateError("Depth certificate of the Tukey MOM estimate does not re-evaluate.")

    logger.debug("tukey_mom: K=" + str(n_blocks) + ", method=" + method + ", depth=" + str(best_depth)
                 + ", candidates=" + str(evaluated) + ".")
    return estimate


def tukey_error_bound(r_weak, n_blocks, n_samples, dim):
    """ sqrt(8d) R sqrt(K/N). """
    if r_weak < 0 or n_blocks < 1 or n_samples < 1 or dim < 1:
        raise IllegalArgumentError("Tukey bound needs R >= 0 and positive K, N, d.")
    return math.sqrt(8.0 * dim) * r_weak * math.sqrt(n_blocks / n_samples)


def tukey_failure_cap(n_blocks, dim):
    """ exp(-K/(32 d^2)). """
    return math.exp(-n_blocks / (32.0 * dim ** 2))


def block_majority_check(block_stats, alpha):
    """
    True iff at least (alpha-1)/alpha * K of the K block statistics are False.
    :param block_stats: K booleans (f evaluated on each block).
    :param alpha: Constant > 1.
    """
    block_stats = np.asarray(block_stats, dtype=bool).reshape(-1)
    if block_stats.size < 1:
        raise IllegalArgumentError("Block majority check needs at least one block.")
    if alpha <= 1:
        raise IllegalArgumentError("alpha must be > 1.")
    n_false = block_stats.size - int(np.count_nonzero(block_stats))
    return n_false >= (alpha - 1.0) / alpha * block_stats.size
