""" Shared value types, RNG streams, and vector/matrix primitives. """

import codecs
import csv
import logging

import numpy as np

from util.exceptions import IllegalArgumentError

# get root logger
logger = logging.getLogger('robust-mom_logger')

SYMMETRY_TOLERANCE = 1e-12
UNIT_NORM_TOLERANCE = 1e-10
DEGENERATE_NORM = 1e-12
# maximal number of random pairs used for difference directions
MAX_HINT_PAIRS = 50


class Dataset(object):
    """
    N sample vectors in d dimensions (one row per sample).
    """

    def __init__(self, values):
        """
        :param values: N x d array-like of finite reals (a flat list is read as N samples with d=1).
        """
        values = np.array(values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise IllegalArgumentError("Dataset must be a two-dimensional array, got " + str(values.ndim)
                                       + " dimensions.")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise IllegalArgumentError("Dataset needs at least one sample and one dimension.")
        if not np.all(np.isfinite(values)):
            raise IllegalArgumentError("Dataset contains NaN or infinite entries.")
        values.setflags(write=False)
        self.values = values

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def dim(self):
        return self.values.shape[1]

    def __str__(self):
        return "Dataset(n_samples=" + str(self.n_samples) + ", dim=" + str(self.dim) + ")"

    @classmethod
    def from_rows(cls, rows):
        return cls([[float(value) for value in row] for row in rows])

    @classmethod
    def from_csv(cls, input_file, delimiter=','):
        """
        Read a dataset from a numeric CSV file (one sample per row, optional header).
        :param input_file: Path to the CSV file.
        :param delimiter: Column delimiter in CSV file (typically ',').
        :return: The dataset.
        """
        logger.info("Reading dataset from " + str(input_file) + "...")

        rows = []
        # read CSV as UTF-8 encoded file (see also http://stackoverflow.com/a/844443)
        with codecs.open(input_file, encoding='utf8') as fp:
            reader = csv.reader(fp, delimiter=delimiter)
            for line_number, row in enumerate(reader):
                row = [value.strip() for value in row if value.strip()]
                if not row:
                    continue
                try:
                    rows.append([float(value) for value in row])
                except ValueError:
                    if line_number == 0:
                        # header
                        continue
                    raise IllegalArgumentError("Non-numeric value in line " + str(line_number + 1) + " of "
                                               + str(input_file) + ".")

        if not rows:
            raise IllegalArgumentError("No samples found in " + str(input_file) + ".")
        if len(set(len(row) for row in rows)) != 1:
            raise IllegalArgumentError("Rows of different length in " + str(input_file) + ".")

        dataset = cls(rows)
        logger.info(str(dataset.n_samples) + " samples have been imported.")
        return dataset


class RngStream(object):
    """
    Counter based random stream: (seed, stream_id) identifies a reproducible sequence,
    distinct pairs give independent sequences. Every call of generator() restarts the stream.
    """

    def __init__(self, seed, stream_id=0, path=()):
        if not 0 <= int(seed) < 2 ** 64 or not 0 <= int(stream_id) < 2 ** 64:
            raise IllegalArgumentError("Seed and stream id must be unsigned 64-bit integers.")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(tag) for tag in path)

    def substream(self, tag):
        """
        Derive a child stream (e.g., one per random step of a trial).
        :param tag: Non-negative integer naming the child.
        :return: The child stream.
        """
        return RngStream(self.seed, self.stream_id, self.path + (tag,))

    def generator(self):
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self.path)
        return np.random.Generator(np.random.Philox(sequence))

    def __eq__(self, other):
        return isinstance(other, RngStream) and (self.seed, self.stream_id, self.path) \
            == (other.seed, other.stream_id, other.path)

    def __hash__(self):
        return hash((self.seed, self.stream_id, self.path))

    def __str__(self):
        return "RngStream(seed=" + str(self.seed) + ", stream_id=" + str(self.stream_id) + ", path=" \
            + str(self.path) + ")"


class DirectionPool(object):
    """
    Finite set of unit vectors standing in for the extreme points of the dual unit ball.
    Directions are deduplicated up to sign (first occurrence wins).
    """

    def __init__(self, directions):
        directions = np.array(directions, dtype=np.float64)
        if directions.ndim != 2 or directions.shape[0] < 1:
            raise IllegalArgumentError("Direction pool needs at least one direction.")
        norms = np.linalg.norm(directions, axis=1)
        if np.any(norms < DEGENERATE_NORM):
            raise IllegalArgumentError("Direction pool contains a zero vector.")
        directions = directions / norms[:, None]

        # |<v, w>| = 1 means v = +-w
        gram = np.abs(directions @ directions.T)
        kept = []
        for index in range(directions.shape[0]):
            if not kept or np.max(gram[index, kept]) < 1.0 - 1e-12:
                kept.append(index)
        directions = directions[kept]
        directions.setflags(write=False)
        self.directions = directions

    @property
    def dim(self):
        return self.directions.shape[1]

    @property
    def size(self):
        return self.directions.shape[0]

    def __len__(self):
        return self.size


def as_vector(v, dim=None):
    """
    Validate a vector (finite entries, optionally of a given dimension).
    :return: The vector as a 1-D float array.
    """
    vector = np.array(v, dtype=np.float64).reshape(-1)
    if vector.size < 1:
        raise IllegalArgumentError("Vector must not be empty.")
    if dim is not None and vector.size != dim:
        raise IllegalArgumentError("Dimension mismatch: expected " + str(dim) + ", got " + str(vector.size) + ".")
    if not np.all(np.isfinite(vector)):
        raise IllegalArgumentError("Vector contains NaN or infinite entries.")
    return vector


def as_sym_matrix(a, dim=None):
    """
    Validate a symmetric matrix (finite, symmetric within 1e-12 relative to the largest entry).
    :return: The matrix as a 2-D float array.
    """
    matrix = np.array(a, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise IllegalArgumentError("Matrix must be square, got shape " + str(matrix.shape) + ".")
    if dim is not None and matrix.shape[0] != dim:
        raise IllegalArgumentError("Dimension mismatch: expected " + str(dim) + ", got " + str(matrix.shape[0]) + ".")
    if not np.all(np.isfinite(matrix)):
        raise IllegalArgumentError("Matrix contains NaN or infinite entries.")
    scale = np.max(np.abs(matrix))
    if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOLERANCE * scale:
        raise IllegalArgumentError("Matrix is not symmetric.")
    return matrix


def symmetrize(a):
    return 0.5 * (a + a.T)


def dot(a, b):
    a = as_vector(a)
    b = as_vector(b, a.size)
    return float(np.dot(a, b))


def trace_inner(a, b):
    """
    Trace duality [a, b] = Tr(a^T b) = sum of entrywise products.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape != b.shape:
        raise IllegalArgumentError("Dimension mismatch: " + str(a.shape) + " vs. " + str(b.shape) + ".")
    return float(np.sum(a * b))


def norm_of(v, norm='l2'):
    vector = as_vector(v)
    if norm == 'l2':
        return float(np.linalg.norm(vector))
    if norm == 'linf':
        return float(np.max(np.abs(vector)))
    raise IllegalArgumentError("Unknown norm: " + str(norm))


def make_direction_pool(dim, n_random, dataset_hint=None, rng=None, norm='l2'):
    """
    Build the finite direction pool used in place of the sup over the dual ball.
    :param dim: Dimension d.
    :param n_random: Number of uniform directions on the unit sphere.
    :param dataset_hint: Optional Dataset (samples or block means); normalized differences of up to
        50 random pairs of its rows are added.
    :param rng: RngStream for the random parts.
    :param norm: 'l2' (unit sphere) or 'linf' (coordinate axes only).
    :return: The DirectionPool.
    """
    if dim < 1 or n_random < 0:
        raise IllegalArgumentError("Direction pool needs dim >= 1 and n_random >= 0.")

    axes = np.eye(dim)
    if norm == 'linf':
        return DirectionPool(axes)
    if norm != 'l2':
        raise IllegalArgumentError("Unknown norm: " + str(norm))

    parts = [axes]
    generator = rng.generator() if rng is not None else None
    if n_random > 0:
        if generator is None:
            raise IllegalArgumentError("Random directions need an RngStream.")
        parts.append(generator.standard_normal((n_random, dim)))

    if dataset_hint is not None and dataset_hint.n_samples >= 2:
        if dataset_hint.dim != dim:
            raise IllegalArgumentError("Dimension mismatch between pool and dataset hint.")
        if generator is None:
            raise IllegalArgumentError("Difference directions need an RngStream.")
        n = dataset_hint.n_samples
        first = generator.integers(0, n, size=MAX_HINT_PAIRS)
        # second index is distinct from first
        second = (first + generator.integers(1, n, size=MAX_HINT_PAIRS)) % n
        parts.append(dataset_hint.values[first] - dataset_hint.values[second])

    candidates = np.vstack(parts)
    # degenerate differences are skipped
    candidates = candidates[np.linalg.norm(candidates, axis=1) >= DEGENERATE_NORM]
    return DirectionPool(candidates)
