""" Errors raised by the estimators and the experiment harness. """


class IllegalArgumentError(Exception):
    """
    An estimator or primitive got unusable input: non-finite samples, mismatched dimensions,
    an empty direction pool, or a block count outside [1, N].
    """
    pass


class InsufficientSamplesError(IllegalArgumentError):
    """
    N cannot hold the number of blocks that the confidence level or the corruption count asks for.
    """
    pass


class IllegalStateError(Exception):
    """
    A result failed its own consistency check, e.g. a depth certificate that does not re-evaluate
    or a campaign that lost trial records.
    """
    pass


class IllegalConfigurationError(Exception):
    """
    An experiment configuration (file, key, value range, or estimator name) or a command line override is invalid.
    """
    pass
