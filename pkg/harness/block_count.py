from estimator.blocking import choose_block_count
from util.exceptions import IllegalConfigurationError, InsufficientSamplesError
from util.regex import AUTO_BLOCKS_REGEX


class BlockCountRule(object):
    """
    Block count of an experiment: either a fixed K or the rule "auto(delta)".
    """

    def __init__(self, value):
        self.value = value
        self.fixed = None
        self.delta = None
        if isinstance(value, bool):
            raise IllegalConfigurationError("Illegal block count: " + str(value))
        if isinstance(value, int):
            self.fixed = value
        elif isinstance(value, str):
            match = AUTO_BLOCKS_REGEX.fullmatch(value)
            if match:
                try:
                    self.delta = float(match.group(1))
                except ValueError:
                    raise IllegalConfigurationError("Illegal confidence in block count: " + value)
                if not 0.0 < self.delta < 1.0:
                    raise IllegalConfigurationError("Confidence in block count must be in (0, 1): " + value)
            elif value.strip().isdigit():
                self.fixed = int(value)
            else:
                raise IllegalConfigurationError("Illegal block count: " + value)
        else:
            raise IllegalConfigurationError("Illegal block count: " + str(value))
        if self.fixed is not None and self.fixed < 1:
            raise IllegalConfigurationError("Block count must be positive: " + str(value))

    def resolve(self, dim, corrupt_count, n_samples, c_vc=4, c_out=16):
        """
        :return: The number of blocks K for this experiment.
        """
        if self.fixed is not None:
            if self.fixed > n_samples:
                raise IllegalConfigurationError("Block count " + str(self.fixed) + " exceeds n_samples "
                                                + str(n_samples) + ".")
            return self.fixed
        try:
            return choose_block_count(self.delta, dim, corrupt_count, n_samples, c_vc, c_out)
        except InsufficientSamplesError as e:
            raise IllegalConfigurationError(str(e))

    def __str__(self):
        return str(self.value)
