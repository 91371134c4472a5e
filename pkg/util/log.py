""" Named global logger for the library and the harness. """

import logging

LOG_FORMAT = '%(asctime)s %(name)s %(levelname)s: %(message)s'


def _attach(logger, handler, level):
    handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT))
    handler.setLevel(level)
    logger.addHandler(handler)


def configure_logger(name, log_file=None, console_level=logging.INFO):
    """
    Attach console (stderr) and optional file handlers to a named logger; calling it again is a no-op.
    :param name: Name of global logger.
    :param log_file: Path of a DEBUG log file (None or empty: console only).
    :param console_level: Level of the console handler.
    :return: The configured logger.
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    # stdout carries command output (JSON, bounds), so diagnostics go to stderr
    _attach(logger, logging.StreamHandler(), console_level)
    if log_file:
        _attach(logger, logging.FileHandler(log_file, encoding='utf-8'), logging.DEBUG)
    logger.setLevel(logging.DEBUG)

    return logger
