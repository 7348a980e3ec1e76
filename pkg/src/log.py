"""Logger helpers; every module logs under the ``fgssl`` namespace."""

import logging
import sys
from typing import Union

ROOT_LOGGER = "fgssl"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    """Return the logger for a module, e.g. ``get_logger(__name__)``."""
    short = name.split(".")[-1]
    return logging.getLogger(f"{ROOT_LOGGER}.{short}")


def configure_logging(level: Union[int, str] = logging.WARNING) -> logging.Logger:
    """Install a single stderr handler on the package logger."""
    logger = logging.getLogger(ROOT_LOGGER)
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ValueError(f"Unknown log level '{level}'")
        level = resolved
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False
    return logger
