import sys as _sys
import logging as _logging

if _sys.version_info < (3, 8):
    raise ImportError("skforge requires Python >= 3.8")

# Implementation details shared by the submodules
import skforge.detail as detail # noqa

# Version and runtime configuration
import skforge.config as _config

__version__ = _config.SKFORGE_VERSION

# Exception hierarchy
import skforge.errors as errors # noqa

# Math constants and precision helpers
import skforge.const as const  # noqa

# Quaternion arithmetic and geometry on SU(2)
import skforge.quaternion as quaternion  # noqa

# Free group words, Elkasapy words and step templates
import skforge.words as words  # noqa

# Exact truncated power series
import skforge.series as series  # noqa

# Gate sets and nets
import skforge.net as net  # noqa

# Roughly exponential steps
import skforge.steps as steps  # noqa

# Zigzag synthesis and the balanced-commutator baseline
import skforge.zigzag as zigzag  # noqa

_logger = _logging.getLogger('skforge')
_logger.setLevel(_config.initial_log_level())


def set_log_level(level):
    '''
    Sets the log level of all skforge loggers.

    Args:
        level (int | str): a ``logging`` level such as ``logging.INFO`` or
            its name
    '''
    if isinstance(level, str):
        level = _logging.getLevelName(level.upper())
    _logger.setLevel(level)


def log_level():
    return _logger.level


self = vars()

# Install constants in global scope
for k, v in const.__dict__.items():
    if k.startswith('_'):
        continue
    self[k] = v

# Install the public functions and types of the submodules in global scope
for _m in (errors, quaternion, words, series, net, steps, zigzag):
    for k, v in _m.__dict__.items():
        if k.startswith('_') or getattr(v, '__module__', None) != _m.__name__:
            continue
        self[k] = v

Exception = errors.Exception

del k, v, self, _m
