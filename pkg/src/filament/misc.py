"""
Helpers shared by the filament modules: stage timing, the console logger of ``fil``, settings
files and output directories
"""

import errno
import logging
import os
import sys
import time
from collections import OrderedDict
from pathlib import Path
from typing import Mapping, Optional

import numpy as np
import yaml
import yamlloader

from filament.global_vars import SETTINGS_FILE

logger = logging.getLogger(__name__)

# key/value lines of the reports printed by fil
MSG_FORMAT = "{:30s} : {}"

LOG_FORMATS = {
    "long": logging.Formatter("[%(asctime)s] %(levelname)8s --- %(message)s "
                              "(%(filename)s:%(lineno)s)", datefmt="%Y-%m-%d %H:%M:%S"),
    "normal": logging.Formatter("%(levelname)6s : %(message)s"),
    "clean": logging.Formatter("%(message)s"),
}


class Timer(object):
    """Time one compiler stage

    Parameters
    ----------
    message : str
        First column of the reported line
    name : str, optional
        The stage, e.g. "typecheck alu.fil"
    verbose : bool, optional
        If True, report the elapsed time at INFO level when the stage ends
    units : str, optional
        numpy time unit of the report. Default 'ms'
    n_digits : int, optional
        Decimals of the reported duration

    Attributes
    ----------
    secs: float
        Elapsed seconds, set when the block exits

    Examples
    --------
    >>> with Timer(name="parse", verbose=False) as timer:
    ...     _ = sum(range(10))
    >>> timer.secs >= 0
    True
    """

    def __init__(self, message="Elapsed time", name="stage", verbose=True, units="ms",
                 n_digits=1, field_width=20):
        self.message = message
        self.name = name
        self.units = units
        self.verbose = verbose
        self.secs = None
        self.duration = None
        self.line = "{{:<{w}s}} {{:<{w}s}} : {{:>10.{d}f}} {{}}".format(w=field_width,
                                                                       d=n_digits)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *args):
        elapsed = np.timedelta64(int(1e9 * (time.perf_counter() - self.start)), "ns")
        self.secs = float(elapsed / np.timedelta64(1, "s"))
        self.duration = float(elapsed / np.timedelta64(1, self.units))
        if self.verbose:
            logger.info(self.line.format(self.message, self.name, self.duration, self.units))


def make_directory(directory):
    """Create an output directory and its parents unless it exists already

    Raises
    ------
    OSError
        If ``directory`` exists as a file or cannot be created
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True)
        logger.debug("Created output directory {}".format(directory))
    except OSError as exc:
        if exc.errno != errno.EEXIST or not directory.is_dir():
            logger.warning("Cannot create the output directory {}: {}".format(directory, exc))
            raise


def merge_loggers(main_logger, logger_name_to_merge, logger_level_to_merge=logging.INFO):
    """
    Let a package logger write to the handlers of the main logger

    Parameters
    ----------
    main_logger: Logger
        Logger created by :func:`create_logger`
    logger_name_to_merge: str
        Name of the package logger, e.g. "filament"
    logger_level_to_merge: int
        Level given to the package logger

    Returns
    -------
    Logger:
        The package logger
    """
    package_logger = logging.getLogger(logger_name_to_merge)
    package_logger.setLevel(logger_level_to_merge)
    for handler in main_logger.handlers:
        if handler not in package_logger.handlers:
            package_logger.addHandler(handler)
    return package_logger


def create_logger(name="root",
                  log_file=None,
                  console_log_level=logging.INFO,
                  console_log_format_long=False,
                  console_log_format_clean=False,
                  file_log_level=logging.INFO,
                  file_log_format_long=True,
                  stream=None,
                  ) -> logging.Logger:
    """Create the logger of a command line tool

    Parameters
    ----------
    name : str, optional
        Name of the logger. Default = "root"
    log_file : str, optional
        Also write the log to this file
    console_log_level: int, optional
        Level of the console handler. Defaults to logging.INFO
    console_log_format_long : bool
        Console lines carry a time stamp and the source location
    console_log_format_clean : bool
        Console lines carry the message only. Cannot be combined with
        ``console_log_format_long``
    file_log_level: int, optional
        Level of the file handler. Defaults to logging.INFO
    file_log_format_long: bool, optional
        Use the long format in the log file. Default to True
    stream: file, optional
        Stream of the console handler. Defaults to stderr, which keeps stdout free for the
        ``--json`` and Low output

    Returns
    -------
    logging.Logger

    Examples
    --------
    >>> logger = create_logger(stream=sys.stdout)
    >>> logger.info("Typechecked alu.fil")
      INFO : Typechecked alu.fil
    """
    if console_log_format_clean and console_log_format_long:
        raise AssertionError("Pick either the long or the clean console format, not both")

    if console_log_format_long:
        console_format = "long"
    elif console_log_format_clean:
        console_format = "clean"
    else:
        console_format = "normal"

    _logger = logging.getLogger(name)
    _logger.setLevel(logging.DEBUG)
    _logger.handlers = []

    console = logging.StreamHandler(stream=stream or sys.stderr)
    console.setLevel(console_log_level)
    console.setFormatter(LOG_FORMATS[console_format])
    _logger.addHandler(console)

    if log_file is not None:
        file_handler = logging.FileHandler(log_file, mode="w")
        file_handler.setLevel(file_log_level)
        file_handler.setFormatter(LOG_FORMATS["long" if file_log_format_long else "normal"])
        _logger.addHandler(file_handler)

    return _logger


def read_settings_file(file_name=SETTINGS_FILE) -> OrderedDict:
    """Read a yaml settings file, keeping the order of its keys

    A path that does not exist is looked up by its base name in the package directory, which
    ships the default ``settings.yml``

    Raises
    ------
    AssertionError:
        In case the file can not be found in either place
    """
    if os.path.exists(file_name):
        logger.info("Loading settings file {}".format(file_name))
        settings_file = file_name
    else:
        settings_file = os.path.join(os.path.dirname(__file__), os.path.basename(file_name))
        logger.debug("Loading default settings {}".format(settings_file))
    try:
        with open(settings_file, "r") as stream:
            settings = yaml.load(stream=stream, Loader=yamlloader.ordereddict.SafeLoader)
    except IOError as err:
        raise AssertionError("Settings file {} not found: {}".format(file_name, err))

    return settings or OrderedDict()


def merge_settings(defaults: Mapping, overrides: Optional[Mapping]) -> OrderedDict:
    """Recursively lay the ``overrides`` over the ``defaults``

    Examples
    --------
    >>> merge_settings({"fuzz": {"seed": 0, "trials": 10}}, {"fuzz": {"trials": 5}})
    OrderedDict([('fuzz', OrderedDict([('seed', 0), ('trials', 5)]))])
    """
    merged = OrderedDict()
    for key, value in defaults.items():
        merged[key] = merge_settings(value, {}) if isinstance(value, Mapping) else value
    for key, value in (overrides or {}).items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_settings(merged[key], value)
        else:
            if key not in merged:
                logger.warning("Setting {} has no default".format(key))
            merged[key] = value
    return merged


def load_settings(user_file: Optional[str] = None) -> OrderedDict:
    """Package defaults with an optional user settings file merged over them"""
    settings = read_settings_file(SETTINGS_FILE)
    if user_file is not None:
        if not os.path.exists(user_file):
            raise AssertionError("Settings file {} does not exist".format(user_file))
        settings = merge_settings(settings, read_settings_file(user_file))
    return merge_settings(settings, {})


def print_banner(title, symbol="-", width=80, to_stdout=False):
    """Frame ``title`` by lines of ``symbol``

    Examples
    --------
    >>> print_banner("fuzz report", width=20, to_stdout=True)
    <BLANKLINE>
    --------------------
    | fuzz report      |
    --------------------
    """
    side = "|" if symbol == "-" else symbol
    message = "{}\n{} {:{}} {}\n{}".format(symbol * width, side, title, width - 4, side,
                                           symbol * width)
    if to_stdout:
        print("\n{}".format(message))
        sys.stdout.flush()
    else:
        logger.info("\n{}".format(message))
