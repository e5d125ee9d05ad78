# -*- coding: utf-8 -*-
"""
filament: a timeline-typed hardware description language

The ``fil`` command (:mod:`filament.cli`) checks, compiles, simulates and fuzzes programs.
"""
import logging
from logging import NullHandler

from pkg_resources import DistributionNotFound, get_distribution

try:
    __version__ = get_distribution("filament").version
except DistributionNotFound:
    # running from a source tree that was never installed
    __version__ = "unknown"

# library modules only log; handlers are attached by fil or by the application
logging.getLogger(__name__).addHandler(NullHandler())
