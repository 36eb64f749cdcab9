"""Squeezing of a damping-modulated resonator: Gaussian moment engine,
truncated-Fock oracle, readout error analysis."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
