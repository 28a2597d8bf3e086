"""Polarization-to-OAM entanglement transfer simulator."""

from ._oament import *  # noqa: F401,F403
from ._oament import Error, IoError, NumericalError, ValidationError  # noqa: F401

__version__ = "0.1.0"
