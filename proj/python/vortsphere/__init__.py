"""Barotropic vorticity on the unit sphere: spectral fields, simulation,
steady states and stability diagnostics."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
