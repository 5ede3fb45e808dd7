"""Lattice interpolation, CTMC Poisson solvers and M/M/1 Stein-factor tools."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
