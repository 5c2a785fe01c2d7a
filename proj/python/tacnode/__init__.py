"""Finite-N and hard-edge tacnode kernels for non-intersecting Brownian bridges."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, DomainError, NumericalError  # noqa: F401
