"""Quantum Brownian motion: HPZ coefficients and Fourier-domain Wigner evolution."""

from ._qbm import *  # noqa: F401,F403
from ._qbm import __version__  # noqa: F401
