"""Riemann problem for the one-dimensional cold-plasma model.

    V_t + V V_x = -E,    E_t + V E_x = V,    n = 1 - E_x

with piecewise-constant data. Each half of a period is a rarefaction fan or a
singular (delta) shock; phases alternate and the solution is 2*pi periodic.
"""

from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
