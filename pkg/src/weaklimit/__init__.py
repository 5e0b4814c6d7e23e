"""Weak limits of orthogonal polynomials with varying measures."""

from .errors import *  # noqa: F401,F403
from .families import *  # noqa: F401,F403
from .jacobi import *  # noqa: F401,F403
from .limits import *  # noqa: F401,F403
from .recurrence import *  # noqa: F401,F403
from .spectral import *  # noqa: F401,F403

__version__ = "0.1.0"
