"""DVS pixel shot-noise modeling: spectra, event rates, simulation and bias selection."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
