"""Cavity-QED simulator for the generalized quantum Rabi model.

The compiled RK4 Lindblad kernel is used when it imports; otherwise the
pure-Python fallback is selected (see ``rabisim.kernels.BACKEND``).
"""

from .errors import *  # noqa: F401,F403
from .hilbert import DensityMatrix, Operator, SpaceLayout
from .models import (EffectiveParams, PhysicalParams, TimeDependentGenerator, build_effective,
                     build_full, design_physical, effective_params, rabi_spectrum)
from .presets import PRESETS, Preset
from .dynamics import SolverOptions, Trajectory, evolve, steady_state, leakage_probe
from .kernels import BACKEND
from .config import RunConfig, parse_config

__version__ = "0.1.0"
