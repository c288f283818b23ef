"""Two-parameter hybrid chaotic map, chaos diagnostics and an image cipher."""

from .errors import (ConfigError, DegenerateOrbit, DimensionMismatch,
                     ImageFormatError, PerturbationLost, SingularInput)
from .maps import (DEFAULT_HCM2, BranchConfig, Hcm2Config, MapParams, State,
                   Trajectory, hcm1_step, hcm2x_step, hcm2y_step, iterate,
                   lt_step, proposed_step, sine_step)

__version__ = "0.1.0"
