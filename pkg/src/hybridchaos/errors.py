"""Exception types raised across the package."""


class HybridChaosError(Exception):
    pass


class SingularInput(HybridChaosError, ValueError):
    """HCM1 input too close to 0 for cot(x) or cot(x**2) to be evaluated."""

    def __init__(self, x: float):
        super().__init__(f"HCM1 input {x!r} is inside the cot singularity guard")
        self.x = x


class DegenerateOrbit(HybridChaosError):
    """Base and companion trajectories stayed bit-identical too long.

    ``result`` carries the :class:`LyapunovResult` with ``exponent = -inf``.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class PerturbationLost(HybridChaosError, ValueError):
    """The perturbation was absorbed by floating-point rounding."""


class DimensionMismatch(HybridChaosError, ValueError):
    pass


class ImageFormatError(HybridChaosError, ValueError):
    pass


class ConfigError(HybridChaosError, ValueError):
    pass
