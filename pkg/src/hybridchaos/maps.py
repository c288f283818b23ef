"""Sine, Logistic-Tent, HCM1, HCM2 and the two-parameter hybrid map.

States live in [0, 1). HCM1 and the final composition are reduced with
``frac(|v|)``; HCM2 uses ``v mod 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from . import _kernels as K
from .errors import ConfigError, SingularInput

UNARY_MAPS = {"identity": K.U_IDENTITY, "sin_pi": K.U_SIN_PI,
              "cos_pi": K.U_COS_PI, "zero": K.U_ZERO}
TRANSFER_MAPS = {"product": K.G_PRODUCT, "sum": K.G_SUM}
BASE_MAPS = {"logistic": K.B_LOGISTIC, "sine": K.B_SINE}
PHI1_CHOICES = {"sin_pi": K.U_SIN_PI, "identity": K.U_IDENTITY}
PHI2_CHOICES = {"sum": K.P_SUM, "product": K.P_PRODUCT, "mean": K.P_MEAN}
ZETA_CHOICES = {"x_n": K.ZETA_XN, "x_next": K.ZETA_XNEXT}

EPS_SING = K.EPS_SING


def _check_choice(name, value, table):
    if value not in table:
        raise ConfigError(f"{name}={value!r}; expected one of {sorted(table)}")


def _check_finite(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) \
            or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class BranchConfig:
    """Weights and function selectors for one (axis, branch) slot of HCM2."""

    omega: float = 1.0
    alpha: float = 1.0
    beta: float = 4.0
    f: str = "sin_pi"
    g: str = "product"
    h: str = "sin_pi"
    base: str = "logistic"

    def __post_init__(self):
        for name in ("omega", "alpha", "beta"):
            _check_finite(name, getattr(self, name))
        _check_choice("f", self.f, UNARY_MAPS)
        _check_choice("h", self.h, UNARY_MAPS)
        _check_choice("g", self.g, TRANSFER_MAPS)
        _check_choice("base", self.base, BASE_MAPS)


_BRANCH1 = BranchConfig(base="logistic")
_BRANCH2 = BranchConfig(base="sine")


@dataclass(frozen=True)
class Hcm2Config:
    """Everything HCM2x/HCM2y leave open: weights, maps and the zeta rule.

    The default is the frozen reference configuration: all omega = alpha = 1,
    beta = 4, f = h = sin(pi t), g(r, a, b) = r*a*b, Logistic base map on
    branch 1 and Sine on branch 2, zeta = x_{n+1}.

    ``literal_superscripts`` reproduces the printed superscripts verbatim
    (omega^y_2 f^y_2 in the x-equation, alpha^y_1 on both y branches).
    """

    x1: BranchConfig = _BRANCH1
    x2: BranchConfig = _BRANCH2
    y1: BranchConfig = _BRANCH1
    y2: BranchConfig = _BRANCH2
    zeta: str = "x_next"
    literal_superscripts: bool = False

    def __post_init__(self):
        _check_choice("zeta", self.zeta, ZETA_CHOICES)
        for slot in ("x1", "x2", "y1", "y2"):
            if not isinstance(getattr(self, slot), BranchConfig):
                raise ConfigError(f"{slot} must be a BranchConfig")

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        weights = np.empty((2, 2, 3), dtype=np.float64)
        selectors = np.empty((2, 2, 4), dtype=np.int64)
        slots = {(K.AXIS_X, 0): self.x1, (K.AXIS_X, 1): self.x2,
                 (K.AXIS_Y, 0): self.y1, (K.AXIS_Y, 1): self.y2}
        for (axis, br), b in slots.items():
            weights[axis, br] = (b.omega, b.alpha, b.beta)
            selectors[axis, br] = (UNARY_MAPS[b.f], TRANSFER_MAPS[b.g],
                                   UNARY_MAPS[b.h], BASE_MAPS[b.base])
        weights.setflags(write=False)
        selectors.setflags(write=False)
        return weights, selectors

    @property
    def zeta_code(self) -> int:
        return ZETA_CHOICES[self.zeta]

    def to_dict(self) -> dict:
        return {"x1": asdict(self.x1), "x2": asdict(self.x2),
                "y1": asdict(self.y1), "y2": asdict(self.y2),
                "zeta": self.zeta,
                "literal_superscripts": self.literal_superscripts}

    @classmethod
    def from_dict(cls, data: dict) -> "Hcm2Config":
        data = dict(data)
        kwargs = {}
        for slot in ("x1", "x2", "y1", "y2"):
            if slot in data:
                base = getattr(cls(), slot)
                overrides = data.pop(slot)
                if not isinstance(overrides, dict):
                    raise ConfigError(f"hcm2.{slot} must be an object")
                unknown = set(overrides) - set(asdict(base))
                if unknown:
                    raise ConfigError(f"unknown keys in hcm2.{slot}: {sorted(unknown)}")
                kwargs[slot] = replace(base, **overrides)
        for key in ("zeta", "literal_superscripts"):
            if key in data:
                kwargs[key] = data.pop(key)
        if data:
            raise ConfigError(f"unknown keys in hcm2: {sorted(data)}")
        return cls(**kwargs)


DEFAULT_HCM2 = Hcm2Config()


@dataclass(frozen=True)
class MapParams:
    """One instance of the hybrid map: control parameters, start, composition."""

    r1: float = 0.01
    r2: float = 0.3
    x0: float = 0.03
    gamma: float = 1e5
    phi1: str = "sin_pi"
    phi2: str = "sum"

    def __post_init__(self):
        for name in ("r1", "r2", "x0", "gamma"):
            _check_finite(name, getattr(self, name))
        if not 0.0 <= self.x0 < 1.0:
            raise ConfigError(f"x0 must lie in [0, 1), got {self.x0!r}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma!r}")
        _check_choice("phi1", self.phi1, PHI1_CHOICES)
        _check_choice("phi2", self.phi2, PHI2_CHOICES)

    def with_(self, **changes) -> "MapParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class State:
    x: float
    step_index: int = 0


@dataclass
class Trajectory:
    samples: np.ndarray
    params: MapParams
    cfg: Hcm2Config = field(default=DEFAULT_HCM2)

    def __len__(self):
        return len(self.samples)


def sine_step(r: float, x: float) -> float:
    return K.sine(float(r), float(x))


def lt1_step(r: float, x: float) -> float:
    return K.lt1(float(r), float(x))


def lt2_step(r: float, x: float) -> float:
    return K.lt2(float(r), float(x))


def lt_step(r: float, x: float) -> float:
    """Logistic-Tent map; LT1 below 0.5, LT2 from 0.5 up."""
    return K.lt(float(r), float(x))


def hcm1_raw(r: float, x: float) -> float:
    """HCM1 branch value before the wrap into [0, 1)."""
    if K.is_singular(float(x)):
        raise SingularInput(x)
    return K.hcm1_raw(float(r), float(x))


def hcm1_step(r: float, x: float) -> float:
    """HCM1 reduced by ``frac(|v|)``.

    Raises :class:`SingularInput` for ``x < 1e-6`` (there ``x*x`` drops under
    the 1e-12 guard). :func:`proposed_step` nudges such inputs instead.
    """
    if K.is_singular(float(x)):
        raise SingularInput(x)
    return K.hcm1(float(r), float(x))


def hcm2x_step(r: float, x: float, y: float,
               cfg: Hcm2Config = DEFAULT_HCM2) -> float:
    w, s = cfg.arrays
    return K.hcm2x(float(r), float(x), float(y), w, s, cfg.literal_superscripts)


def hcm2y_step(r: float, y: float, zeta: float,
               cfg: Hcm2Config = DEFAULT_HCM2) -> float:
    w, s = cfg.arrays
    return K.hcm2y(float(r), float(y), float(zeta), w, s,
                   cfg.literal_superscripts)


def _kernel_args(params: MapParams, cfg: Hcm2Config):
    w, s = cfg.arrays
    return (float(params.r1), float(params.r2), float(params.gamma),
            PHI1_CHOICES[params.phi1], PHI2_CHOICES[params.phi2], w, s,
            cfg.zeta_code, cfg.literal_superscripts)


def proposed_step(params: MapParams, cfg: Hcm2Config = DEFAULT_HCM2,
                  x: float | None = None) -> float:
    """One step of the hybrid map from ``x`` (``params.x0`` when omitted).

    rho_n = HCM1(r1, x), rho_n1 = HCM1(r1, rho_n),
    t1 = HCM2x(r2, rho_n, rho_n1), t2 = HCM2y(r2, rho_n1, zeta),
    x' = frac(|gamma * phi1(phi2(t1, t2))|).
    """
    if x is None:
        x = params.x0
    return K.proposed(*_kernel_args(params, cfg), float(x))


def advance(state: State, params: MapParams,
            cfg: Hcm2Config = DEFAULT_HCM2) -> State:
    return State(proposed_step(params, cfg, state.x), state.step_index + 1)


def iterate(params: MapParams, cfg: Hcm2Config = DEFAULT_HCM2, n: int = 1,
            burn_in: int = 0) -> Trajectory:
    """The ``n`` states after ``burn_in`` discarded steps from ``params.x0``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    samples = K.orbit(*_kernel_args(params, cfg), float(params.x0), int(n),
                      int(burn_in))
    return Trajectory(samples, params, cfg)


def step_many(r1, r2, x, params: MapParams = MapParams(),
              cfg: Hcm2Config = DEFAULT_HCM2) -> np.ndarray:
    """Vectorised single step over arrays of (r1, r2, x).

    Composition settings (gamma, phi1, phi2) come from ``params``.
    """
    r1, r2, x = np.broadcast_arrays(np.asarray(r1, dtype=np.float64),
                                    np.asarray(r2, dtype=np.float64),
                                    np.asarray(x, dtype=np.float64))
    args = _kernel_args(params, cfg)
    out = K.step_batch(np.ascontiguousarray(r1).ravel(),
                       np.ascontiguousarray(r2).ravel(), *args[2:],
                       np.ascontiguousarray(x).ravel())
    return out.reshape(x.shape)
