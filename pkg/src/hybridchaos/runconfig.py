"""Run configuration: defaults < JSON config file < command-line flags.

Config file layout (every section and key optional)::

    {
      "map":      {"r1": 0.01, "r2": 0.3, "x0": 0.03, "gamma": 1e5,
                   "phi1": "sin_pi", "phi2": "sum"},
      "hcm2":     {"zeta": "x_next", "literal_superscripts": false,
                   "x1": {"omega": 1, "alpha": 1, "beta": 4, "f": "sin_pi",
                          "g": "product", "h": "sin_pi", "base": "logistic"},
                   "x2": {...}, "y1": {...}, "y2": {...}},
      "analysis": {"n": 140000, "bins": 100, ...},
      "crypto":   {"rounds": 2, "nonce": 0, "trials": 20, "seed": 0},
      "out": "results"
    }
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .maps import Hcm2Config, MapParams


@dataclass(frozen=True)
class AnalysisSettings:
    n: int = 140_000
    burn_in: int = 0
    bins: int = 100
    sweep: str = "r1"
    lyap_sweep: str = "both"
    lyap_points: int = 50
    range: tuple[float, float] = (0.0, 1.0)
    points: int = 100
    keep: int = 200
    bif_burn_in: int = 500
    iters: int = 5000
    d0: float = 1e-10
    method: str = "stage"
    target: str = "x0"
    delta: float = 1e-16
    horizon: int = 100
    threshold: float = 0.1
    steps: int = 500
    workers: int = 1

    def validate(self):
        positive = ("n", "bins", "points", "lyap_points", "keep", "iters",
                    "horizon", "steps", "workers")
        for name in positive:
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"analysis.{name} must be a positive integer, got {v!r}")
        for name in ("burn_in", "bif_burn_in"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"analysis.{name} must be a non-negative integer, got {v!r}")
        if self.bins < 2:
            raise ConfigError("analysis.bins must be >= 2")
        if self.sweep not in ("r1", "r2"):
            raise ConfigError(f"analysis.sweep must be r1 or r2, got {self.sweep!r}")
        if self.lyap_sweep not in ("r1", "r2", "both"):
            raise ConfigError(
                f"analysis.lyap_sweep must be r1, r2 or both, got {self.lyap_sweep!r}")
        if self.method not in ("stage", "step"):
            raise ConfigError(f"analysis.method must be stage or step, got {self.method!r}")
        if self.target not in ("x0", "r1", "r2"):
            raise ConfigError(f"analysis.target must be x0, r1 or r2, got {self.target!r}")
        lo, hi = self.range
        if not lo < hi:
            raise ConfigError(f"analysis.range needs lo < hi, got {self.range!r}")
        if not 0.0 < self.d0 <= 1e-9:
            raise ConfigError("analysis.d0 must lie in (0, 1e-9]")
        if self.iters < 1000:
            raise ConfigError("analysis.iters must be >= 1000")
        if self.delta == 0:
            raise ConfigError("analysis.delta must be non-zero")


@dataclass(frozen=True)
class CryptoSettings:
    rounds: int = 2
    nonce: int = 0
    trials: int = 20
    seed: int = 0

    def validate(self):
        for name in ("rounds", "trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"crypto.{name} must be a positive integer, got {v!r}")
        if not isinstance(self.nonce, int) or not 0 <= self.nonce < 2 ** 64:
            raise ConfigError("crypto.nonce must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class RunConfig:
    params: MapParams = field(default_factory=MapParams)
    hcm2: Hcm2Config = field(default_factory=Hcm2Config)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    crypto: CryptoSettings = field(default_factory=CryptoSettings)
    out: Path = Path(".")


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(path, text, key, message):
    line = _line_of(text, key) if text is not None else None
    where = f"{path}:{line}" if line else str(path)
    raise ConfigError(f"{where}: {message}")


def _section(cls, data, name, path, text):
    if not isinstance(data, dict):
        _fail(path, text, name, f"section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            _fail(path, text, key, f"unknown key {name}.{key}")
    values = dict(data)
    if "range" in values:
        values["range"] = tuple(values["range"])
    return values


def read_config_file(path) -> dict[str, Any]:
    """Parse a JSON config into constructor kwargs, with line-numbered errors."""
    path = Path(path)
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: top level must be an object")
    sections = {"map": MapParams, "analysis": AnalysisSettings,
                "crypto": CryptoSettings}
    out: dict[str, Any] = {}
    for key, value in raw.items():
        if key in sections:
            out[key] = _section(sections[key], value, key, path, text)
        elif key == "hcm2":
            try:
                out[key] = Hcm2Config.from_dict(value)
            except (ConfigError, TypeError) as exc:
                _fail(path, text, key, str(exc))
        elif key == "out":
            out[key] = Path(value)
        else:
            _fail(path, text, key, f"unknown section {key!r}")
    out["_text"] = text
    out["_path"] = path
    return out


def build_config(file_data: dict[str, Any] | None = None,
                 overrides: dict[str, dict[str, Any]] | None = None) -> RunConfig:
    """Merge file values and flag overrides (flags win) over defaults."""
    file_data = file_data or {}
    overrides = overrides or {}
    text = file_data.get("_text")
    path = file_data.get("_path", "<flags>")

    def merged(section):
        values = dict(file_data.get(section, {}))
        values.update({k: v for k, v in overrides.get(section, {}).items()
                       if v is not None})
        return values

    try:
        params = MapParams(**merged("map"))
    except ConfigError as exc:
        key = str(exc).split("=")[0].split(" ")[0]
        _fail(path, text, key, str(exc))
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        analysis = replace(AnalysisSettings(), **merged("analysis"))
        crypto = replace(CryptoSettings(), **merged("crypto"))
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for settings in (analysis, crypto):
        try:
            settings.validate()
        except TypeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        except ConfigError as exc:
            key = str(exc).split(" ")[0].split(".")[-1]
            _fail(path, text, key, str(exc))
    out = overrides.get("out") or file_data.get("out") or Path(".")
    return RunConfig(params, file_data.get("hcm2", Hcm2Config()), analysis,
                     crypto, Path(out))
