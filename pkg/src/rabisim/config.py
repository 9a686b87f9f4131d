"""key=value run configuration, parsed fail-closed."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError
from .models import PhysicalParams
from .presets import PRESETS

MODELS = ("full", "effective", "semiclassical")
INITS = ("e0", "g0")

# config key -> PhysicalParams field
_PHYS_KEYS = {
    "g_cav": "g_cav", "omega1": "Omega1", "omega2": "Omega2", "delta1": "Delta1",
    "delta2": "Delta2", "delta": "delta", "delta_cav": "delta_cav", "gamma": "gamma",
}
_FLOAT_KEYS = set(_PHYS_KEYS) | {"kappa", "t_max", "sample_dt"}
_INT_KEYS = {"n_max"}
_TEXT_KEYS = {"model", "preset", "init", "observables", "out", "svg"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _TEXT_KEYS
REQUIRED_KEYS = ("model", "t_max")
_EXPLICIT_REQUIRED = ("g_cav", "omega1", "omega2", "delta1", "delta2")


@dataclass
class RunConfig:
    model: str
    phys: PhysicalParams
    t_max: float
    n_max: int
    preset: Optional[str] = None
    kappa: float = 0.0
    sample_dt: float = 0.01
    init: str = "e0"
    observables: list = field(default_factory=lambda: ["n", "sz", "P_e0"])
    out: Optional[str] = None
    svg: Optional[str] = None
    negate: bool = False


def _default_n_max(model: str) -> int:
    return 8 if model == "full" else 40


def parse_config(text: str) -> RunConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment.

    Raises
    ------
    ConfigError
        On unknown or repeated keys, malformed lines, bad values, or missing
        required keys.  Line numbers are 1-based.
    """
    raw: dict = {}
    where: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"key {key!r} repeated (first on line {where[key]})", lineno)
        if key in _FLOAT_KEYS:
            try:
                value = float(value)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {value!r}", lineno) from None
        elif key in _INT_KEYS:
            try:
                value = int(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {value!r}", lineno) from None
        raw[key], where[key] = value, lineno

    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if "preset" not in raw:
        missing += [k for k in _EXPLICIT_REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    def check(cond, key, msg):
        if not cond:
            raise ConfigError(msg, where.get(key))

    model = raw["model"]
    check(model in MODELS, "model", f"model must be one of {MODELS}, got {model!r}")
    negate = False
    if "preset" in raw:
        check(raw["preset"] in PRESETS, "preset", f"unknown preset {raw['preset']!r}")
        pre = PRESETS[raw["preset"]]
        phys, negate = pre.phys, pre.negate
        overrides = {f: raw[k] for k, f in _PHYS_KEYS.items() if k in raw}
        if overrides:
            phys = replace(phys, **overrides)
    else:
        phys = PhysicalParams(**{f: raw[k] for k, f in _PHYS_KEYS.items() if k in raw})
    kappa = raw.get("kappa", 0.0)
    check(kappa >= 0, "kappa", "kappa must be non-negative")
    phys = replace(phys, kappa=kappa)
    check(raw["t_max"] > 0, "t_max", "t_max must be positive")
    n_max = raw.get("n_max", _default_n_max(model))
    check(n_max >= 2, "n_max", "n_max must be at least 2")
    sample_dt = raw.get("sample_dt", 0.01)
    check(sample_dt > 0, "sample_dt", "sample_dt must be positive")
    init = raw.get("init", "e0")
    check(init in INITS, "init", f"init must be one of {INITS}")
    obs = raw.get("observables", "n,sz,P_e0")
    obs = [s.strip() for s in obs.split(",") if s.strip()]
    check(bool(obs), "observables", "observables list is empty")
    return RunConfig(model=model, phys=phys, t_max=raw["t_max"], n_max=n_max,
                     preset=raw.get("preset"), kappa=kappa, sample_dt=sample_dt, init=init,
                     observables=obs, out=raw.get("out"), svg=raw.get("svg"), negate=negate)
