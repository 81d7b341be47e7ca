"""Run configuration: a flat dataclass filled from defaults, an optional
INI file, then command-line flags (later sources win)."""
import configparser
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, fields

from .cocycle import constant_diagonal, two_symbol_demo
from .errors import ConfigError
from .group import bend, fuchsian
from .hypgeom import ProjPoint
from .potential import parse_potential

TOLERANCES = {
    "busemann_step": 1e-10,
    "delta_relative": 1e-7,
    "section_chordal": 1e-4,
    "dedup": 1e-6,
    "w1_subsample": 512,
    "qr_every": 20,
}


@dataclass
class RunConfig:
    R: float = 11.0
    cap: int = 64
    potential: str = "zero"
    rep: str = "fuchsian"
    x: str = "0.37"
    seed: int = 0
    window: str = "8:11"
    threads: int = 0
    samples: int = 10_000
    T: float = 25.0
    vectors: int = 100
    steps: int = 10_000
    points: int = 100
    cocycle: str = "two-symbol"
    P: float = None

    def validate(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise ConfigError("R must be a positive number")
        for name in ("cap", "samples", "vectors", "steps", "points"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.threads < 0:
            raise ConfigError("threads must be 0 (all available) or positive")
        parse_potential(self.potential)
        parse_rep(self.rep)
        parse_x(self.x)
        parse_window(self.window)
        parse_cocycle(self.cocycle)
        return self

    def worker_count(self):
        return self.threads or os.cpu_count() or 1

    def snapshot(self):
        return asdict(self)

    def digest(self, command):
        blob = json.dumps({"command": command, "config": self.snapshot()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_LOWER = {name.lower(): name for name in _TYPES}


def coerce(name, value):
    key = _LOWER.get(name.lower())
    if key is None:
        raise ConfigError(f"unknown configuration key {name!r}")
    if value is None:
        return key, None
    kind = _TYPES[key]
    try:
        if kind is int or kind == "int":
            return key, int(value)
        if kind is float or kind == "float":
            return key, float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value {value!r} for {key}") from None
    return key, str(value)


def load_ini(path):
    """Flatten every section of an INI file into RunConfig keys."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for section in cp.sections():
        for k, v in cp.items(section):
            key, val = coerce(k, v)
            out[key] = val
    return out


def build_config(*sources):
    values = {}
    for src in sources:
        for k, v in src.items():
            if v is not None:
                key, val = coerce(k, v)
                values[key] = val
    return RunConfig(**values).validate()


def parse_rep(spec):
    spec = spec.strip()
    if spec == "fuchsian":
        return fuchsian()
    if spec.startswith("bent:"):
        try:
            return bend(fuchsian(), float(spec[5:]))
        except ValueError:
            raise ConfigError(f"bad bending angle in {spec!r}") from None
    raise ConfigError(f"unknown representation {spec!r}; use fuchsian or bent:theta")


def parse_x(spec):
    s = str(spec).strip().lower()
    if s in ("inf", "infinity"):
        return ProjPoint.infinity()
    try:
        # accept both 0.37+0j and 0.37+0i
        return ProjPoint.from_chart(complex(s.replace(" ", "").replace("i", "j")))
    except ValueError:
        raise ConfigError(f"cannot parse fiber point {spec!r}") from None


def parse_window(spec):
    try:
        a, b = (float(t) for t in str(spec).split(":"))
    except ValueError:
        raise ConfigError(f"window must look like a:b, got {spec!r}") from None
    if not a < b:
        raise ConfigError("window must have a < b")
    return a, b


def parse_cocycle(spec):
    if spec in ("two-symbol", "demo2"):
        return two_symbol_demo()
    if spec.startswith("diag:"):
        try:
            return constant_diagonal(float(spec[5:]))
        except ValueError:
            raise ConfigError(f"bad diagonal entry in {spec!r}") from None
    raise ConfigError(f"unknown cocycle {spec!r}; use two-symbol (alias demo2) or diag:lambda")
