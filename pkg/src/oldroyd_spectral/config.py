"""Run configuration: flat ``section.key = value`` text files.

Lines starting with ``#`` are comments.  Command-line overrides use the same
``key=value`` syntax.  Validation collects every problem before raising.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .model import ModelParams
from .profiles import PROFILES
from .spectral import GridSpec
from .weight import OVERFLOW_EXPONENT

OUTPUT_ENV = "OLDROYD_OUTPUT_DIR"
DT_FACTOR = 0.5

DEFAULTS = {
    "grid.n": 2,
    "grid.N": 64,
    "grid.L": 2 * math.pi,
    "model.gamma": 1.4,
    "model.b": 0.5,
    "model.friedrichs": "auto",
    "model.linear_only": False,
    "weights.lambda0": 0.25,
    "weights.lam": 10.0,
    "init.profile": "random-band",
    "init.epsilon": 1e-3,
    "init.seed": 0,
    "integration.dt": 0.01,
    "integration.T": 50.0,
    "integration.snapshot_every": 10,
    "monitor.theta": True,
    "monitor.norm_bound": "auto",
    "diagnostics.k0": 3,
    "output.dir": "output",
    "output.shells": False,
    "output.checkpoint_every": 0,
    "output.sweep": False,
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def _coerce(key, raw, errors):
    default = DEFAULTS[key]
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        errors.append(f"{key}: cannot parse {text!r} as {type(default).__name__}")
        return default
    return text


def parse_text(text):
    """Parse config text into a raw {key: str} dict."""
    out = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    if errors:
        raise ConfigError(errors)
    return out


@dataclass
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def grid(self):
        return GridSpec(self["grid.n"], self["grid.N"], self["grid.L"])

    @property
    def model(self):
        k = self["model.friedrichs"]
        if isinstance(k, str) and k not in ("auto", "off"):
            k = float(k)
        return ModelParams(self["model.gamma"], self["model.b"], k, self["model.linear_only"])

    @property
    def n_steps(self):
        return int(round(self["integration.T"] / self["integration.dt"]))

    @property
    def output_dir(self):
        return os.environ.get(OUTPUT_ENV) or self["output.dir"]

    def norm_bound(self):
        nb = self["monitor.norm_bound"]
        if nb in ("none", "off"):
            return None
        if nb == "auto":
            # M eps with M = lambda * lambda0 (the bootstrap choice M = 2 C0 lambda0, lambda = 2 C0).
            return self["weights.lam"] * self["weights.lambda0"] * max(self["init.epsilon"], 0.0)
        return float(nb)

    def to_text(self):
        return "".join(f"{k} = {_fmt(self.values[k])}\n" for k in sorted(self.values))

    def with_overrides(self, overrides):
        return build_config({**{k: _fmt(v) for k, v in self.values.items()}, **overrides})


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def active_kmax(grid, params):
    """Largest |xi| the evolution can populate (Friedrichs cutoff or 2/3 box)."""
    k = params.cutoff(grid)
    box = grid.dealias_index * grid.k_unit * math.sqrt(grid.n)
    return min(k, box) if k is not None else box


def build_config(raw):
    """Typed, validated RunConfig from a raw key/value mapping."""
    errors = []
    unknown = sorted(set(raw) - set(DEFAULTS))
    errors += [f"unknown key {k!r}" for k in unknown]
    values = dict(DEFAULTS)
    for k, v in raw.items():
        if k in DEFAULTS:
            values[k] = _coerce(k, v, errors)
    cfg = RunConfig(values)
    errors += validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def validate(cfg):
    errors = []
    v = cfg.values
    grid = params = None
    try:
        grid = cfg.grid
    except ValueError as e:
        errors.append(f"grid: {e}")
    try:
        params = cfg.model
    except ValueError as e:
        errors.append(f"model: {e}")
    f = v["model.friedrichs"]
    if isinstance(f, str) and f not in ("auto", "off"):
        try:
            if float(f) < 1:
                errors.append("model.friedrichs must be >= 1, 'auto' or 'off'")
        except ValueError:
            errors.append(f"model.friedrichs: cannot parse {f!r}")
            params = None
    if v["weights.lambda0"] <= 0:
        errors.append("weights.lambda0 must be positive")
    if v["weights.lam"] <= 0:
        errors.append("weights.lam must be positive")
    if v["init.epsilon"] < 0:
        errors.append("init.epsilon must be >= 0")
    if v["init.profile"] not in PROFILES:
        errors.append(f"init.profile must be one of {PROFILES}")
    if v["integration.dt"] <= 0:
        errors.append("integration.dt must be positive")
    if v["integration.T"] <= 0:
        errors.append("integration.T must be positive")
    if v["integration.snapshot_every"] < 1:
        errors.append("integration.snapshot_every must be >= 1")
    if v["output.checkpoint_every"] < 0:
        errors.append("output.checkpoint_every must be >= 0")
    nb = v["monitor.norm_bound"]
    if nb not in ("auto", "none", "off"):
        try:
            float(nb)
        except (TypeError, ValueError):
            errors.append(f"monitor.norm_bound: cannot parse {nb!r}")
    if grid is not None:
        if v["weights.lambda0"] > 0 and 2 * v["weights.lambda0"] * grid.kmax > OVERFLOW_EXPONENT:
            errors.append(
                f"overflow guard: 2*lambda0*max|xi| = {2 * v['weights.lambda0'] * grid.kmax:.4g} > {OVERFLOW_EXPONENT}"
            )
        if params is not None and v["integration.dt"] > 0:
            bound = DT_FACTOR / active_kmax(grid, params)
            if v["integration.dt"] > bound * (1 + 1e-12):
                errors.append(f"integration.dt = {v['integration.dt']} exceeds 0.5/max|xi| = {bound:.4g}")
    return errors


def load_config(path, overrides=None):
    with open(path) as fh:
        raw = parse_text(fh.read())
    raw.update(overrides or {})
    return build_config(raw)


def parse_overrides(items):
    out = {}
    errors = []
    for item in items or []:
        if "=" not in item:
            errors.append(f"override {item!r} is not key=value")
            continue
        k, val = item.split("=", 1)
        out[k.strip()] = val.strip()
    if errors:
        raise ConfigError(errors)
    return out
