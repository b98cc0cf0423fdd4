"""Experiment configuration: INI file, embedded defaults and environment overrides.

Every key can be overridden by an environment variable named
``GAMMALAB_<SECTION>_<KEY>`` (upper case), e.g. ``GAMMALAB_ESTIMATION_SEED``.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
import os
from dataclasses import dataclass

import numpy as np

from .distributions import InputDistribution, from_spec
from .gamma_channel import ChannelParams

__all__ = ["ConfigError", "ExperimentConfig", "DEFAULT_CONFIG", "ENV_PREFIX", "load_config", "r_grid"]

ENV_PREFIX = "GAMMALAB"

DEFAULT_CONFIG = """\
[channel]
alpha = 1.0
lambda = 1.0
r_min = 0.5
r_max = 2.0
r_count = 3
r_spacing = log

[input]
kind = gamma
shape = 1.0
rate = 1.0

[estimation]
mc_samples = 1000000
bins = 0
seed = 20240611
fd_step_rule = default
quad_rel_tol = 1e-6

[debruijn]
r_max = 100
mean_correction = false

[asymptotics]
lambda = 1.0
r_grid = 1, 10, 100, 1000, 10000

[explore]
alpha_grid = 0.5, 1, 2
r_grid = 10, 100, 1000

[outputs]
csv_path = gammalab-report.csv
json_path = gammalab-report.json
timings_path =
"""


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _floats(text: str, field: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{field}: expected a comma-separated list of numbers, got '{text}'") from None


def r_grid(r_min: float, r_max: float, count: int, spacing: str) -> list[float]:
    if count < 1:
        raise ConfigError("channel.r_count: the r grid is empty")
    if r_min < 0:
        raise ConfigError("channel.r_min: must be >= 0")
    if count == 1:
        return [float(r_min)]
    if r_max <= r_min:
        raise ConfigError("channel.r_max: the r grid must be strictly increasing")
    if spacing == "linear":
        return [float(v) for v in np.linspace(r_min, r_max, count)]
    if spacing == "log":
        if r_min <= 0:
            raise ConfigError("channel.r_min: log spacing needs r_min > 0")
        return [float(v) for v in np.geomspace(r_min, r_max, count)]
    raise ConfigError(f"channel.r_spacing: expected 'linear' or 'log', got '{spacing}'")


@dataclass(frozen=True)
class ExperimentConfig:
    alphas: tuple[float, ...]
    lam: float
    r_values: tuple[float, ...]
    input_spec: dict
    mc_samples: int
    bins: int | None
    seed: int
    fd_step: float | None
    quad_rel_tol: float
    debruijn_r_max: float
    mean_correction: bool
    asym_lambda: float
    asym_r_grid: tuple[float, ...]
    explore_alphas: tuple[float, ...]
    explore_r_grid: tuple[float, ...]
    csv_path: str
    json_path: str
    timings_path: str
    text: str

    @property
    def input(self) -> InputDistribution:
        return from_spec(self.input_spec)

    def params_grid(self, alpha: float) -> list[ChannelParams]:
        return [ChannelParams(alpha, self.lam, r) for r in self.r_values]

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()


def _input_spec(section) -> dict:
    spec = {}
    for key, value in section.items():
        if key == "kind":
            spec[key] = value.strip()
        elif key in ("weights", "shapes", "rates"):
            spec[key] = _floats(value, f"input.{key}")
        else:
            try:
                spec[key] = float(value)
            except ValueError:
                raise ConfigError(f"input.{key}: expected a number, got '{value}'") from None
    return spec


def _apply_env(parser: configparser.ConfigParser, environ) -> None:
    for section in parser.sections():
        for key in list(parser[section].keys()) + _EXTRA_KEYS.get(section, []):
            name = f"{ENV_PREFIX}_{section}_{key}".upper()
            if name in environ:
                parser[section][key] = environ[name]


# keys that may be set only through the environment (mixture inputs etc.)
_EXTRA_KEYS = {"input": ["weights", "shapes", "rates", "mu", "sigma", "scale", "value", "loc"]}


def _get(parser, section, key, conv, check=None, msg=""):
    field = f"{section}.{key}"
    try:
        value = conv(parser[section][key])
    except KeyError:
        raise ConfigError(f"{field}: missing") from None
    except ValueError:
        raise ConfigError(f"{field}: cannot parse '{parser[section][key]}'") from None
    if check is not None and not check(value):
        raise ConfigError(f"{field}: {msg} (got {value})")
    return value


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def load_config(path=None, environ=None, seed: int | None = None) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then environment overrides, then ``seed``."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.read_string(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                user = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
                user.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"config file: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"config file: {exc}") from None
        for section in user.sections():
            if not parser.has_section(section):
                raise ConfigError(f"{section}: unknown section")
            if section == "input":
                # an input section replaces the default law entirely
                parser.remove_section("input")
                parser.add_section("input")
            for key, value in user[section].items():
                if section != "input" and key not in parser[section]:
                    raise ConfigError(f"{section}.{key}: unknown key")
                parser[section][key] = value
    _apply_env(parser, os.environ if environ is None else environ)
    if seed is not None:
        parser["estimation"]["seed"] = str(seed)

    alphas = tuple(_floats(parser["channel"]["alpha"], "channel.alpha"))
    if not alphas:
        raise ConfigError("channel.alpha: at least one value is required")
    for a in alphas:
        if not a >= 0.5:
            raise ConfigError(f"channel.alpha: the channel requires alpha >= 1/2 (got {a})")
    lam = _get(parser, "channel", "lambda", float, lambda v: v > 0, "must be > 0")
    r_values = tuple(r_grid(
        _get(parser, "channel", "r_min", float),
        _get(parser, "channel", "r_max", float),
        _get(parser, "channel", "r_count", int),
        parser["channel"]["r_spacing"].strip(),
    ))
    spec = _input_spec(parser["input"])
    try:
        dist = from_spec(spec)
    except ValueError as exc:
        raise ConfigError(f"input: {exc}") from None
    if not dist.positive:
        raise ConfigError("input.kind: the gamma channel needs a positive input law")

    mc = _get(parser, "estimation", "mc_samples", int, lambda v: v >= 10**4, "must be >= 10000")
    bins = _get(parser, "estimation", "bins", int, lambda v: v == 0 or v >= 10, "must be 0 (auto) or >= 10")
    seed_v = _get(parser, "estimation", "seed", int, lambda v: v >= 0, "must be >= 0")
    rule = parser["estimation"]["fd_step_rule"].strip()
    if rule == "default":
        fd = None
    else:
        try:
            fd = float(rule)
        except ValueError:
            raise ConfigError("estimation.fd_step_rule: expected 'default' or a positive step") from None
        if not fd > 0:
            raise ConfigError("estimation.fd_step_rule: the step must be > 0")
    qtol = _get(parser, "estimation", "quad_rel_tol", float, lambda v: 0 < v <= 1e-6, "must lie in (0, 1e-6]")
    r_max = _get(parser, "debruijn", "r_max", float, lambda v: v > 0, "must be > 0")
    corr = _get(parser, "debruijn", "mean_correction", _bool)
    asym_lam = _get(parser, "asymptotics", "lambda", float, lambda v: v > 0, "must be > 0")
    asym_grid = tuple(_floats(parser["asymptotics"]["r_grid"], "asymptotics.r_grid"))
    if not asym_grid or any(v <= 0 for v in asym_grid) or any(np.diff(asym_grid) <= 0):
        raise ConfigError("asymptotics.r_grid: must be a non-empty increasing list of positive values")
    ex_alpha = tuple(_floats(parser["explore"]["alpha_grid"], "explore.alpha_grid"))
    if any(not a >= 0.5 for a in ex_alpha):
        raise ConfigError("explore.alpha_grid: the channel requires alpha >= 1/2")
    ex_grid = tuple(_floats(parser["explore"]["r_grid"], "explore.r_grid"))
    if any(v <= 0 or not math.isfinite(v) for v in ex_grid):
        raise ConfigError("explore.r_grid: values must be positive")

    buf = io.StringIO()
    parser.write(buf)
    out = parser["outputs"]
    return ExperimentConfig(
        alphas, lam, r_values, spec, mc, bins or None, seed_v, fd, qtol, r_max, corr, asym_lam, asym_grid,
        ex_alpha, ex_grid, out.get("csv_path", "").strip(), out.get("json_path", "").strip(),
        out.get("timings_path", "").strip(), buf.getvalue(),
    )
