"""Flat ``key = value`` experiment configs.

Blank lines and ``#`` comments are ignored.  Every key must be known, and
family hyperparameters must belong to the chosen family; anything else is a
:class:`ConfigError`.  ``load`` accepts either a file path or the name of a
bundled preset such as ``fig1a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import PreconditionError
from .estimators import EstimatorSpec, WeightPair
from .models import FAMILIES, LOCATION, make_model

FAMILY_KEYS = {
    "normal": ("sigma1", "sigma2", "rho"),
    "exp_loc": ("sigma1", "sigma2"),
    "gamma_scale": ("a1", "a2"),
    "power_scale": ("a1", "a2"),
}
HYPER_KEYS = {"sigma1", "sigma2", "rho", "a1", "a2"}
GENERAL_KEYS = {
    "name", "family", "p1", "p2", "estimators", "lambda_start", "lambda_stop", "lambda_step",
    "n", "seed", "threads", "schedule", "trials", "identity_alpha", "include_relative_scale",
}


class ConfigError(PreconditionError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    family: str | None = None
    hyper: dict = field(default_factory=dict)
    weights: WeightPair = WeightPair()
    estimators: tuple = ()
    lambda_start: float | None = None
    lambda_stop: float | None = None
    lambda_step: float | None = None
    n: int = 50_000
    seed: int = 20240101
    threads: int = 1
    schedule: tuple = (10.0, 100.0, 1000.0, 10000.0)
    trials: int = 100_000
    identity_alpha: float = 1.0
    include_relative_scale: bool = False

    def model(self):
        if self.family is None:
            raise ConfigError("config does not name a family")
        try:
            return make_model(self.family, **self.hyper)
        except TypeError as exc:
            raise ConfigError(f"bad hyperparameters for {self.family}: {exc}") from None

    def lambda_grid(self) -> np.ndarray:
        kind = FAMILIES[self.family].kind if self.family else LOCATION
        start = self.lambda_start if self.lambda_start is not None else (0.0 if kind == LOCATION else 1.0)
        stop = self.lambda_stop if self.lambda_stop is not None else (5.0 if kind == LOCATION else 6.0)
        step = self.lambda_step if self.lambda_step is not None else 0.25
        if step <= 0 or stop < start:
            raise ConfigError("lambda grid needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(count)

    def estimator_specs(self) -> list[EstimatorSpec]:
        return [EstimatorSpec.parse(t) for t in self.estimators]


def _number(key: str, raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value must be finite")
    return v


def _integer(key: str, raw: str, lo: int = 0) -> int:
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if v < lo:
        raise ConfigError(f"{key}: must be >= {lo}")
    return v


def parse(text: str, name: str = "experiment") -> ExperimentConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in GENERAL_KEYS and key not in HYPER_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    family = raw.get("family")
    if family is not None and family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    allowed = set(FAMILY_KEYS.get(family, ()))
    hyper = {}
    for key in HYPER_KEYS & raw.keys():
        if key not in allowed:
            raise ConfigError(f"key {key!r} does not apply to family {family!r}")
        hyper[key] = _number(key, raw[key])
    missing = [k for k in allowed if k not in hyper]
    if missing:
        raise ConfigError(f"family {family!r} needs {', '.join(missing)}")

    kw: dict = {"name": raw.get("name", name), "family": family, "hyper": hyper}
    try:
        kw["weights"] = WeightPair(_number("p1", raw.get("p1", "1")), _number("p2", raw.get("p2", "1")))
    except PreconditionError as exc:
        raise ConfigError(str(exc)) from None
    if "estimators" in raw:
        tokens = tuple(t.strip() for t in raw["estimators"].split(",") if t.strip())
        for t in tokens:
            try:
                EstimatorSpec.parse(t)
            except PreconditionError as exc:
                raise ConfigError(str(exc)) from None
        kw["estimators"] = tokens
    for key in ("lambda_start", "lambda_stop", "lambda_step", "identity_alpha"):
        if key in raw:
            kw[key] = _number(key, raw[key])
    if "n" in raw:
        kw["n"] = _integer("n", raw["n"], 2)
    if "seed" in raw:
        kw["seed"] = _integer("seed", raw["seed"])
    if "threads" in raw:
        kw["threads"] = _integer("threads", raw["threads"], 1)
    if "trials" in raw:
        kw["trials"] = _integer("trials", raw["trials"], 1)
    if "schedule" in raw:
        kw["schedule"] = tuple(_number("schedule", s) for s in raw["schedule"].split(",") if s.strip())
    if "include_relative_scale" in raw:
        flag = raw["include_relative_scale"].lower()
        if flag not in ("true", "false"):
            raise ConfigError("include_relative_scale must be true or false")
        kw["include_relative_scale"] = flag == "true"
    return ExperimentConfig(**kw)


def preset_names() -> list[str]:
    root = resources.files("isomix") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load(ref: str) -> ExperimentConfig:
    """Load a config from a path, or from a bundled preset name."""
    path = Path(ref)
    if path.is_file():
        return parse(path.read_text(), path.stem)
    res = resources.files("isomix") / "presets" / f"{ref}.cfg"
    if res.is_file():
        return parse(res.read_text(), ref)
    raise ConfigError(f"no config file or preset named {ref!r}")
