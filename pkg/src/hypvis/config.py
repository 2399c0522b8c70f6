"""Experiment configuration: nested dataclasses mirroring the JSON schema.

JSON keys use dotted paths such as ``model.lambda`` or ``mc.replicates``;
``apply_override`` accepts the same paths for ``--set key=value``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .sampler import RadiusLaw

OUTPUT_DIR_ENV = "HYPVIS_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class RadiusConfig:
    law: str = "constant"
    params: list = field(default_factory=lambda: [1.0])


@dataclass
class ModelConfig:
    lam: float = 0.1
    radius: RadiusConfig = field(default_factory=RadiusConfig)
    phase: str = "vacant"
    mode: str = "density"


@dataclass
class ProbeConfig:
    depths: list = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0])
    separations: list = field(default_factory=list)
    grid: int = 2**14
    first_moment: bool = True


@dataclass
class MCConfig:
    replicates: int = 1000
    seed: int = 0
    workers: int = 1
    batch_size: int = 1000
    survivors: int | None = None
    max_replicates: int | None = None


@dataclass
class FractalConfig:
    delta0: float = 0.25
    rungs: int = 8


@dataclass
class OutputConfig:
    dir: str | None = None
    format: str = "csv"


@dataclass
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    mc: MCConfig = field(default_factory=MCConfig)
    fractal: FractalConfig = field(default_factory=FractalConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def law(self) -> RadiusLaw:
        return RadiusLaw(self.model.radius.law, tuple(self.model.radius.params))

    @property
    def window_radius(self) -> float:
        """max depth + r_max + 2, recorded with every result."""
        return max(self.probe.depths) + self.law.r_max + 2.0

    @property
    def reach(self) -> float:
        return max(self.probe.depths) + self.law.r_max

    @property
    def output_dir(self) -> str:
        return self.output.dir or os.environ.get(OUTPUT_DIR_ENV) or "results"

    def validate(self, min_replicates: int = 100) -> "ExperimentConfig":
        try:
            law = self.law
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.model.lam < 0:
            raise ConfigError("model.lambda must be >= 0")
        if self.model.phase not in ("vacant", "occupied"):
            raise ConfigError("model.phase must be 'vacant' or 'occupied'")
        if self.model.mode not in ("density", "literal"):
            raise ConfigError("model.mode must be 'density' or 'literal'")
        if not self.probe.depths or any(d <= 0 for d in self.probe.depths):
            raise ConfigError("probe.depths must be a nonempty list of positive numbers")
        if self.mc.replicates < min_replicates:
            raise ConfigError(f"mc.replicates must be >= {min_replicates}")
        if self.mc.workers < 1 or self.mc.batch_size < 1:
            raise ConfigError("mc.workers and mc.batch_size must be >= 1")
        if self.mc.survivors is not None and self.mc.survivors < 1:
            raise ConfigError("mc.survivors must be >= 1 when set")
        if self.fractal.delta0 <= 0 or self.fractal.rungs < 4:
            raise ConfigError("fractal.delta0 must be > 0 and fractal.rungs >= 4")
        if self.output.format != "csv":
            raise ConfigError("output.format must be 'csv'")
        if not 0 <= self.mc.seed < 2**64:
            raise ConfigError("mc.seed must be an unsigned 64-bit integer")
        del law
        return self

    # (de)serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["model"]["lambda"] = d["model"].pop("lam")
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        cfg = cls()
        for key, value in _flatten(data):
            cfg.apply_override(key, value)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc

    def apply_override(self, key: str, value) -> None:
        parts = key.split(".")
        if parts[-1] == "lambda":
            parts[-1] = "lam"
        obj = self
        for p in parts[:-1]:
            if not dataclasses.is_dataclass(obj) or not hasattr(obj, p):
                raise ConfigError(f"unknown config key {key!r}")
            obj = getattr(obj, p)
        name = parts[-1]
        if not dataclasses.is_dataclass(obj) or name not in {f.name for f in dataclasses.fields(obj)}:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, str):
            value = _parse_scalar(value)
        current = getattr(obj, name)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"{key!r} expects an object")
            for sub, v in _flatten(value):
                self.apply_override(f"{key}.{sub}", v)
            return
        setattr(obj, name, _coerce(key, current, value))


def _flatten(data: dict, prefix: str = ""):
    for k, v in data.items():
        path = f"{prefix}{k}"
        # radius.params is a list leaf, everything dict-valued is a section
        if isinstance(v, dict):
            yield from _flatten(v, path + ".")
        else:
            yield path, v


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _coerce(key, current, value):
    try:
        if isinstance(current, bool):
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes")
            return bool(value)
        if isinstance(current, int) and not isinstance(current, bool):
            if isinstance(value, float) and not value.is_integer():
                raise ConfigError(f"{key!r} expects an integer")
            return int(value)
        if isinstance(current, float):
            return float(value)
        if isinstance(current, list):
            if not isinstance(value, (list, tuple)):
                value = [value]
            return [float(v) for v in value]
        if current is None and value is not None:
            return int(value) if key.startswith("mc.") else value
        return value
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
