"""Experiment configuration: dataclasses plus a namespaced TOML loader.

Config files use dotted keys grouped by namespace::

    [model]
    n_sites = 8
    [detector]
    coupling = 0.02
    [protocol]
    state = "gibbs"
    [sweep]
    n_steps = 101

Unknown keys are rejected so typos cannot pass silently.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

from ..models import SpinChainModel
from ..weakmeas import DetectorModel

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

STATES = ("gibbs", "w_eigenstate", "maximally_mixed", "basis")
BOUND_METHODS = ("taylor", "exact_trace", "exact_c")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    """Which V labels are weakly measured, and which state is probed.

    ``beta`` applies to the Gibbs state, ``t_star``/``which`` to the W(t*)
    eigenstate, and ``index`` to a computational basis state.
    """

    v1: int = 1
    v2: int = -1
    state: str = "gibbs"
    beta: float = 1.0
    t_star: float = 4.0
    which: int = 0
    index: int = 0
    fine_grained: bool = False

    def __post_init__(self):
        if self.v1 not in (1, -1) or self.v2 not in (1, -1):
            raise ConfigError("v1 and v2 must be +1 or -1")
        if self.state not in STATES:
            raise ConfigError(f"state must be one of {STATES}, got {self.state!r}")


@dataclass(frozen=True)
class SweepConfig:
    t_min: float = 0.0
    t_max: float = 10.0
    n_steps: int = 101

    def __post_init__(self):
        if self.t_min > self.t_max:
            raise ConfigError("t_min must not exceed t_max")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be at least 1")

    def times(self) -> list[float]:
        if self.n_steps == 1:
            return [float(self.t_min)]
        step = (self.t_max - self.t_min) / (self.n_steps - 1)
        return [float(self.t_min + k * step) for k in range(self.n_steps)]


@dataclass(frozen=True)
class OutputConfig:
    path: str = ""
    format: str = "csv"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: SpinChainModel = field(default_factory=SpinChainModel)
    detector: DetectorModel = field(default_factory=DetectorModel)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    bound_methods: tuple = ("taylor", "exact_trace")
    alphas: tuple = (1.0, float("inf"))
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        bad = set(self.bound_methods) - set(BOUND_METHODS)
        if bad:
            raise ConfigError(f"unknown bound methods {sorted(bad)}")
        for a in self.alphas:
            if not a > 0.5:
                raise ConfigError(f"Renyi order {a} has no conjugate order (needs alpha > 1/2)")
        object.__setattr__(self, "bound_methods", tuple(self.bound_methods))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def replace(self, **sections) -> "ExperimentConfig":
        """Copy with whole sections swapped or per-section overrides given as dicts."""
        updates = {}
        for name, value in sections.items():
            current = getattr(self, name)
            if isinstance(value, dict) and dataclasses.is_dataclass(current):
                updates[name] = dataclasses.replace(current, **value)
            else:
                updates[name] = value
        return dataclasses.replace(self, **updates)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["alphas"] = [_json_float(a) for a in self.alphas]
        d["bound_methods"] = list(self.bound_methods)
        return d


def _json_float(x: float):
    return "inf" if x == float("inf") else x


_SECTIONS = {
    "model": SpinChainModel,
    "detector": DetectorModel,
    "protocol": ProtocolConfig,
    "sweep": SweepConfig,
    "output": OutputConfig,
}
_TOP_LEVEL = ("bound_methods", "alphas")


def config_from_dict(data: dict) -> ExperimentConfig:
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"[{key}] must be a table")
            cls = _SECTIONS[key]
            allowed = {f.name for f in dataclasses.fields(cls)}
            unknown = set(value) - allowed
            if unknown:
                raise ConfigError(f"unknown keys {sorted(f'{key}.{k}' for k in unknown)}")
            try:
                kwargs[key] = cls(**value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid [{key}] section: {exc}") from exc
        elif key in _TOP_LEVEL:
            if key == "alphas":
                value = [float(a) for a in value]
            kwargs[key] = tuple(value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def reference_config(**sections) -> ExperimentConfig:
    """The eight-qubit Gibbs-state sweep behind the first three figures."""
    return ExperimentConfig().replace(**sections) if sections else ExperimentConfig()


def fig4_config(which: int = 0, t_star: float = 4.0, **sections) -> ExperimentConfig:
    """Fine-grained W(t) measurements on a W(t*) eigenstate at ``g~ = 0.16``."""
    cfg = ExperimentConfig(
        detector=DetectorModel(coupling=0.16),
        protocol=ProtocolConfig(state="w_eigenstate", t_star=t_star, which=which, fine_grained=True),
        bound_methods=("exact_trace",),
    )
    return cfg.replace(**sections) if sections else cfg
