"""Experiment configuration: strict YAML loading with Table-style defaults.

The default configuration reproduces the reference system: a 60 GHz link
with the wavelength pinned to exactly 5 mm, 2 GHz bandwidth, two 27x27
arrays at 2 cm spacing separated by 15 m, -20 dBm transmit power and an
8 dB receiver noise figure, water-filling power allocation, isotropic
elements and the optimal symmetric beam waist. Every key can be overridden
from a config file and, selectively, from CLI flags; unknown keys are
rejected with the offending line number.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Union

import yaml

from .arrays import ArraySpec, ElementPattern
from .channel import LinkBudget
from .hgmodes import BeamParameters, optimal_waist

__all__ = [
    "AlgorithmConfig",
    "ArrayConfig",
    "BeamConfig",
    "ConfigError",
    "ExperimentConfig",
    "LinkConfig",
    "OutputConfig",
    "load_config",
]


class ConfigError(ValueError):
    """Invalid or malformed configuration; message carries file:line context."""


@dataclass(frozen=True)
class LinkConfig:
    carrier_frequency_hz: float = 60e9
    wavelength_m: Optional[float] = 0.005
    bandwidth_hz: float = 2e9
    tx_power_dbm: float = -20.0
    noise_figure_db: float = 8.0
    distance_m: float = 15.0
    speed_of_light: float = 299792458.0


@dataclass(frozen=True)
class ArrayConfig:
    half_index: int = 13
    spacing_m: float = 0.02


@dataclass(frozen=True)
class BeamConfig:
    # "optimal" selects the waist minimizing the beam radius at the arrays;
    # a number fixes the waist in metres.
    waist: Union[str, float] = "optimal"


@dataclass(frozen=True)
class AlgorithmConfig:
    epsilon: Optional[float] = None
    relative_epsilon: float = 1e-3
    hard_cap: int = 20
    estimation: str = "noiseless"
    repetitions: int = 1
    seed: int = 0
    pattern: str = "isotropic"
    mcs_cap: Optional[float] = None
    drop_tol: float = 1e-8


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    dump_channel: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    link: LinkConfig = field(default_factory=LinkConfig)
    array: ArrayConfig = field(default_factory=ArrayConfig)
    beam: BeamConfig = field(default_factory=BeamConfig)
    algorithm: AlgorithmConfig = field(default_factory=AlgorithmConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def link_budget(self) -> LinkBudget:
        return LinkBudget(
            carrier_frequency_hz=self.link.carrier_frequency_hz,
            bandwidth_hz=self.link.bandwidth_hz,
            tx_power_dbm=self.link.tx_power_dbm,
            noise_figure_db=self.link.noise_figure_db,
            distance_m=self.link.distance_m,
            speed_of_light=self.link.speed_of_light,
            wavelength_m=self.link.wavelength_m,
        )

    def tx_spec(self) -> ArraySpec:
        return ArraySpec(
            half_index=self.array.half_index,
            spacing=self.array.spacing_m,
            z_position=-0.5 * self.link.distance_m,
            boresight="+z",
        )

    def rx_spec(self) -> ArraySpec:
        return ArraySpec(
            half_index=self.array.half_index,
            spacing=self.array.spacing_m,
            z_position=+0.5 * self.link.distance_m,
            boresight="-z",
        )

    def element_pattern(self) -> ElementPattern:
        return ElementPattern(kind=self.algorithm.pattern)

    def beam_parameters(self) -> BeamParameters:
        link = self.link_budget()
        if self.beam.waist == "optimal":
            return optimal_waist(link.wavelength_m, link.distance_m)
        return BeamParameters.symmetric(
            waist=float(self.beam.waist),
            wavelength=link.wavelength_m,
            distance=link.distance_m,
        )

    def to_dict(self) -> dict:
        return {
            "link": {f.name: getattr(self.link, f.name) for f in fields(self.link)},
            "array": {f.name: getattr(self.array, f.name) for f in fields(self.array)},
            "beam": {f.name: getattr(self.beam, f.name) for f in fields(self.beam)},
            "algorithm": {f.name: getattr(self.algorithm, f.name) for f in fields(self.algorithm)},
            "output": {f.name: getattr(self.output, f.name) for f in fields(self.output)},
        }


_BLOCKS = {
    "link": LinkConfig,
    "array": ArrayConfig,
    "beam": BeamConfig,
    "algorithm": AlgorithmConfig,
    "output": OutputConfig,
}

_CHOICES = {
    "algorithm.estimation": ("noiseless", "ls"),
    "algorithm.pattern": ("isotropic", "directional"),
}


def _parse_with_lines(text: str, source: str) -> tuple[dict, dict]:
    """YAML mapping plus a {dotted.key: line number} map for error messages."""
    try:
        data = yaml.safe_load(io.StringIO(text))
        root = yaml.compose(io.StringIO(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{source}{line}: malformed YAML: {exc}") from exc
    if root is None:
        return {}, {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: top level must be a mapping of config blocks")
    lines: dict = {}

    def walk(node: yaml.MappingNode, prefix: str) -> None:
        for key_node, value_node in node.value:
            dotted = f"{prefix}{key_node.value}"
            lines[dotted] = key_node.start_mark.line + 1
            if isinstance(value_node, yaml.MappingNode):
                walk(value_node, f"{dotted}.")

    walk(root, "")
    return data, lines


def _coerce(name: str, raw, template, source: str, line: int):
    if raw is None:
        if template is None or name in ("link.wavelength_m",):
            return None
        raise ConfigError(f"{source}:{line}: key '{name}' may not be null")
    if name in _CHOICES and raw not in _CHOICES[name]:
        raise ConfigError(
            f"{source}:{line}: key '{name}' must be one of {_CHOICES[name]}, got {raw!r}"
        )
    if isinstance(template, bool):
        if not isinstance(raw, bool):
            raise ConfigError(f"{source}:{line}: key '{name}' must be a boolean")
        return raw
    if isinstance(template, int) and not isinstance(template, bool):
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{source}:{line}: key '{name}' must be an integer")
        return raw
    if isinstance(template, float) or template is None:
        # YAML 1.1 resolves exponents like "2e9" (no dot) as strings; accept them.
        if isinstance(raw, str):
            try:
                return float(raw)
            except ValueError:
                raise ConfigError(f"{source}:{line}: key '{name}' must be a number") from None
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{source}:{line}: key '{name}' must be a number")
        return float(raw)
    if name == "beam.waist":
        if isinstance(raw, str):
            if raw != "optimal":
                raise ConfigError(
                    f"{source}:{line}: key '{name}' must be 'optimal' or a waist in metres"
                )
            return raw
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{source}:{line}: key '{name}' must be 'optimal' or a number")
        return float(raw)
    if isinstance(template, str):
        if not isinstance(raw, str):
            raise ConfigError(f"{source}:{line}: key '{name}' must be a string")
        return raw
    raise ConfigError(f"{source}:{line}: key '{name}' has unsupported type")  # pragma: no cover


def _validate_semantics(cfg: ExperimentConfig, source: str) -> ExperimentConfig:
    alg = cfg.algorithm
    checks = [
        (cfg.link.bandwidth_hz > 0, "link.bandwidth_hz must be > 0"),
        (cfg.link.distance_m > 0, "link.distance_m must be > 0"),
        (cfg.link.carrier_frequency_hz > 0, "link.carrier_frequency_hz must be > 0"),
        (cfg.link.wavelength_m is None or cfg.link.wavelength_m > 0, "link.wavelength_m must be > 0"),
        (cfg.array.half_index >= 0, "array.half_index must be >= 0"),
        (cfg.array.spacing_m > 0, "array.spacing_m must be > 0"),
        (alg.epsilon is None or alg.epsilon > 0, "algorithm.epsilon must be > 0"),
        (alg.relative_epsilon > 0, "algorithm.relative_epsilon must be > 0"),
        (alg.hard_cap >= 1, "algorithm.hard_cap must be >= 1"),
        (alg.repetitions >= 1, "algorithm.repetitions must be >= 1"),
        (alg.seed >= 0, "algorithm.seed must be >= 0"),
        (alg.mcs_cap is None or alg.mcs_cap > 0, "algorithm.mcs_cap must be > 0"),
        (alg.drop_tol >= 0, "algorithm.drop_tol must be >= 0"),
        (
            cfg.beam.waist == "optimal" or float(cfg.beam.waist) > 0,
            "beam.waist must be 'optimal' or > 0",
        ),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(f"{source}: {message}")
    return cfg


def load_config(
    path: Optional[str] = None,
    overrides: Optional[dict] = None,
) -> ExperimentConfig:
    """Defaults, optionally merged with a YAML file and flat CLI overrides.

    ``overrides`` maps dotted keys (e.g. ``"algorithm.seed"``) to values and
    takes precedence over the file. Unknown keys anywhere are an error.
    """
    cfg = ExperimentConfig()
    source = path or "<defaults>"
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc}") from exc
        data, lines = _parse_with_lines(text, path)
        blocks = {}
        for block_name, block_value in data.items():
            if block_name not in _BLOCKS:
                raise ConfigError(
                    f"{path}:{lines[block_name]}: unknown config block '{block_name}'"
                )
            if not isinstance(block_value, dict):
                raise ConfigError(
                    f"{path}:{lines[block_name]}: block '{block_name}' must be a mapping"
                )
            current = getattr(cfg, block_name)
            updates = {}
            for key, raw in block_value.items():
                dotted = f"{block_name}.{key}"
                if not any(f.name == key for f in fields(current)):
                    raise ConfigError(f"{path}:{lines[dotted]}: unknown key '{dotted}'")
                updates[key] = _coerce(dotted, raw, getattr(current, key), path, lines[dotted])
            blocks[block_name] = replace(current, **updates)
        cfg = replace(cfg, **blocks)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        block_name, _, key = dotted.partition(".")
        if block_name not in _BLOCKS:
            raise ConfigError(f"<override>: unknown config block '{block_name}'")
        current = getattr(cfg, block_name)
        if not any(f.name == key for f in fields(current)):
            raise ConfigError(f"<override>: unknown key '{dotted}'")
        value = _coerce(dotted, value, getattr(current, key), "<override>", 0)
        cfg = replace(cfg, **{block_name: replace(current, **{key: value})})
    return _validate_semantics(cfg, source)
