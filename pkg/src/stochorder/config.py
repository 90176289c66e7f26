"""Loading and validating model configuration.

The shipped ``defaults.toml`` doubles as the schema: a user file is merged
over it key by key, and every key it sets must already exist there with a
value of compatible type.  ``key=value`` overrides go through the same check.
"""
from __future__ import annotations

import copy
import hashlib
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

import numpy as np
import tomli

from stochorder.heatsim import (
    DesignOption,
    DesignSpec,
    EmissionFactors,
    InputLevels,
    Scenario,
    TechnologyParams,
)

FACTOR_ORDER = ("operational_cost", "discount_rate", "cop", "emission_factor")
LEVEL_ORDER = ("LOW", "MED", "HIGH")
SCENARIO_ORDER = ("GREEN", "NEUTRAL", "MARKET")
TRAJECTORY_KEYS = ("elec_price_eur_per_mwh", "gas_price_eur_per_mwh")


class ConfigError(ValueError):
    """Bad configuration. ``key`` is the dotted path at fault, if known."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line else ""
        super().__init__(f"{message}{where}")


def default_config_text() -> str:
    return resources.files("stochorder").joinpath("defaults.toml").read_text(encoding="utf-8")


def _defaults() -> dict:
    return tomli.loads(default_config_text())


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    if not text:
        return None
    leaf = re.escape(key.split(".")[-1])
    pat = re.compile(rf"^\s*(\[.*\b{leaf}\b.*\]|{leaf}\s*=)")
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.search(line):
            return i
    return None


def _compatible(default: Any, value: Any) -> bool:
    if isinstance(default, bool) or isinstance(value, bool):
        return isinstance(default, bool) and isinstance(value, bool)
    if isinstance(default, (int, float)):
        return isinstance(value, (int, float))
    if isinstance(default, list):
        return isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                               for v in value)
    return isinstance(value, type(default))


def _merge(base: dict, update: Mapping, prefix: str, text: Optional[str]) -> None:
    for key, value in update.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key {path!r}", path, _line_of(text, path))
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path!r} must be a section", path, _line_of(text, path))
            _merge(base[key], value, path + ".", text)
        else:
            if not _compatible(base[key], value):
                raise ConfigError(f"bad value for {path!r}: expected {type(base[key]).__name__}",
                                  path, _line_of(text, path))
            base[key] = value


def parse_override(item: str) -> dict:
    """``a.b.c=value`` to a nested dict; the value is read as a TOML literal."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, raw = (s.strip() for s in item.split("=", 1))
    if not key:
        raise ConfigError(f"override {item!r} has an empty key")
    try:
        value = tomli.loads(f"v = {raw}")["v"]
    except tomli.TOMLDecodeError:
        value = raw
    nested: dict = {}
    node = nested
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return nested


def _resample(values: list, years: int) -> tuple[float, ...]:
    """Stretch a yearly trajectory onto ``years`` points by linear interpolation."""
    if len(values) == years:
        return tuple(float(v) for v in values)
    if len(values) == 1:
        return tuple(float(values[0]) for _ in range(years))
    src = np.linspace(0.0, 1.0, len(values))
    dst = np.linspace(0.0, 1.0, years)
    return tuple(float(v) for v in np.interp(dst, src, values))


@dataclass(frozen=True)
class ModelConfig:
    data: dict
    source: str = "<defaults>"

    @property
    def horizon(self) -> int:
        return int(self.data["horizon"]["years"])

    @property
    def base_demand(self) -> tuple[float, float]:
        d = self.data["demand"]
        return float(d["baseload_mwh"]), float(d["seasonal_mwh"])

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def technology(self) -> TechnologyParams:
        t = self.data["technology"]
        designs = {
            DesignOption(name): DesignSpec(
                capital_cost=float(d["capital_cost_mln_eur"]),
                chp_capacity=float(d["chp_capacity_mw"]),
                hp_capacity=float(d["hp_capacity_mw"]),
                description=d.get("description", ""),
            )
            for name, d in self.data["designs"].items()
        }
        return TechnologyParams(designs=designs,
                                chp_heat_efficiency=float(t["chp_heat_efficiency"]),
                                nox_co2e_weight=float(t["nox_co2e_weight"]))

    def scenario(self, name: str) -> Scenario:
        s = self.data["scenarios"][name]
        return Scenario(
            name=name,
            carbon_penalty=float(s["carbon_penalty_eur_per_mton"]),
            demand_growth=float(s["demand_growth"]),
            elec_price=_resample(s["elec_price_eur_per_mwh"], self.horizon),
            gas_price=_resample(s["gas_price_eur_per_mwh"], self.horizon),
        )

    def scenarios(self, names: Optional[Iterable[str]] = None) -> list[Scenario]:
        return [self.scenario(n) for n in (names or SCENARIO_ORDER)]

    def factor_levels(self) -> dict[str, tuple[str, ...]]:
        return {f: tuple(lv for lv in LEVEL_ORDER if lv in self.data["levels"][f])
                for f in FACTOR_ORDER}

    def input_levels(self, assignment: Mapping[str, str]) -> InputLevels:
        """Resolve a factor -> level-name assignment into numeric inputs."""
        lv = self.data["levels"]
        cop = lv["cop"][assignment["cop"]]
        ef = lv["emission_factor"][assignment["emission_factor"]]
        return InputLevels(
            operational_cost=_resample(lv["operational_cost"][assignment["operational_cost"]],
                                       self.horizon),
            discount_rate=float(lv["discount_rate"][assignment["discount_rate"]]),
            cop_heat_pump=float(cop["heat_pump"]),
            chp_heat_efficiency=float(cop["chp_heat_efficiency"]),
            emission_factors=EmissionFactors(chp_co2=float(ef["chp_co2"]), hp_co2=float(ef["hp_co2"]),
                                             gas_import_co2=float(ef["gas_import_co2"]),
                                             chp_nox=float(ef["chp_nox"])),
            names=dict(assignment),
        )


def _validate(cfg: ModelConfig, text: Optional[str]) -> None:
    def fail(msg, key):
        raise ConfigError(msg, key, _line_of(text, key))

    if cfg.horizon < 1:
        fail("horizon.years must be >= 1", "horizon.years")
    for key in ("baseload_mwh", "seasonal_mwh"):
        if cfg.data["demand"][key] < 0:
            fail(f"demand.{key} must be >= 0", f"demand.{key}")
    for name, s in cfg.data["scenarios"].items():
        for key in TRAJECTORY_KEYS:
            if not s[key]:
                fail(f"scenarios.{name}.{key} is empty", f"scenarios.{name}.{key}")
    for level, values in cfg.data["levels"]["operational_cost"].items():
        if not values:
            fail(f"levels.operational_cost.{level} is empty", f"levels.operational_cost.{level}")
    try:
        cfg.technology()
        cfg.scenarios()
        for combo in _all_level_assignments(cfg):
            cfg.input_levels(combo)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _all_level_assignments(cfg: ModelConfig):
    levels = cfg.factor_levels()
    for f in FACTOR_ORDER:
        for lv in levels[f]:
            yield {g: (lv if g == f else levels[g][0]) for g in FACTOR_ORDER}


def load_config(path: Optional[str | Path] = None, overrides: Iterable[str] = ()) -> ModelConfig:
    """Defaults, then the file at ``path`` (if any), then ``key=value`` overrides."""
    data = _defaults()
    text = None
    source = "<defaults>"
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        try:
            user = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        _merge(data, user, "", text)
        source = str(path)
    for item in overrides:
        _merge(data, parse_override(item), "", None)
    cfg = ModelConfig(copy.deepcopy(data), source)
    _validate(cfg, text)
    return cfg
