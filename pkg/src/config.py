"""
Configuration management system

A scenario file is YAML (or JSON) with one section per model layer:

    space, links, demography, epi, intervention, design.<name>, run, logging

Every key has a dataclass default, so a file only lists overrides. Unknown
sections or keys are errors.
"""

import copy
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from .demography import DemographyParams
from .epidemic import EpidemicParams
from .interventions import EffectSet, InterventionSpec
from .link_dynamics import LinkParams
from .sampling_designs import DesignSpec
from .social_space import SpaceConfig

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Scenario file could not be parsed or failed validation"""


@dataclass
class RunConfig:
    steps: int = 2000
    burn_in: int = 500
    replicates: int = 1
    base_seed: int = 12345
    output_dir: str = "results"
    workers: int = 1
    strict: bool = False
    audit: bool = False
    freeze_world_at: Optional[int] = None
    snapshot_in: Optional[str] = None
    snapshot_out: Optional[str] = None
    scenario: str = "baseline"

    def validate(self) -> List[str]:
        problems = []
        if self.burn_in < 0:
            problems.append("run.burn_in must be >= 0")
        if self.steps <= self.burn_in:
            problems.append(f"run.steps ({self.steps}) must exceed run.burn_in ({self.burn_in})")
        if self.replicates < 1:
            problems.append("run.replicates must be >= 1")
        if self.workers < 1:
            problems.append("run.workers must be >= 1")
        if self.freeze_world_at is not None and self.freeze_world_at < 0:
            problems.append("run.freeze_world_at must be >= 0 when set")
        if not self.scenario or any(c in self.scenario for c in "/\\ "):
            problems.append("run.scenario must be a non-empty label without spaces or slashes")
        return problems


@dataclass
class LoggingConfig:
    level: str = "INFO"
    file: Optional[str] = None

    def validate(self) -> List[str]:
        if self.level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            return [f"logging.level {self.level!r} is not a logging level"]
        return []


@dataclass
class ScenarioConfig:
    """Every section of one scenario, with defaults for anything the file omits"""

    space: SpaceConfig = field(default_factory=SpaceConfig)
    links: LinkParams = field(default_factory=LinkParams)
    demography: DemographyParams = field(default_factory=DemographyParams)
    epi: EpidemicParams = field(default_factory=EpidemicParams)
    intervention: InterventionSpec = field(default_factory=InterventionSpec)
    designs: Dict[str, DesignSpec] = field(default_factory=dict)
    run: RunConfig = field(default_factory=RunConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    def validate(self) -> List[str]:
        problems = []
        for section in (self.space, self.links, self.demography, self.epi, self.intervention,
                        self.run, self.logging):
            problems.extend(section.validate())
        for spec in self.designs.values():
            problems.extend(spec.validate())
        return problems

    def to_dict(self) -> Dict[str, Any]:
        """Nested plain-data form, laid out exactly like a scenario file"""
        intervention = asdict(self.intervention)
        intervention.update(intervention.pop("effects"))
        designs = {}
        for name, spec in self.designs.items():
            values = asdict(spec)
            values.pop("name")
            designs[name] = values
        return {
            "space": asdict(self.space),
            "links": asdict(self.links),
            "demography": asdict(self.demography),
            "epi": asdict(self.epi),
            "intervention": intervention,
            "design": designs,
            "run": asdict(self.run),
            "logging": asdict(self.logging),
        }


SECTIONS = {
    "space": SpaceConfig,
    "links": LinkParams,
    "demography": DemographyParams,
    "epi": EpidemicParams,
    "run": RunConfig,
    "logging": LoggingConfig,
}
EFFECT_KEYS = {f.name for f in fields(EffectSet)}
INTERVENTION_KEYS = {f.name for f in fields(InterventionSpec)} - {"effects"}


def _section(raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = raw.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"Section {name} must be a mapping")
    return dict(value)


def _int_keyed(section: str, values: Any) -> Dict[int, float]:
    if not isinstance(values, dict):
        raise ConfigError(f"{section} must be a mapping of group id to multiplier")
    try:
        return {int(k): float(v) for k, v in values.items()}
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{section}: {e}") from e


def _build(cls, section: str, values: Optional[Dict[str, Any]], **extra):
    """Instantiate a section dataclass, rejecting keys it does not declare"""
    if values is not None and not isinstance(values, dict):
        raise ConfigError(f"Section {section} must be a mapping")
    values = dict(values or {})
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"Unknown key(s) in {section}: {', '.join(unknown)}")
    values.update(extra)
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(f"Bad value in {section}: {e}") from e


def recursive_update(d: Dict[str, Any], u: Dict[str, Any]) -> Dict[str, Any]:
    for k, v in u.items():
        if isinstance(v, dict) and isinstance(d.get(k), dict):
            d[k] = recursive_update(d[k], v)
        else:
            d[k] = v
    return d


def expand_dotted(updates: Dict[str, Any]) -> Dict[str, Any]:
    """{"links.sex_mix.ff": 0.1} -> {"links": {"sex_mix": {"ff": 0.1}}}"""
    nested: Dict[str, Any] = {}
    for key, value in updates.items():
        parts = key.split(".")
        node = nested
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return nested


class ConfigManager:
    """Loads, validates, updates and saves scenario configurations"""

    def __init__(self, config_dir: Union[str, Path] = "configs"):
        """
        Initialize config manager

        Args:
            config_dir: Directory searched for scenario names given without a path
        """
        self.config_dir = Path(config_dir)

    def _resolve(self, name_or_path: Union[str, Path]) -> Path:
        candidate = Path(name_or_path)
        if candidate.exists():
            return candidate
        for ext in [".yaml", ".yml", ".json"]:
            candidate = self.config_dir / f"{name_or_path}{ext}"
            if candidate.exists():
                return candidate
        raise FileNotFoundError(f"Config file not found: {name_or_path}")

    def load_config(self, name_or_path: Union[str, Path], validate: bool = True) -> ScenarioConfig:
        """
        Load a scenario file

        Args:
            name_or_path: File path, or a name looked up in config_dir
            validate: Whether to validate the config

        Returns:
            The scenario with defaults filled in
        """
        config_path = self._resolve(name_or_path)

        with open(config_path, "r") as f:
            try:
                if config_path.suffix in [".yaml", ".yml"]:
                    raw = yaml.safe_load(f)
                else:
                    raw = json.load(f)
            except (yaml.YAMLError, json.JSONDecodeError) as e:
                raise ConfigError(f"Could not parse {config_path}: {e}") from e

        cfg = self.from_dict(raw or {}, validate=validate)
        logger.info(f"Loaded config: {config_path} (scenario {cfg.run.scenario}, "
                    f"{len(cfg.designs)} design(s), intervention {'on' if cfg.intervention.enabled else 'off'})")
        return cfg

    def from_dict(self, raw: Dict[str, Any], validate: bool = True) -> ScenarioConfig:
        if not isinstance(raw, dict):
            raise ConfigError("A scenario must be a mapping of sections")
        unknown = sorted(set(raw) - set(SECTIONS) - {"intervention", "design"})
        if unknown:
            raise ConfigError(f"Unknown section(s): {', '.join(unknown)}")

        links_raw = _section(raw, "links")
        if "sex_mix" in links_raw:
            links_raw["sex_mix"] = {**LinkParams().sex_mix, **(links_raw["sex_mix"] or {})}
        epi_raw = _section(raw, "epi")
        if "group_link_mult" in epi_raw:
            epi_raw["group_link_mult"] = _int_keyed("epi.group_link_mult", epi_raw["group_link_mult"] or {})

        cfg = ScenarioConfig(
            space=_build(SpaceConfig, "space", raw.get("space")),
            links=_build(LinkParams, "links", links_raw),
            demography=_build(DemographyParams, "demography", raw.get("demography")),
            epi=_build(EpidemicParams, "epi", epi_raw),
            intervention=self._build_intervention(_section(raw, "intervention")),
            designs=self._build_designs(_section(raw, "design")),
            run=_build(RunConfig, "run", raw.get("run")),
            logging=_build(LoggingConfig, "logging", raw.get("logging")),
        )
        if validate:
            self._validate_config(cfg)
        return cfg

    def _build_intervention(self, values: Dict[str, Any]) -> InterventionSpec:
        unknown = sorted(set(values) - EFFECT_KEYS - INTERVENTION_KEYS)
        if unknown:
            raise ConfigError(f"Unknown key(s) in intervention: {', '.join(unknown)}")
        effects = _build(EffectSet, "intervention", {k: v for k, v in values.items() if k in EFFECT_KEYS})
        return _build(InterventionSpec, "intervention",
                      {k: v for k, v in values.items() if k in INTERVENTION_KEYS}, effects=effects)

    def _build_designs(self, section: Dict[str, Any]) -> Dict[str, DesignSpec]:
        designs = {}
        for name in section:
            values = _section(section, name)
            if "name" in values:
                raise ConfigError(f"design.{name}: the design name is the section name, not a key")
            if "group_weights" in values:
                values["group_weights"] = _int_keyed(f"design.{name}.group_weights", values["group_weights"] or {})
            designs[str(name)] = _build(DesignSpec, f"design.{name}", values, name=str(name))
        return designs

    def _validate_config(self, cfg: ScenarioConfig):
        """Raise on hard problems, warn on values that are legal but suspicious"""
        problems = cfg.validate()
        if problems:
            raise ConfigError("Invalid configuration:\n  " + "\n  ".join(problems))

        for message in cfg.demography.equilibrium_warnings():
            logger.warning(message)

        if cfg.epi.enabled:
            late_exit = cfg.demography.death_hazard * cfg.epi.mortality_mult_late
            if late_exit > 0 and not (0.5 <= cfg.epi.late_mean * late_exit <= 2.0):
                logger.warning(
                    f"epi.late_mean={cfg.epi.late_mean} disagrees with the late-stage exit implied by "
                    f"mortality ({1.0 / late_exit:.3g} steps); late-stage dwell follows mortality"
                )
        if cfg.epi.initial_infected > cfg.demography.pop_target:
            logger.warning(f"epi.initial_infected {cfg.epi.initial_infected} exceeds the population target")

        for spec in cfg.designs.values():
            if spec.attrition_prob == 0 and spec.target_size is None and (spec.trace_prob > 0 or spec.random_prob > 0):
                logger.warning(f"design.{spec.name} has acquisition but no attrition or target; it will only grow")

        if cfg.run.freeze_world_at is not None and cfg.run.freeze_world_at >= cfg.run.steps:
            logger.warning("run.freeze_world_at is past the last step and has no effect")

    def update_config(self, cfg: ScenarioConfig, updates: Dict[str, Any]) -> ScenarioConfig:
        """
        Apply overrides and revalidate

        Args:
            cfg: Base scenario (left untouched)
            updates: Dotted keys (``links.base_prob``) or nested sections

        Returns:
            A new scenario
        """
        data = copy.deepcopy(cfg.to_dict())
        recursive_update(data, expand_dotted(updates))
        updated = self.from_dict(data)
        logger.info(f"Updated config: {', '.join(sorted(updates))}")
        return updated

    def save_config(self, cfg: ScenarioConfig, output_path: Union[str, Path]) -> Path:
        """Write the effective scenario (defaults included) to YAML"""
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w") as f:
            yaml.safe_dump(cfg.to_dict(), f, indent=2, sort_keys=True)
        logger.info(f"Saved config to {output_path}")
        return output_path


# Global config manager instance
_config_manager = None


def get_config_manager(config_dir: Union[str, Path] = "configs") -> ConfigManager:
    """Get global config manager instance"""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager(config_dir)
    return _config_manager


def load_scenario(name_or_path: Union[str, Path]) -> ScenarioConfig:
    """Convenience function to load a scenario"""
    return get_config_manager().load_config(name_or_path)


def parse_value(text: str) -> Any:
    """Command-line value to a typed value, using YAML scalar rules ("0.1" -> 0.1, "true" -> True)"""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse value {text!r}: {e}") from e
