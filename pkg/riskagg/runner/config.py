"""
Experiment Configuration
========================

ExperimentConfig mirrors the config file keys one to one. Files are YAML or
JSON (JSON is valid YAML), loaded with ``yaml.safe_load``.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml

from ..errors import ConfigError
from ..scenarios import DEFAULT_DRAW_CAP
from ..tail_risk import DEFAULT_TARGET_RETURN

logger = logging.getLogger(__name__)


class ExperimentKind(Enum):
    PROB_CURVES = "prob_curves"
    STABILITY = "stability"
    EFFSIZE = "effsize"
    GENERATE = "gen"


class MethodKind(Enum):
    """Scenario generation methods compared by the stability study"""
    SAMPLING = "sampling"              # Plain Monte Carlo sample
    AGG_MONOTONIC = "agg_monotonic"    # Aggregation sampling, conservative region
    AGG_CONE = "agg_cone"              # Aggregation sampling, exact region
    AGG_REDUCTION = "agg_reduction"    # Plain sample reduced with the exact region


REGION_CHOICES = ("ellipsoid", "orthant", "monotonic", "whole")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

_DEFAULT_REGIONS = {
    ExperimentKind.PROB_CURVES: ["ellipsoid", "orthant", "monotonic"],
    ExperimentKind.EFFSIZE: ["orthant"],
    ExperimentKind.GENERATE: ["orthant"],
    ExperimentKind.STABILITY: ["orthant"],
}


@dataclass
class ExperimentConfig:
    """Parameters of one experiment run"""
    experiment: ExperimentKind = ExperimentKind.STABILITY
    d: int = 5
    d_max: int = 15
    beta: Optional[float] = None
    betas: List[float] = field(default_factory=list)
    rho: float = 0.0
    rhos: List[float] = field(default_factory=lambda: [0.0, 0.3])
    returns_path: Optional[str] = None
    regions: Optional[List[str]] = None
    methods: List[MethodKind] = field(
        default_factory=lambda: [MethodKind.SAMPLING, MethodKind.AGG_MONOTONIC, MethodKind.AGG_CONE])
    n_replications: int = 50
    scenario_sizes: List[int] = field(default_factory=lambda: [50, 100, 200, 500, 1000])
    n_risk: int = 100
    master_seed: int = 0
    t: Optional[float] = DEFAULT_TARGET_RETURN
    budget: bool = True
    mc_samples: int = 200_000
    survivor_samples: int = 200_000
    draw_cap: int = DEFAULT_DRAW_CAP
    workers: int = 1
    log_level: str = "WARNING"

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "ExperimentConfig":
        """Build from config-file keys; unknown keys are rejected"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls().updated(**mapping)

    def updated(self, **overrides) -> "ExperimentConfig":
        """Copy with the given fields replaced (None values are ignored)"""
        values = {k: v for k, v in overrides.items() if v is not None}
        try:
            if 'experiment' in values:
                values['experiment'] = ExperimentKind(str(values['experiment']).replace('-', '_'))
            if 'methods' in values:
                values['methods'] = [MethodKind(m) for m in values['methods']]
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if 'beta' in values and 'betas' not in values:
            values['betas'] = [values['beta']]
        if values.get('betas') and 'beta' not in values:
            values['beta'] = values['betas'][0]
        if 't' in values and values['t'] in ('-inf', '-Infinity'):
            values['t'] = float('-inf')
        return replace(self, **values)

    @property
    def region_kinds(self) -> List[str]:
        return list(self.regions) if self.regions else list(_DEFAULT_REGIONS[self.experiment])

    @property
    def target_return(self) -> Optional[float]:
        if self.t is None or self.t == float('-inf'):
            return None
        return float(self.t)

    def validate(self) -> "ExperimentConfig":
        """Raise ConfigError on the first violated invariant"""
        if not self.betas:
            raise ConfigError("beta is required (flag --beta or config key 'beta')")
        for b in self.betas:
            if not isinstance(b, (int, float)) or not 0.0 < b < 1.0:
                raise ConfigError(f"beta must lie in (0, 1), got {b}")
        if self.d < 1 or self.d_max < 1:
            raise ConfigError(f"dimensions must be >= 1 (d={self.d}, d_max={self.d_max})")
        if self.n_replications < 2:
            raise ConfigError(f"n_replications must be >= 2, got {self.n_replications}")
        sizes = list(self.scenario_sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigError(f"scenario_sizes must be strictly increasing, got {sizes}")
        if sizes[0] < 2:
            raise ConfigError(f"scenario sizes must be >= 2, got {sizes[0]}")
        if self.n_risk < 1:
            raise ConfigError(f"n_risk must be >= 1, got {self.n_risk}")
        for r in [self.rho, *self.rhos]:
            if not 0.0 <= r < 1.0:
                raise ConfigError(f"equicorrelation must lie in [0, 1), got {r}")
        for region in self.region_kinds:
            if region not in REGION_CHOICES:
                raise ConfigError(f"unknown region '{region}', expected one of {REGION_CHOICES}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.mc_samples < 1 or self.survivor_samples < 1 or self.draw_cap < 1:
            raise ConfigError("mc_samples, survivor_samples and draw_cap must be >= 1")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if str(self.log_level).upper() not in LOG_LEVELS:
            raise ConfigError(f"log_level must be one of {LOG_LEVELS}, got {self.log_level}")
        if self.returns_path is not None and not Path(self.returns_path).is_file():
            raise ConfigError(f"returns file not found: {self.returns_path}")
        return self

    def to_json_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out['experiment'] = self.experiment.value
        out['methods'] = [m.value for m in self.methods]
        out['regions'] = self.region_kinds
        if out['t'] == float('-inf'):
            out['t'] = '-inf'
        return out


# Published stability problems, solved on synthetic markets of the same size
PRESETS: Dict[str, Dict[str, Any]] = {
    'd5_beta95': {'experiment': 'stability', 'd': 5, 'beta': 0.95,
                  'scenario_sizes': [50, 100, 200, 500, 1000]},
    'd10_beta99': {'experiment': 'stability', 'd': 10, 'beta': 0.99,
                   'scenario_sizes': [100, 200, 500, 1000, 2000]},
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return ExperimentConfig.from_mapping(PRESETS[name])


def load_config(config_path: Union[str, Path]) -> ExperimentConfig:
    """Load an ExperimentConfig from a YAML or JSON file"""
    try:
        with open(config_path, 'r') as f:
            mapping = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot load config {config_path}: {e}") from e
    if mapping is None:
        mapping = {}
    if not isinstance(mapping, dict):
        raise ConfigError(f"config {config_path} must contain a mapping, got {type(mapping).__name__}")
    logger.info("loaded config %s (%d keys)", config_path, len(mapping))
    return ExperimentConfig.from_mapping(mapping)
