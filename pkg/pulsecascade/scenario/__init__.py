"""
Scenario configs: parsing, validation and running.
"""

from .constants import CONFIG_SUFFIX, OutputChoice, Section, ShapeKind, StateKind, Units
from .elements import ConfigError, ScenarioConfig
from .parser import load_scenario, parse_config_text, parse_scenario
from .runner import RunSummary, find_modes, run_scenario, wigner_from_checkpoint, write_modes

__all__ = list(
    map(
        str,
        [
            load_scenario,
            parse_scenario,
            parse_config_text,
            run_scenario,
            find_modes,
            write_modes,
            wigner_from_checkpoint,
            RunSummary,
            ScenarioConfig,
            ConfigError,
            Section,
            ShapeKind,
            StateKind,
            OutputChoice,
            Units,
            CONFIG_SUFFIX,
        ],
    )
)
