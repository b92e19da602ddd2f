"""
Parser for scenario configs.

One statement per line: ``# comment``, ``[section]`` or ``key = value [unit]``.

>>> parse_config_text("[grid]\\nstop = 20 1/gamma  # long enough\\n")
[SectionHeader(name='grid', line=1),
    Setting(key='stop', value='20', unit='1/gamma', line=2)]
"""
import logging
import re
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple, TypeVar

from ..cascade import Preset
from ..constants import DENOMINATOR_FLOOR
from ..evolve import IntegrationConfig, IntegrationMethod
from ..exceptions import SimulationError
from . import elements
from .constants import (
    KNOWN_UNITS,
    LOGGER_NAME,
    QUANTITY_KEYS,
    UNIT_FACTORS,
    OutputChoice,
    Section,
    ShapeKind,
    StateKind,
    Units,
)

logger = logging.getLogger(LOGGER_NAME)

T = TypeVar("T")

NOBREAK_WHITESPACE_REGEX = "[ \t\f\v]"
COMMENT_REGEX = re.compile(f"^{NOBREAK_WHITESPACE_REGEX}*(#.*)?$")
SECTION_REGEX = re.compile(
    f"^{NOBREAK_WHITESPACE_REGEX}*\\[(?P<name>[^\\]]*)\\]{NOBREAK_WHITESPACE_REGEX}*(#.*)?$"
)
SETTING_REGEX = re.compile(
    f"^{NOBREAK_WHITESPACE_REGEX}*"
    f"(?P<key>[A-Za-z_][A-Za-z0-9_]*)"
    f"{NOBREAK_WHITESPACE_REGEX}*={NOBREAK_WHITESPACE_REGEX}*"
    f"(?P<value>[^#]*?)"
    f"{NOBREAK_WHITESPACE_REGEX}*(#.*)?$"
)

TRUE_WORDS = {"true", "yes", "on", "1"}
FALSE_WORDS = {"false", "no", "off", "0"}

# Keys each section accepts; other keys are ignored with a warning.
SECTION_KEYS = {
    Section.SCENARIO: {"name", "units"},
    Section.SYSTEM: {
        "preset",
        "gamma",
        "g",
        "atom_decay",
        "kappa_oc",
        "cavity_levels",
        "decay_branching",
        "detuning",
        "tau_jit",
        "excited",
    },
    Section.INPUT: {
        "shape",
        "center",
        "width",
        "rate",
        "start",
        "duration",
        "file",
        "state",
        "truncation",
        "g_max",
        "floor",
    },
    Section.OUTPUT: {
        "mode",
        "center",
        "width",
        "rate",
        "start",
        "duration",
        "file",
        "truncation",
        "g_max",
        "floor",
    },
    Section.GRID: {"start", "stop", "steps"},
    Section.INTEGRATION: {
        "method",
        "dt",
        "rtol",
        "atol",
        "stride",
        "renormalize_trace",
        "eigen_checkpoints",
    },
    Section.OUTPUTS: {
        "time_series",
        "checkpoint",
        "wigner",
        "wigner_postselected",
        "wigner_range",
        "wigner_resolution",
        "modes",
    },
}

INTEGER_SYSTEM_KEYS = {"cavity_levels"}
BOOLEAN_SYSTEM_KEYS = {"excited"}


def _stream_lines(text: str) -> Iterator[Tuple[int, str]]:
    """
    Number the lines of a config, starting at 1.

    >>> list(_stream_lines("a\\nb"))
    [(1, 'a'), (2, 'b')]
    """
    for number, line in enumerate(text.splitlines(), start=1):
        yield number, line


def _split_unit(value: str) -> Tuple[str, Optional[str]]:
    """
    Split a trailing known unit off a value.

    >>> _split_unit("15.6 MHz")
    ('15.6', 'MHz')
    >>> _split_unit("coherent 1.4")
    ('coherent 1.4', None)
    """
    head, _, tail = value.rpartition(" ")
    if head and tail in KNOWN_UNITS:
        return head.strip(), tail
    return value, None


def parse_config_text(text: str) -> List[elements.CONFIG_LINE]:
    """
    Parse a config into its section headers and settings.

    Blank and comment lines are dropped.

    :param text: the config text.
    :return: section headers and settings in file order.
    :raises ConfigError: for lines that are neither.
    """
    parsed: List[elements.CONFIG_LINE] = []
    for number, line in _stream_lines(text):
        if COMMENT_REGEX.match(line):
            continue

        match = SECTION_REGEX.match(line)
        if match:
            parsed.append(elements.SectionHeader(match.group("name").strip(), number))
            continue

        match = SETTING_REGEX.match(line)
        if match:
            value, unit = _split_unit(match.group("value").strip())
            parsed.append(elements.Setting(match.group("key"), value, unit, number))
            continue

        raise elements.ConfigError(f"cannot parse '{line.strip()}'", number)

    return parsed


class _SectionReader:
    """Typed access to the settings of one section, with line-numbered errors."""

    def __init__(self, section: Section, header_line: Optional[int], units: Units):
        self.section = section
        self.header_line = header_line
        self.units = units
        self.settings: Dict[str, elements.Setting] = {}

    def add(self, setting: elements.Setting) -> None:
        if setting.key not in SECTION_KEYS[self.section]:
            logger.warning(
                "line %d: ignoring unknown key '%s' in [%s]",
                setting.line,
                setting.key,
                self.section.value,
            )
            return
        if setting.key in self.settings:
            raise elements.ConfigError(
                f"'{setting.key}' already set on line {self.settings[setting.key].line}",
                setting.line,
            )
        self.settings[setting.key] = setting

    def __contains__(self, key: str) -> bool:
        return key in self.settings

    def line(self, key: Optional[str] = None) -> Optional[int]:
        """Line of a key, or of the section header."""
        if key is not None and key in self.settings:
            return self.settings[key].line
        return self.header_line

    def _convert(self, key: str, convert: Callable[[str], T]) -> T:
        setting = self.settings[key]
        try:
            return convert(setting.value)
        except (ValueError, KeyError) as error:
            raise elements.ConfigError(
                f"bad value '{setting.value}' for '{key}': {error}", setting.line
            ) from None

    def text(self, key: str, default: Optional[str] = None) -> str:
        if key not in self.settings:
            if default is None:
                raise elements.ConfigError(
                    f"[{self.section.value}] needs '{key}'", self.header_line
                )
            return default
        self._unitless(key)
        return self.settings[key].value

    def choice(self, key: str, kind: Callable[[str], T], default: Optional[T] = None) -> T:
        if key not in self.settings:
            if default is None:
                raise elements.ConfigError(
                    f"[{self.section.value}] needs '{key}'", self.header_line
                )
            return default
        self._unitless(key)
        return self._convert(key, kind)

    def integer(self, key: str, default: Optional[int] = None) -> int:
        return self.choice(key, int, default)

    def flag(self, key: str, default: bool) -> bool:
        if key not in self.settings:
            return default
        word = self.settings[key].value.lower()
        if word not in TRUE_WORDS | FALSE_WORDS:
            raise elements.ConfigError(
                f"'{key}' must be true or false, got '{word}'", self.settings[key].line
            )
        return word in TRUE_WORDS

    def number(self, key: str, default: Optional[float] = None) -> Optional[float]:
        """A float, converted to the internal unit when the key has a physical dimension."""
        if key not in self.settings:
            return default
        setting = self.settings[key]
        value = self._convert(key, float)
        quantity = QUANTITY_KEYS.get(key)
        if quantity is None:
            self._unitless(key)
            return value
        factors = UNIT_FACTORS[self.units][quantity]
        if setting.unit is None:
            raise elements.ConfigError(
                f"'{key}' needs a unit, one of {', '.join(sorted(factors))}", setting.line
            )
        if setting.unit not in factors:
            raise elements.ConfigError(
                f"unit '{setting.unit}' is not valid for '{key}' in a "
                f"{self.units.value} scenario",
                setting.line,
            )
        return value * factors[setting.unit]

    def _unitless(self, key: str) -> None:
        setting = self.settings[key]
        if setting.unit is not None:
            raise elements.ConfigError(f"'{key}' takes no unit", setting.line)


def _state(value: str) -> Tuple[StateKind, int, complex]:
    """
    Parse ``fock n`` or ``coherent re [im]``.

    >>> _state("coherent 1.4")
    (<StateKind.COHERENT: 'coherent'>, 0, (1.4+0j))
    """
    words = value.split()
    kind = StateKind(words[0])
    if kind is StateKind.FOCK:
        if len(words) != 2:
            raise ValueError("expected 'fock n'")
        return kind, int(words[1]), 0j
    if len(words) not in (2, 3):
        raise ValueError("expected 'coherent re [im]'")
    imag = float(words[2]) if len(words) == 3 else 0.0
    return kind, 0, complex(float(words[1]), imag)


def _pulse(reader: _SectionReader, kind: ShapeKind, base: Path) -> elements.PulseSpec:
    path = None
    if "file" in reader:
        path = base / reader.text("file")
    try:
        return elements.PulseSpec(
            kind=kind,
            center=reader.number("center"),
            width=reader.number("width"),
            rate=reader.number("rate"),
            start=reader.number("start", 0.0) or 0.0,
            duration=reader.number("duration"),
            path=path,
        )
    except ValueError as error:
        raise elements.ConfigError(str(error), reader.line("shape")) from None


def _system(reader: _SectionReader) -> Tuple[Preset, Dict[str, Any]]:
    preset = reader.choice("preset", Preset)
    params: Dict[str, Any] = {}
    for key in sorted(reader.settings):
        if key == "preset":
            continue
        if key in INTEGER_SYSTEM_KEYS:
            params[key] = reader.integer(key)
        elif key in BOOLEAN_SYSTEM_KEYS:
            params[key] = reader.flag(key, True)
        else:
            params[key] = reader.number(key)
    return preset, params


def _validated(build: Callable[[], T], line: Optional[int]) -> T:
    try:
        return build()
    except elements.ConfigError:
        raise
    except (ValueError, SimulationError) as error:
        raise elements.ConfigError(str(error), line) from None


def _readers(lines: List[elements.CONFIG_LINE]) -> Dict[Section, _SectionReader]:
    readers: Dict[Section, _SectionReader] = {}
    current: Optional[_SectionReader] = None
    units = Units.DIMENSIONLESS
    for line in lines:
        if isinstance(line, elements.SectionHeader):
            try:
                section = Section(line.name)
            except ValueError:
                raise elements.ConfigError(f"unknown section '{line.name}'", line.line) from None
            if section in readers:
                raise elements.ConfigError(f"section [{line.name}] repeated", line.line)
            current = readers[section] = _SectionReader(section, line.line, units)
            continue
        if current is None:
            raise elements.ConfigError(f"'{line.key}' appears before any section", line.line)
        if current.section is Section.SCENARIO and line.key == "units":
            try:
                units = Units(line.value)
            except ValueError:
                raise elements.ConfigError(
                    f"unknown unit system '{line.value}'", line.line
                ) from None
        current.add(line)
    for reader in readers.values():
        reader.units = units
    for section in (Section.SYSTEM, Section.INPUT, Section.GRID):
        if section not in readers:
            raise elements.ConfigError(f"missing section [{section.value}]")
    return readers


def parse_scenario(text: str, base: Path = Path(".")) -> elements.ScenarioConfig:
    """
    Parse and validate a scenario config.

    :param text: config text.
    :param base: directory that relative file paths are resolved against.
    :return: the validated scenario.
    :raises ConfigError: with the offending line number.
    """
    readers = _readers(parse_config_text(text))
    empty = _SectionReader(Section.OUTPUTS, None, Units.DIMENSIONLESS)
    scenario = readers.get(Section.SCENARIO, empty)
    system = readers[Section.SYSTEM]
    source = readers[Section.INPUT]
    target = readers.get(Section.OUTPUT, empty)
    grid = readers[Section.GRID]
    integration = readers.get(Section.INTEGRATION, empty)
    outputs = readers.get(Section.OUTPUTS, empty)

    preset, params = _system(system)
    shape = source.choice("shape", ShapeKind)
    state, photons, alpha = source.choice("state", _state, (StateKind.FOCK, 1, 0j))
    input_spec = _validated(
        lambda: elements.InputSpec(
            pulse=_pulse(source, shape, base),
            state=state,
            photons=photons,
            alpha=alpha,
            truncation=source.integer("truncation", 1),
            g_max=source.number("g_max"),
            floor=source.number("floor", DENOMINATOR_FLOOR) or 0.0,
        ),
        source.line("truncation"),
    )

    choice = target.choice("mode", OutputChoice, OutputChoice.REFLECT)
    explicit = choice.value in {kind.value for kind in ShapeKind}
    output_spec = _validated(
        lambda: elements.OutputSpec(
            choice=choice,
            pulse=_pulse(target, ShapeKind(choice.value), base) if explicit else None,
            truncation=target.integer("truncation", 1),
            g_max=target.number("g_max"),
            floor=target.number("floor", DENOMINATOR_FLOOR) or 0.0,
        ),
        target.line("mode"),
    )

    grid_spec = _validated(
        lambda: elements.GridSpec(
            start=grid.number("start", 0.0) or 0.0,
            stop=grid.number("stop") or 0.0,
            steps=grid.integer("steps"),
        ),
        grid.line(),
    )

    integration_config = _validated(
        lambda: IntegrationConfig(
            method=integration.choice(
                "method", IntegrationMethod, IntegrationMethod.RK45_ADAPTIVE
            ),
            rtol=integration.number("rtol", IntegrationConfig.rtol) or 0.0,
            atol=integration.number("atol", IntegrationConfig.atol) or 0.0,
            dt=integration.number("dt"),
            stride=integration.integer("stride", 1),
            renormalize_trace=integration.flag("renormalize_trace", True),
            eigen_checkpoints=integration.integer("eigen_checkpoints", 0),
        ),
        integration.line(),
    )

    outputs_spec = _validated(
        lambda: elements.OutputsSpec(
            time_series=outputs.flag("time_series", True),
            checkpoint=outputs.flag("checkpoint", True),
            wigner=outputs.flag("wigner", False),
            wigner_postselected=outputs.flag("wigner_postselected", False),
            wigner_range=outputs.number("wigner_range", 4.0) or 0.0,
            wigner_resolution=outputs.integer("wigner_resolution", 81),
            modes=outputs.flag("modes", True),
        ),
        outputs.line(),
    )

    return _validated(
        lambda: elements.ScenarioConfig(
            name=scenario.text("name", "scenario"),
            units=scenario.choice("units", Units, Units.DIMENSIONLESS),
            preset=preset,
            system=params,
            input=input_spec,
            output=output_spec,
            grid=grid_spec,
            integration=integration_config,
            outputs=outputs_spec,
        ),
        target.line("truncation"),
    )


def load_scenario(path: Path) -> elements.ScenarioConfig:
    """Read and validate a scenario config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as error:
        raise elements.ConfigError(f"cannot read {path}: {error.strerror}") from None
    config = parse_scenario(text, path.parent)
    logger.debug("loaded %s", config.describe())
    return config
