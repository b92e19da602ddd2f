"""
Elements of the scenario config format: parsed lines and validated scenario settings.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..analyze import required_levels
from ..cascade import Preset
from ..constants import DENOMINATOR_FLOOR
from ..evolve import IntegrationConfig
from ..exceptions import SimulationError
from ..pulses import TimeGrid
from .constants import OutputChoice, ShapeKind, StateKind, Units


class ConfigError(SimulationError):
    """
    Raised when a scenario config cannot be parsed or validated.

    Messages start with the offending line, e.g. ``line 12: unknown section 'foo'``.
    """

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class SectionHeader:
    """
    A ``[section]`` line; settings that follow belong to it.
    """

    name: str
    line: int

    def __post_init__(self):
        """Validate section header."""
        if not self.name:
            raise ConfigError("section name is required", self.line)


@dataclass
class Setting:
    """
    A ``key = value [unit]`` line.

    The unit is split off the value only when it is one of the known units; conversion
    happens once the unit system of the scenario is known.
    """

    key: str
    value: str
    unit: Optional[str]
    line: int

    def __post_init__(self):
        """Validate setting."""
        if not self.value:
            raise ConfigError(f"'{self.key}' has no value", self.line)


CONFIG_LINE = Union[SectionHeader, Setting]


@dataclass(frozen=True)
class PulseSpec:
    """A pulse shape and its parameters, in the internal time unit."""

    kind: ShapeKind
    center: Optional[float] = None
    width: Optional[float] = None
    rate: Optional[float] = None
    start: float = 0.0
    duration: Optional[float] = None
    path: Optional[Path] = None

    def __post_init__(self):
        """Validate that the shape has its parameters."""
        required = {
            ShapeKind.GAUSSIAN: ("center", "width"),
            ShapeKind.EXPONENTIAL: ("rate",),
            ShapeKind.FLAT: ("duration",),
            ShapeKind.FILE: ("path",),
        }.get(self.kind, ())
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind.value} pulse needs {', '.join(missing)}")


@dataclass(frozen=True)
class InputSpec:
    """Input virtual cavity: pulse, quantum state and Fock truncation ``N``."""

    pulse: PulseSpec
    state: StateKind = StateKind.FOCK
    photons: int = 1
    alpha: complex = 0j
    truncation: int = 1
    g_max: Optional[float] = None
    floor: float = DENOMINATOR_FLOOR

    def __post_init__(self):
        """Validate the truncation against the state."""
        if not self.floor > 0:
            raise ValueError("floor must be positive")
        if self.truncation < 0:
            raise ValueError("truncation must be non-negative")
        if self.state is StateKind.FOCK and not 0 <= self.photons <= self.truncation:
            raise ValueError(f"fock {self.photons} does not fit truncation {self.truncation}")
        if self.state is StateKind.COHERENT and self.levels < required_levels(self.alpha):
            raise ValueError(
                f"coherent alpha={self.alpha} needs truncation "
                f">= {required_levels(self.alpha) - 1}, got {self.truncation}"
            )
        if self.pulse.kind is ShapeKind.NONE and self.excitations:
            raise ValueError("an input without pulse shape cannot carry photons")

    @property
    def levels(self) -> int:
        """``N + 1``."""
        return self.truncation + 1

    @property
    def excitations(self) -> int:
        """Largest photon number the input state implies."""
        if self.state is StateKind.COHERENT:
            return required_levels(self.alpha) - 1
        return self.photons


@dataclass(frozen=True)
class OutputSpec:
    """Output virtual cavity: how its mode is chosen and its Fock truncation ``M``."""

    choice: OutputChoice = OutputChoice.REFLECT
    pulse: Optional[PulseSpec] = None
    truncation: int = 1
    g_max: Optional[float] = None
    floor: float = DENOMINATOR_FLOOR

    def __post_init__(self):
        """Validate output."""
        if not self.floor > 0:
            raise ValueError("floor must be positive")
        if self.truncation < 1:
            raise ValueError("the output cavity needs truncation >= 1")
        explicit = self.choice.value in {kind.value for kind in ShapeKind}
        if explicit and self.pulse is None:
            raise ValueError(f"output mode {self.choice.value} needs its shape parameters")

    @property
    def levels(self) -> int:
        """``M + 1``."""
        return self.truncation + 1


@dataclass(frozen=True)
class GridSpec:
    """Time grid of a run."""

    start: float
    stop: float
    steps: int

    def __post_init__(self):
        """Validate grid."""
        TimeGrid(self.start, self.stop, self.steps)

    def to_grid(self) -> TimeGrid:
        """The time grid."""
        return TimeGrid(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class OutputsSpec:
    """Files a run writes."""

    time_series: bool = True
    checkpoint: bool = True
    wigner: bool = False
    wigner_postselected: bool = False
    wigner_range: float = 4.0
    wigner_resolution: int = 81
    modes: bool = True

    def __post_init__(self):
        """Validate Wigner settings."""
        if self.wigner_range <= 0:
            raise ValueError("wigner_range must be positive")
        if self.wigner_resolution < 2:
            raise ValueError("wigner_resolution must be at least 2")


@dataclass(frozen=True)
class ScenarioConfig:
    """A complete, validated scenario."""

    name: str
    units: Units
    preset: Preset
    system: Dict[str, Any]
    input: InputSpec
    output: OutputSpec
    grid: GridSpec
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    outputs: OutputsSpec = field(default_factory=OutputsSpec)

    def __post_init__(self):
        """Validate the output truncation against the input state."""
        if self.output.truncation < self.input.excitations:
            raise ValueError(
                f"output truncation {self.output.truncation} cannot hold the "
                f"{self.input.excitations} photons of the input"
            )
        if self.outputs.wigner_postselected and self.preset is not Preset.ATOM_IN_CAVITY:
            raise ValueError("wigner_postselected needs the atom_in_cavity preset")

    @property
    def cat_amplitude(self) -> Optional[complex]:
        """Amplitude of the target cat state, for atom-in-cavity runs with coherent input."""
        if self.preset is Preset.ATOM_IN_CAVITY and self.input.state is StateKind.COHERENT:
            return self.input.alpha
        return None

    def describe(self) -> str:
        """One-line description used in logs."""
        state = (
            f"coherent {self.input.alpha}"
            if self.input.state is StateKind.COHERENT
            else f"fock {self.input.photons}"
        )
        return (
            f"{self.name}: {self.preset.value}, {state}, N={self.input.truncation}, "
            f"M={self.output.truncation}, {self.grid.steps} steps, "
            f"dt={(self.grid.stop - self.grid.start) / max(self.grid.steps - 1, 1):.3g}"
        )

