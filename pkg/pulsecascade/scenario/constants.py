"""
Constants of the scenario config package.
"""

import enum
import math

LOGGER_NAME = "pulsecascade.scenario"

CONFIG_SUFFIX = ".cfg"


class Units(enum.Enum):
    """Unit system of a scenario; every run uses a single time unit internally."""

    DIMENSIONLESS = "dimensionless"
    MICROSECONDS = "microseconds"


class Quantity(enum.Enum):
    """Physical dimension of a config value."""

    TIME = enum.auto()
    RATE = enum.auto()


# Scale factors to the internal unit, per unit system.
UNIT_FACTORS = {
    Units.DIMENSIONLESS: {
        Quantity.TIME: {"1/gamma": 1.0},
        Quantity.RATE: {"gamma": 1.0},
    },
    Units.MICROSECONDS: {
        Quantity.TIME: {"us": 1.0, "ns": 1e-3},
        # MHz is an ordinary frequency, converted to angular frequency.
        Quantity.RATE: {"MHz": 2 * math.pi, "rad/us": 1.0},
    },
}

KNOWN_UNITS = frozenset(
    unit for table in UNIT_FACTORS.values() for units in table.values() for unit in units
)

# Keys carrying a physical dimension, wherever they appear.
QUANTITY_KEYS = {
    "center": Quantity.TIME,
    "width": Quantity.TIME,
    "start": Quantity.TIME,
    "stop": Quantity.TIME,
    "duration": Quantity.TIME,
    "dt": Quantity.TIME,
    "tau_jit": Quantity.TIME,
    "gamma": Quantity.RATE,
    "g": Quantity.RATE,
    "atom_decay": Quantity.RATE,
    "kappa_oc": Quantity.RATE,
    "rate": Quantity.RATE,
    "detuning": Quantity.RATE,
    "g_max": Quantity.RATE,
}


class Section(enum.Enum):
    """Sections of a scenario config."""

    SCENARIO = "scenario"
    SYSTEM = "system"
    INPUT = "input"
    OUTPUT = "output"
    GRID = "grid"
    INTEGRATION = "integration"
    OUTPUTS = "outputs"


class ShapeKind(enum.Enum):
    """Pulse shapes a config can name."""

    NONE = "none"
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"
    FLAT = "flat"
    FILE = "file"


class OutputChoice(enum.Enum):
    """How the output mode of a run is chosen."""

    REFLECT = "reflect"
    INPUT = "input"
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"
    FLAT = "flat"
    FILE = "file"
    G1 = "g1"


class StateKind(enum.Enum):
    """Quantum state of the input pulse."""

    FOCK = "fock"
    COHERENT = "coherent"
