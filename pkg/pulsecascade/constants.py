"""
Constants of the pulsecascade package.
"""

import enum

LOGGER_NAME = "pulsecascade"

# Denominator floor on 1 - F (release) and F (capture); below it a coupling is zero.
DENOMINATOR_FLOOR = 1e-12

# Default coupling ceiling, as a multiple of the grid-average |g|.
CLAMP_FACTOR = 1e3

# Largest analytic pulse mass allowed outside the time grid.
TAIL_MASS_LIMIT = 1e-6

# Tolerance on the unit norm of a mode function.
NORM_TOLERANCE = 1e-6

# Largest mass a filtered pulse may push into the zero padding.
ALIASING_LIMIT = 1e-6

# Zero padding of reflect_mode, in multiples of the pulse support.
REFLECTION_PADDING = 4

# Couplings need dt <= RESOLUTION_FACTOR / gamma to resolve the cavity linewidth.
RESOLUTION_FACTOR = 0.1

HERMITICITY_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-8

# Trace drift tolerated at a sampling point before the integration is declared diverged.
MAX_TRACE_DRIFT = 1e-4

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10

# Fixed RK4 substeps per grid interval for the regression and oracle propagators.
REGRESSION_SUBSTEPS = 4
ORACLE_SUBSTEPS = 4

# Smallest post-selection probability that still defines a conditional state.
MIN_POSTSELECTION_PROBABILITY = 1e-9

# Coherent states need at least |alpha|^2 + COHERENT_HEADROOM * |alpha| levels.
COHERENT_HEADROOM = 6


class Slot(enum.IntEnum):
    """
    Slots of the cascaded Hilbert space, in their fixed tensor order.

    The input virtual cavity comes first, the scatterer second and the output virtual
    cavity last. Every Kronecker product and partial trace in the package uses this order.
    """

    U = 0
    S = 1
    V = 2


SLOT_LABELS = ("u", "s", "v")


class AtomLevel(enum.IntEnum):
    """Basis order of the three-level atom in the atom-in-cavity preset."""

    DOWN = 0
    UP = 1
    EXCITED = 2
