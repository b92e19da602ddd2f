"""
Temporal mode functions and the virtual-cavity couplings that emit or absorb them.

A release coupling ``g_u(t) = u*(t) / sqrt(1 - F_u(t))`` makes a virtual cavity emit its
initial content into the wave packet ``u``; a capture coupling
``g_v(t) = -v*(t) / sqrt(F_v(t))`` makes an initially empty virtual cavity absorb whatever
arrives in the wave packet ``v``. ``F`` is the cumulative norm, computed with the trapezoid
rule that every integral in the package shares.

Both couplings are singular at one end: the release coupling when the pulse is exhausted,
the capture coupling at the start. Where the denominator drops below
:data:`constants.DENOMINATOR_FLOOR` (or the ``floor`` a schedule is built with) the coupling
is set to zero and flagged, and everywhere the magnitude is clamped to a ceiling ``g_max``
that bounds the stiffness of the integration.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, singledispatch
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.special import ndtr

from . import constants
from .exceptions import InvalidArgumentError, OutOfRangeError, TruncatedModeError

logger = logging.getLogger(constants.LOGGER_NAME)

# Relative slack on the grid span before a time counts as out of range.
_SPAN_SLACK = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """
    Uniform time grid ``t0 = t_0 < ... < t_{n-1} = t1``.

    >>> TimeGrid(0.0, 1.0, 11).dt
    0.1
    """

    t0: float
    t1: float
    n_steps: int

    def __post_init__(self):
        """Validate grid."""
        if not self.t1 > self.t0:
            raise InvalidArgumentError(f"grid end {self.t1} must exceed start {self.t0}")
        if self.n_steps < 2:
            raise InvalidArgumentError(f"a grid needs at least 2 points, got {self.n_steps}")

    @property
    def dt(self) -> float:
        """Grid spacing."""
        return (self.t1 - self.t0) / (self.n_steps - 1)

    @cached_property
    def times(self) -> np.ndarray:
        """Grid points."""
        return np.linspace(self.t0, self.t1, self.n_steps)

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        weights = np.full(self.n_steps, self.dt)
        weights[[0, -1]] *= 0.5
        return weights

    def locate(self, t: float) -> Tuple[int, float]:
        """
        Interval index ``j`` and fraction ``(t - t_j) / dt`` of a time on the grid.

        >>> TimeGrid(0.0, 1.0, 11).locate(0.25)
        (2, 0.5)
        """
        slack = _SPAN_SLACK * (self.t1 - self.t0)
        if t < self.t0 - slack or t > self.t1 + slack:
            raise OutOfRangeError(f"time {t} outside grid [{self.t0}, {self.t1}]")
        position = (min(max(t, self.t0), self.t1) - self.t0) / self.dt
        index = min(int(math.floor(position)), self.n_steps - 2)
        return index, round(position - index, 12)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian pulse; ``width`` is the standard deviation of ``|u(t)|^2``."""

    center: float
    width: float

    def __post_init__(self):
        """Validate shape."""
        if self.width <= 0:
            raise InvalidArgumentError("gaussian width must be positive")


@dataclass(frozen=True)
class ExponentialDecay:
    """Exponentially decaying pulse ``sqrt(rate) exp(-rate (t - start) / 2)`` for t >= start."""

    rate: float
    start: float = 0.0

    def __post_init__(self):
        """Validate shape."""
        if self.rate <= 0:
            raise InvalidArgumentError("exponential decay rate must be positive")


@dataclass(frozen=True)
class Flat:
    """Flat pulse ``1 / sqrt(duration)`` on ``[start, start + duration]``."""

    duration: float
    start: float = 0.0

    def __post_init__(self):
        """Validate shape."""
        if self.duration <= 0:
            raise InvalidArgumentError("flat pulse duration must be positive")


@dataclass(frozen=True, eq=False)
class Custom:
    """Arbitrary pulse given by its samples on the grid."""

    samples: np.ndarray


ModeShape = Union[Gaussian, ExponentialDecay, Flat, Custom]


@dataclass(frozen=True, eq=False)
class ModeFunction:
    """
    Complex temporal envelope sampled on a grid, with its cumulative norm.

    ``cumulative[j]`` is the trapezoid integral of ``|u|^2`` from ``t0`` to ``t_j``.
    """

    grid: TimeGrid
    samples: np.ndarray
    cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        """Validate samples and integrate the cumulative norm."""
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.n_steps,):
            raise InvalidArgumentError(
                f"{samples.shape[0] if samples.ndim else 0} samples do not match a grid "
                f"of {self.grid.n_steps} points"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidArgumentError("mode samples must be finite")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(
            self,
            "cumulative",
            cumulative_trapezoid(np.abs(samples) ** 2, dx=self.grid.dt, initial=0.0),
        )

    @property
    def norm(self) -> float:
        """Total mass ``F(t1)``."""
        return float(self.cumulative[-1])

    def normalized(self) -> "ModeFunction":
        """Same mode scaled to unit norm."""
        if self.norm <= 0:
            raise InvalidArgumentError("cannot normalize a mode of zero norm")
        return ModeFunction(self.grid, self.samples / math.sqrt(self.norm))

    def at(self, t: float) -> complex:
        """Linearly interpolated sample."""
        index, fraction = self.grid.locate(t)
        return complex(
            self.samples[index] + fraction * (self.samples[index + 1] - self.samples[index])
        )


def _gaussian_profile(shape: Gaussian, times: np.ndarray) -> np.ndarray:
    return (2 * np.pi * shape.width ** 2) ** -0.25 * np.exp(
        -((times - shape.center) ** 2) / (4 * shape.width ** 2)
    )


@singledispatch
def _sample(shape: Gaussian, grid: TimeGrid) -> np.ndarray:
    """
    Sample the analytic shape on the grid.

    Note that this is the base function, arbitrarily the Gaussian; all shapes are registered.

    :param shape: a mode shape.
    :param grid: the time grid.
    :return: complex samples.
    """
    if not isinstance(shape, Gaussian):
        raise InvalidArgumentError(f"unknown mode shape {type(shape).__name__}")
    return _gaussian_profile(shape, grid.times).astype(complex)


@_sample.register
def _(shape: ExponentialDecay, grid: TimeGrid) -> np.ndarray:
    elapsed = grid.times - shape.start
    samples = np.sqrt(shape.rate) * np.exp(-0.5 * shape.rate * np.clip(elapsed, 0.0, None))
    return np.where(elapsed >= 0, samples, 0.0).astype(complex)


@_sample.register
def _1(shape: Flat, grid: TimeGrid) -> np.ndarray:
    inside = (grid.times >= shape.start) & (grid.times <= shape.start + shape.duration)
    return np.where(inside, 1 / math.sqrt(shape.duration), 0.0).astype(complex)


@_sample.register
def _2(shape: Custom, grid: TimeGrid) -> np.ndarray:
    samples = np.asarray(shape.samples, dtype=complex)
    if samples.shape != (grid.n_steps,):
        raise InvalidArgumentError(
            f"custom mode has {samples.size} samples, grid has {grid.n_steps}"
        )
    return samples


@singledispatch
def _tail_mass(shape: Gaussian, grid: TimeGrid) -> float:
    """Analytic mass of ``|u|^2`` outside the grid span."""
    if not isinstance(shape, Gaussian):
        raise InvalidArgumentError(f"unknown mode shape {type(shape).__name__}")
    return float(
        ndtr((grid.t0 - shape.center) / shape.width)
        + ndtr((shape.center - grid.t1) / shape.width)
    )


@_tail_mass.register
def _3(shape: ExponentialDecay, grid: TimeGrid) -> float:
    before = 1 - math.exp(-shape.rate * max(grid.t0 - shape.start, 0.0))
    after = math.exp(-shape.rate * max(grid.t1 - shape.start, 0.0))
    return before + after


@_tail_mass.register
def _4(shape: Flat, grid: TimeGrid) -> float:
    end = shape.start + shape.duration
    covered = max(0.0, min(end, grid.t1) - max(shape.start, grid.t0))
    return 1 - covered / shape.duration


@_tail_mass.register
def _5(shape: Custom, grid: TimeGrid) -> float:
    samples = np.abs(np.asarray(shape.samples))
    if samples.size and samples.max() > 0 and max(samples[0], samples[-1]) > 1e-3 * samples.max():
        logger.warning("custom mode does not vanish at the grid edges")
    return 0.0


def make_mode(shape: ModeShape, grid: TimeGrid) -> ModeFunction:
    """
    Sample a mode shape on a grid and renormalize it numerically.

    >>> grid = TimeGrid(0.0, 2.0, 5)
    >>> mode = make_mode(Flat(2.0), grid)
    >>> [round(float(value), 12) for value in mode.cumulative]
    [0.0, 0.25, 0.5, 0.75, 1.0]

    :param shape: analytic or sampled shape.
    :param grid: the time grid.
    :return: unit-normalized mode.
    :raises TruncatedModeError: when the analytic mass outside the grid is not negligible.
    """
    tail = _tail_mass(shape, grid)
    if tail >= constants.TAIL_MASS_LIMIT:
        raise TruncatedModeError(
            f"{type(shape).__name__} mode has mass {tail:.2e} outside [{grid.t0}, {grid.t1}]"
        )
    mode = ModeFunction(grid, _sample(shape, grid))
    logger.debug("sampled %s mode, raw norm %.8f", type(shape).__name__, mode.norm)
    return mode.normalized()


class CouplingKind(enum.Enum):
    """Role of a virtual cavity."""

    NONE = enum.auto()
    RELEASE = enum.auto()
    CAPTURE = enum.auto()


def _coupling_values(
    kind: CouplingKind,
    mode_values: np.ndarray,
    cumulative: np.ndarray,
    g_max: float,
    floor: float = constants.DENOMINATOR_FLOOR,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Couplings of a mode with the floor and ceiling applied.

    :return: the couplings, the exhaustion flags and the clamp flags.
    """
    denominator = 1.0 - cumulative if kind is CouplingKind.RELEASE else cumulative
    exhausted = denominator < floor
    values = np.conj(mode_values) / np.sqrt(np.where(exhausted, 1.0, denominator))
    if kind is CouplingKind.CAPTURE:
        values = -values
    values = np.where(exhausted, 0.0, values)
    magnitude = np.abs(values)
    clamped = magnitude > g_max
    scale = np.ones(magnitude.shape)
    scale[clamped] = g_max / magnitude[clamped]
    return (values * scale).astype(complex), exhausted, clamped


@dataclass(frozen=True, eq=False)
class CouplingSchedule:
    """
    Time-dependent mirror coupling of a virtual cavity.

    ``samples``, ``exhausted`` and ``clamped`` hold the values at the grid points. Between
    grid points :meth:`at` evaluates the coupling from the linearly interpolated mode and the
    trapezoid-consistent cumulative norm, which keeps the ``1/sqrt(t)`` onset of a capture
    coupling instead of flattening it into a straight line. Where the denominator is below
    ``floor`` the coupling is zero.
    """

    grid: TimeGrid
    kind: CouplingKind
    mode: Optional[ModeFunction]
    g_max: float
    floor: float = constants.DENOMINATOR_FLOOR
    samples: np.ndarray = field(init=False, repr=False)
    exhausted: np.ndarray = field(init=False, repr=False)
    clamped: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        """Validate the schedule and evaluate it at the grid points."""
        if self.g_max < 0:
            raise InvalidArgumentError("the coupling ceiling must be non-negative")
        if not self.floor > 0:
            raise InvalidArgumentError(f"the denominator floor must be positive: {self.floor}")
        if self.kind is CouplingKind.NONE or self.mode is None:
            zeros = np.zeros(self.grid.n_steps, dtype=complex)
            flags = np.zeros(self.grid.n_steps, dtype=bool)
            values, exhausted, clamped = zeros, flags, flags
        else:
            if self.mode.grid != self.grid:
                raise InvalidArgumentError("coupling and mode must share a grid")
            values, exhausted, clamped = _coupling_values(
                self.kind, self.mode.samples, self.mode.cumulative, self.g_max, self.floor
            )
        object.__setattr__(self, "samples", values)
        object.__setattr__(self, "exhausted", exhausted)
        object.__setattr__(self, "clamped", clamped)

    @classmethod
    def zero(cls, grid: TimeGrid) -> "CouplingSchedule":
        """Schedule of an absent (decoupled) cavity."""
        return cls(grid, CouplingKind.NONE, None, 0.0)

    def at(self, t: float) -> complex:
        """
        Coupling at an arbitrary time within the grid span.

        :raises OutOfRangeError: when ``t`` is outside the grid.
        """
        index, fraction = self.grid.locate(t)
        if self.mode is None or self.kind is CouplingKind.NONE:
            return 0j
        if fraction == 0.0:
            return complex(self.samples[index])
        samples = self.mode.samples
        start = samples[index]
        value = start + fraction * (samples[index + 1] - start)
        cumulative = self.mode.cumulative[index] + 0.5 * fraction * self.grid.dt * (
            abs(start) ** 2 + abs(value) ** 2
        )
        if self.kind is CouplingKind.RELEASE:
            denominator = 1.0 - cumulative
            sign = 1.0
        else:
            denominator = cumulative
            sign = -1.0
        if denominator < self.floor:
            return 0j
        coupling = sign * value.conjugate() / math.sqrt(denominator)
        magnitude = abs(coupling)
        if magnitude > self.g_max:
            coupling *= self.g_max / magnitude
        return complex(coupling)


def _default_ceiling(kind: CouplingKind, mode: ModeFunction, floor: float) -> float:
    raw, exhausted, _ = _coupling_values(kind, mode.samples, mode.cumulative, np.inf, floor)
    active = np.abs(raw[~exhausted])
    return constants.CLAMP_FACTOR * float(active.mean()) if active.size else 0.0


def _schedule(
    kind: CouplingKind, mode: ModeFunction, g_max: Optional[float], floor: float
) -> CouplingSchedule:
    if abs(mode.norm - 1.0) > constants.NORM_TOLERANCE:
        raise InvalidArgumentError(f"mode must be normalized, norm is {mode.norm:.8f}")
    if not floor > 0:
        raise InvalidArgumentError(f"the denominator floor must be positive: {floor}")
    ceiling = _default_ceiling(kind, mode, floor) if g_max is None else g_max
    schedule = CouplingSchedule(mode.grid, kind, mode, ceiling, floor)
    if schedule.clamped.any():
        logger.debug(
            "%s coupling clamped at %d samples (g_max=%.3g)",
            kind.name.lower(),
            int(schedule.clamped.sum()),
            ceiling,
        )
    return schedule


def gu_from_mode(
    u: ModeFunction, g_max: Optional[float] = None, floor: float = constants.DENOMINATOR_FLOOR
) -> CouplingSchedule:
    """
    Release coupling ``g_u(t) = u*(t) / sqrt(1 - F_u(t))`` of the input virtual cavity.

    :param u: normalized input mode.
    :param g_max: coupling ceiling; defaults to 10^3 times the grid-average ``|g_u|``.
    :param floor: the coupling is zero where ``1 - F_u`` drops below it.
    :return: the release schedule.
    """
    return _schedule(CouplingKind.RELEASE, u, g_max, floor)


def gv_from_mode(
    v: ModeFunction, g_max: Optional[float] = None, floor: float = constants.DENOMINATOR_FLOOR
) -> CouplingSchedule:
    """
    Capture coupling ``g_v(t) = -v*(t) / sqrt(F_v(t))`` of the output virtual cavity.

    :param v: normalized output mode.
    :param g_max: coupling ceiling; defaults to 10^3 times the grid-average ``|g_v|``.
    :param floor: the coupling is zero where ``F_v`` is still below it.
    :return: the capture schedule.
    """
    return _schedule(CouplingKind.CAPTURE, v, g_max, floor)


def reflection_coefficient(
    omega: np.ndarray, gamma: float, detuning: float = 0.0
) -> np.ndarray:
    """
    One-sided cavity reflection ``r = (i(w - D) + gamma/2) / (i(w - D) - gamma/2)``.

    >>> float(reflection_coefficient(np.array(0.0), 2.0).real)
    -1.0
    """
    offset = 1j * (np.asarray(omega, dtype=float) - detuning)
    if gamma == 0:
        return np.ones_like(offset)
    return (offset + 0.5 * gamma) / (offset - 0.5 * gamma)


def reflect_mode(u: ModeFunction, gamma: float, detuning: float = 0.0) -> ModeFunction:
    """
    Mode of a pulse reflected by a one-sided cavity, ``v(w) = r(w) u(w)``.

    The pulse is zero-padded to five times its length, Fourier transformed, filtered and
    transformed back. Frequencies follow the ``exp(-i w t)`` convention of the rotating frame,
    so numpy's frequency axis enters with a flipped sign.

    :param u: normalized input mode.
    :param gamma: cavity coupling rate.
    :param detuning: cavity detuning from the carrier.
    :return: the normalized reflected mode.
    :raises TruncatedModeError: when the reflected pulse spills beyond the grid.
    """
    grid = u.grid
    if gamma < 0:
        raise InvalidArgumentError("gamma must be non-negative")
    if gamma > 0 and grid.dt > constants.RESOLUTION_FACTOR / gamma:
        raise InvalidArgumentError(
            f"grid step {grid.dt:.3g} does not resolve the linewidth; need dt <= "
            f"{constants.RESOLUTION_FACTOR / gamma:.3g}"
        )
    if gamma == 0:
        return u.normalized()

    length = grid.n_steps * (1 + constants.REFLECTION_PADDING)
    padded = np.zeros(length, dtype=complex)
    padded[: grid.n_steps] = u.samples
    omega = -2 * np.pi * np.fft.fftfreq(length, d=grid.dt)
    filtered = np.fft.ifft(reflection_coefficient(omega, gamma, detuning) * np.fft.fft(padded))

    spill = float(np.sum(np.abs(filtered[grid.n_steps :]) ** 2) * grid.dt)
    if spill >= constants.ALIASING_LIMIT:
        raise TruncatedModeError(
            f"reflected mode leaves mass {spill:.2e} beyond t1={grid.t1}; extend the grid"
        )
    reflected = ModeFunction(grid, filtered[: grid.n_steps])
    logger.debug("reflected mode norm drift %.2e", abs(reflected.norm - 1.0))
    return reflected.normalized()


def overlap(a: ModeFunction, b: ModeFunction) -> complex:
    """
    Overlap ``<a|b>``, the trapezoid integral of ``a*(t) b(t)``.

    >>> grid = TimeGrid(0.0, 1.0, 3)
    >>> mode = make_mode(Flat(1.0), grid)
    >>> round(abs(overlap(mode, mode)), 12)
    1.0
    """
    if a.grid != b.grid:
        raise InvalidArgumentError("overlap needs modes on the same grid")
    return complex(trapezoid(np.conj(a.samples) * b.samples, dx=a.grid.dt))
