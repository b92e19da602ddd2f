"""
The cascaded model: input virtual cavity -> scatterer -> output virtual cavity.

All scenarios are formulated in the rotating frame of the pulse carrier, so cavity and atomic
frequencies only enter through detunings. The scatterer coupling rate ``gamma`` is real and
non-negative; a coupling phase can always be absorbed into the coupling operator ``c``.

With ``X(t) = sqrt(gamma) g_u*(t) a_u^dagger c + sqrt(gamma) g_v(t) c^dagger a_v
+ g_u*(t) g_v(t) a_u^dagger a_v`` the cascaded Hamiltonian is
``H(t) = H_s(t) + (i/2)(X - X^dagger)`` and the collective decay operator is
``L_0(t) = sqrt(gamma) c + g_u(t) a_u + g_v(t) a_v``.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from . import constants, hilbert
from .exceptions import InvalidArgumentError, InvalidDimensionError
from .pulses import CouplingSchedule

logger = logging.getLogger(constants.LOGGER_NAME)

HamiltonianRule = Union[np.ndarray, Callable[[float], np.ndarray]]


class LindbladChannel(NamedTuple):
    """Extra decay channel ``sqrt(rate) * operator`` acting on the scatterer."""

    label: str
    rate: float
    operator: np.ndarray


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """
    A scatterer: its Hamiltonian, coupling operator, coupling rate and extra channels.

    ``observables`` are scatterer operators recorded along a simulation;
    ``excitation_number`` is the operator counted by the excitation bookkeeping (None when
    the scatterer does not conserve excitations); ``subsystem_dims`` splits the flattened
    scatterer slot into its parts, e.g. ``(3, n_c)`` for an atom inside a cavity.
    """

    name: str
    hamiltonian: HamiltonianRule
    coupling: np.ndarray
    gamma: float
    extra_channels: Tuple[LindbladChannel, ...] = ()
    initial_state: Optional[np.ndarray] = None
    observables: Mapping[str, np.ndarray] = field(default_factory=dict)
    excitation_number: Optional[np.ndarray] = None
    subsystem_dims: Tuple[int, ...] = ()
    detuning: float = 0.0

    def __post_init__(self):
        """Validate scatterer."""
        coupling = np.asarray(self.coupling, dtype=complex)
        if coupling.ndim != 2 or coupling.shape[0] != coupling.shape[1]:
            raise InvalidDimensionError("coupling operator must be a square matrix")
        dim = coupling.shape[0]
        object.__setattr__(self, "coupling", coupling)
        if self.gamma < 0:
            raise InvalidArgumentError("the coupling rate gamma must be non-negative")
        if not callable(self.hamiltonian):
            _check_hermitian(np.asarray(self.hamiltonian), dim, "scatterer Hamiltonian")
        for channel in self.extra_channels:
            if channel.rate < 0:
                raise InvalidArgumentError(f"channel {channel.label} has a negative rate")
            if np.shape(channel.operator) != (dim, dim):
                raise InvalidDimensionError(
                    f"channel {channel.label} does not act on the scatterer"
                )
        if not self.subsystem_dims:
            object.__setattr__(self, "subsystem_dims", (dim,))
        if int(np.prod(self.subsystem_dims)) != dim:
            raise InvalidDimensionError(
                f"subsystem dimensions {self.subsystem_dims} do not multiply to {dim}"
            )
        if self.initial_state is None:
            object.__setattr__(self, "initial_state", hilbert.fock_state(dim, 0))

    @property
    def dimension(self) -> int:
        """Scatterer dimension ``d``."""
        return int(self.coupling.shape[0])

    def hamiltonian_at(self, t: float) -> np.ndarray:
        """Scatterer Hamiltonian at time ``t``."""
        if callable(self.hamiltonian):
            return np.asarray(self.hamiltonian(t), dtype=complex)
        return np.asarray(self.hamiltonian, dtype=complex)


def _check_hermitian(matrix: np.ndarray, dim: int, what: str) -> None:
    if matrix.shape != (dim, dim):
        raise InvalidDimensionError(
            f"{what} of shape {matrix.shape} does not act on dimension {dim}"
        )
    if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > constants.HERMITICITY_TOLERANCE:
        raise InvalidArgumentError(f"{what} is not Hermitian")


class Preset(enum.Enum):
    """Scatterers of the bundled scenarios."""

    EMPTY_CAVITY = "empty_cavity"
    PHASE_NOISE = "phase_noise"
    TWO_LEVEL_ATOM = "two_level_atom"
    ATOM_IN_CAVITY = "atom_in_cavity"
    PASS_THROUGH = "pass_through"


def _positive(name: str, value: float) -> float:
    if value <= 0:
        raise InvalidArgumentError(f"{name} must be positive, got {value}")
    return float(value)


def _empty_cavity(
    gamma: float, cavity_levels: int = 2, detuning: float = 0.0, tau_jit: Optional[float] = None
) -> SystemSpec:
    if cavity_levels < 2:
        raise InvalidArgumentError("a cavity needs at least 2 levels")
    annihilate = hilbert.annihilation(cavity_levels)
    photons = hilbert.number(cavity_levels)
    channels: Tuple[LindbladChannel, ...] = ()
    if tau_jit is not None:
        # Mirror jitter dephases the cavity: L_1 = tau_jit^(-1/2) c^dagger c.
        channels = (LindbladChannel("jitter", 1 / _positive("tau_jit", tau_jit), photons),)
    return SystemSpec(
        name=Preset.PHASE_NOISE.value if channels else Preset.EMPTY_CAVITY.value,
        hamiltonian=detuning * photons,
        coupling=annihilate,
        gamma=_positive("gamma", gamma),
        extra_channels=channels,
        observables={"cavity": photons},
        excitation_number=photons,
        detuning=detuning,
    )


def _phase_noise(
    gamma: float, tau_jit: float, cavity_levels: int = 2, detuning: float = 0.0
) -> SystemSpec:
    return _empty_cavity(gamma, cavity_levels, detuning, tau_jit=tau_jit)


def _two_level_atom(gamma: float, excited: bool = True, detuning: float = 0.0) -> SystemSpec:
    # Basis (g, e); the dipole lowering operator is |g><e|.
    lowering = np.array([[0, 1], [0, 0]], dtype=complex)
    projector = np.diag([0.0, 1.0]).astype(complex)
    return SystemSpec(
        name=Preset.TWO_LEVEL_ATOM.value,
        hamiltonian=detuning * projector,
        coupling=lowering,
        gamma=_positive("gamma", gamma),
        initial_state=hilbert.fock_state(2, 1 if excited else 0),
        observables={"excited": projector},
        excitation_number=projector,
        detuning=detuning,
    )


def _atom_transition(to: int, source: int) -> np.ndarray:
    """Atomic operator |to><source|."""
    return np.outer(hilbert.fock_state(3, to), hilbert.fock_state(3, source))


# pylint: disable=too-many-arguments,too-many-locals
def _atom_in_cavity(
    g: float,
    gamma: float,
    atom_decay: float = 0.0,
    kappa_oc: float = 0.0,
    cavity_levels: int = 3,
    decay_branching: float = 1.0,
    detuning: float = 0.0,
) -> SystemSpec:
    """
    Three-level atom (down, up, e) in a one-sided cavity; up <-> e couples to the cavity.

    The atomic decay out of ``e`` splits into a channel back to ``up`` (fraction
    ``decay_branching``) and one to ``down`` (the rest). Which ground state the decay feeds
    is not fixed by the physics given; returning to ``up`` is the default.
    """
    if cavity_levels < 2:
        raise InvalidArgumentError("the atom-in-cavity preset needs at least 2 cavity levels")
    if atom_decay < 0 or kappa_oc < 0:
        raise InvalidArgumentError("decay rates must be non-negative")
    if not 0.0 <= decay_branching <= 1.0:
        raise InvalidArgumentError("decay_branching must lie in [0, 1]")

    down, up, excited = (_atom_transition(level, level) for level in constants.AtomLevel)
    up_from_e = _atom_transition(constants.AtomLevel.UP, constants.AtomLevel.EXCITED)
    down_from_e = _atom_transition(constants.AtomLevel.DOWN, constants.AtomLevel.EXCITED)
    cavity = np.eye(cavity_levels, dtype=complex)
    atom = np.eye(3, dtype=complex)
    annihilate = np.kron(atom, hilbert.annihilation(cavity_levels))
    photons = np.kron(atom, hilbert.number(cavity_levels))
    jaynes_cummings = g * np.kron(up_from_e, hilbert.annihilation(cavity_levels).conj().T)
    hamiltonian = (
        jaynes_cummings
        + jaynes_cummings.conj().T
        + detuning * (photons + np.kron(excited, cavity))
    )

    channels = []
    if atom_decay > 0 and decay_branching > 0:
        channels.append(
            LindbladChannel("decay_up", atom_decay * decay_branching, np.kron(up_from_e, cavity))
        )
    if atom_decay > 0 and decay_branching < 1:
        channels.append(
            LindbladChannel(
                "decay_down", atom_decay * (1 - decay_branching), np.kron(down_from_e, cavity)
            )
        )
    if kappa_oc > 0:
        channels.append(LindbladChannel("leak", kappa_oc, annihilate))

    superposition = (
        hilbert.fock_state(3, constants.AtomLevel.DOWN)
        + hilbert.fock_state(3, constants.AtomLevel.UP)
    ) / np.sqrt(2)
    return SystemSpec(
        name=Preset.ATOM_IN_CAVITY.value,
        hamiltonian=hamiltonian,
        coupling=annihilate,
        gamma=_positive("gamma", gamma),
        extra_channels=tuple(channels),
        initial_state=np.kron(superposition, hilbert.fock_state(cavity_levels, 0)),
        observables={
            "down": np.kron(down, cavity),
            "up": np.kron(up, cavity),
            "excited": np.kron(excited, cavity),
            "cavity": photons,
        },
        excitation_number=photons + np.kron(excited, cavity),
        subsystem_dims=(3, cavity_levels),
        detuning=detuning,
    )


def _pass_through() -> SystemSpec:
    """A decoupled one-level scatterer: the input pulse reaches the output cavity unchanged."""
    return SystemSpec(
        name=Preset.PASS_THROUGH.value,
        hamiltonian=np.zeros((1, 1)),
        coupling=np.zeros((1, 1)),
        gamma=0.0,
        initial_state=np.ones(1),
        excitation_number=np.zeros((1, 1)),
    )


_PRESETS: Dict[Preset, Callable[..., SystemSpec]] = {
    Preset.EMPTY_CAVITY: _empty_cavity,
    Preset.PHASE_NOISE: _phase_noise,
    Preset.TWO_LEVEL_ATOM: _two_level_atom,
    Preset.ATOM_IN_CAVITY: _atom_in_cavity,
    Preset.PASS_THROUGH: _pass_through,
}


def preset(name: Union[Preset, str], **params) -> SystemSpec:
    """
    Build a scatterer preset.

    >>> preset("phase_noise", gamma=1.0, tau_jit=1.0).extra_channels[0].rate
    1.0

    :param name: one of :class:`Preset` or its value.
    :param params: preset parameters (rates, cavity levels, detuning, ...).
    :return: the scatterer.
    :raises InvalidArgumentError: for unknown presets or parameters.
    """
    try:
        key = Preset(name)
    except ValueError:
        raise InvalidArgumentError(f"unknown preset '{name}'") from None
    try:
        return _PRESETS[key](**params)
    except TypeError as error:
        raise InvalidArgumentError(f"bad parameters for preset {key.value}: {error}") from None


@dataclass(frozen=True, eq=False)
class CascadeModel:
    """
    The assembled three-component system with its embedded operators.

    Build it with :func:`assemble`. Number operators of the virtual cavities are diagonal in
    the product basis and kept as vectors.
    """

    layout: hilbert.SpaceLayout
    system: SystemSpec
    gu: CouplingSchedule
    gv: CouplingSchedule
    a_u: np.ndarray = field(repr=False)
    a_v: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    c_dag_c: np.ndarray = field(repr=False)
    release_cross: np.ndarray = field(repr=False)
    capture_cross: np.ndarray = field(repr=False)
    bypass_cross: np.ndarray = field(repr=False)
    n_u_diagonal: np.ndarray = field(repr=False)
    n_v_diagonal: np.ndarray = field(repr=False)
    static_hamiltonian: Optional[np.ndarray] = field(repr=False)
    channels: Tuple[np.ndarray, ...] = field(repr=False)
    channel_decay: np.ndarray = field(repr=False)

    @property
    def grid(self):
        """Time grid shared by both couplings."""
        return self.gu.grid

    @property
    def sqrt_gamma(self) -> float:
        """Amplitude coupling of the scatterer."""
        return float(np.sqrt(self.system.gamma))

    def scatterer_hamiltonian(self, t: float) -> np.ndarray:
        """Embedded ``H_s(t)``."""
        if self.static_hamiltonian is not None:
            return self.static_hamiltonian
        return hilbert.embed(self.system.hamiltonian_at(t), constants.Slot.S, self.layout)


def assemble(
    system: SystemSpec,
    gu: CouplingSchedule,
    gv: Optional[CouplingSchedule] = None,
    input_levels: int = 2,
    output_levels: Optional[int] = None,
) -> CascadeModel:
    """
    Assemble the cascaded model.

    Without ``gv`` the output cavity is dropped (a slot of dimension 1), which is the model
    the regression module works on.

    :param system: the scatterer.
    :param gu: release schedule of the input cavity.
    :param gv: capture schedule of the output cavity.
    :param input_levels: ``N + 1``.
    :param output_levels: ``M + 1``.
    :return: the model.
    """
    if gv is None:
        gv = CouplingSchedule.zero(gu.grid)
        output_levels = 1 if output_levels is None else output_levels
    if output_levels is None:
        raise InvalidArgumentError("output_levels is required with an output cavity")
    if gu.grid != gv.grid:
        raise InvalidArgumentError("input and output couplings must share a time grid")

    layout = hilbert.SpaceLayout((input_levels, system.dimension, output_levels))
    logger.debug(
        "assembling %s on dims %s (dimension %d)", system.name, layout.dims, layout.dimension
    )

    if callable(system.hamiltonian):
        for t in (gu.grid.t0, 0.5 * (gu.grid.t0 + gu.grid.t1), gu.grid.t1):
            _check_hermitian(system.hamiltonian_at(t), system.dimension, f"H_s({t})")
        static_hamiltonian = None
    else:
        static_hamiltonian = hilbert.embed(system.hamiltonian_at(0.0), constants.Slot.S, layout)

    a_u = hilbert.embed(hilbert.annihilation(input_levels), constants.Slot.U, layout)
    a_v = hilbert.embed(hilbert.annihilation(output_levels), constants.Slot.V, layout)
    c = hilbert.embed(system.coupling, constants.Slot.S, layout)
    channels = tuple(
        hilbert.embed(np.sqrt(channel.rate) * channel.operator, constants.Slot.S, layout)
        for channel in system.extra_channels
    )
    channel_decay = sum(
        (
            hilbert.embed(
                channel.rate * channel.operator.conj().T @ channel.operator,
                constants.Slot.S,
                layout,
            )
            for channel in system.extra_channels
        ),
        np.zeros((layout.dimension,) * 2, dtype=complex),
    )
    ones_s = np.ones(system.dimension)
    n_u_diagonal = np.kron(
        np.kron(np.arange(input_levels, dtype=float), ones_s), np.ones(output_levels)
    )
    n_v_diagonal = np.kron(
        np.ones(input_levels * system.dimension), np.arange(output_levels, dtype=float)
    )

    return CascadeModel(
        layout=layout,
        system=system,
        gu=gu,
        gv=gv,
        a_u=a_u,
        a_v=a_v,
        c=c,
        c_dag_c=hilbert.embed(system.coupling.conj().T @ system.coupling, constants.Slot.S, layout),
        release_cross=a_u.conj().T @ c,
        capture_cross=c.conj().T @ a_v,
        bypass_cross=a_u.conj().T @ a_v,
        n_u_diagonal=n_u_diagonal,
        n_v_diagonal=n_v_diagonal,
        static_hamiltonian=static_hamiltonian,
        channels=channels,
        channel_decay=channel_decay,
    )


def _feed(model: CascadeModel, gu: complex, gv: complex) -> np.ndarray:
    """The cascaded exchange ``X`` with ``H = H_s + (i/2)(X - X^dagger)``."""
    return (
        model.sqrt_gamma * np.conj(gu) * model.release_cross
        + model.sqrt_gamma * gv * model.capture_cross
        + np.conj(gu) * gv * model.bypass_cross
    )


def hamiltonian_at(model: CascadeModel, t: float) -> np.ndarray:
    """
    Cascaded Hamiltonian ``H(t)``, Hermitian by construction.

    :raises OutOfRangeError: when ``t`` is outside the grid.
    """
    feed = _feed(model, model.gu.at(t), model.gv.at(t))
    return model.scatterer_hamiltonian(t) + 0.5j * (feed - feed.conj().T)


def lindblad0_at(model: CascadeModel, t: float) -> np.ndarray:
    """
    Collective decay operator ``L_0(t) = sqrt(gamma) c + g_u(t) a_u + g_v(t) a_v``.

    :raises OutOfRangeError: when ``t`` is outside the grid.
    """
    return model.sqrt_gamma * model.c + model.gu.at(t) * model.a_u + model.gv.at(t) * model.a_v


def effective_hamiltonian_at(model: CascadeModel, t: float) -> np.ndarray:
    """
    Non-Hermitian ``H(t) - (i/2) sum_i L_i^dagger L_i`` over ``L_0`` and the extra channels.

    The cross terms of ``L_0^dagger L_0`` are ``X + X^dagger``, so the anti-Hermitian part of
    the exchange cancels against them and only the feed-forward ``-i X^dagger`` survives.
    """
    gu, gv = model.gu.at(t), model.gv.at(t)
    feed = _feed(model, gu, gv)
    decay = model.system.gamma * model.c_dag_c + model.channel_decay
    decay[np.diag_indices_from(decay)] += (
        abs(gu) ** 2 * model.n_u_diagonal + abs(gv) ** 2 * model.n_v_diagonal
    )
    return model.scatterer_hamiltonian(t) - 1j * feed.conj().T - 0.5j * decay


def flux_operator_at(model: CascadeModel, t: float) -> np.ndarray:
    """
    Output photon-flux operator ``L_0^dagger(t) L_0(t)``.

    Built from the stored products, so taking its expectation costs no matrix product.
    """
    gu, gv = model.gu.at(t), model.gv.at(t)
    feed = _feed(model, gu, gv)
    flux = model.system.gamma * model.c_dag_c + feed + feed.conj().T
    flux[np.diag_indices_from(flux)] += (
        abs(gu) ** 2 * model.n_u_diagonal + abs(gv) ** 2 * model.n_v_diagonal
    )
    return flux
