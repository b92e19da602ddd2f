"""
Observables and state analysis.

Phase-space convention: a single mode is described by ``beta = x + i p`` with
``x = Re<a>`` and ``p = Im<a>``. With this scaling the Wigner function is normalized to
``integral W dx dp = 1``, the vacuum peaks at ``W(0, 0) = 2 / pi`` and the quadrature
``X = (a + a^dagger) / 2`` has vacuum variance 1/4. Cat-state fringes are spaced accordingly.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from . import constants, hilbert
from .cascade import CascadeModel, flux_operator_at
from .evolve import TimeSeries
from .exceptions import (
    DegeneratePostselectionError,
    InsufficientTruncationError,
    InvalidArgumentError,
    InvalidDimensionError,
)

logger = logging.getLogger(constants.LOGGER_NAME)

StateLike = Union[hilbert.DensityMatrix, np.ndarray]

# Spin rotation on (down, up, e): |up> -> (|up> + |down>)/sqrt2, |down> -> (|down> - |up>)/sqrt2.
SPIN_ROTATION = np.array(
    [
        [1 / math.sqrt(2), 1 / math.sqrt(2), 0],
        [-1 / math.sqrt(2), 1 / math.sqrt(2), 0],
        [0, 0, 1],
    ],
    dtype=complex,
)

ATOM_LEVELS = len(constants.AtomLevel)

# Wigner values at the grid boundary above this fraction of the peak flag a small grid.
WIGNER_EDGE_FRACTION = 1e-3


def _matrix(rho: StateLike) -> np.ndarray:
    matrix = rho.matrix if isinstance(rho, hilbert.DensityMatrix) else np.asarray(rho)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidDimensionError(f"expected a square state matrix, got shape {matrix.shape}")
    return matrix


def expectation(rho: StateLike, op: np.ndarray) -> complex:
    """
    Expectation value ``Tr(rho op)``.

    >>> complex(expectation(np.eye(2) / 2, np.eye(2)))
    (1+0j)

    :raises InvalidArgumentError: when the dimensions do not match.
    """
    matrix = _matrix(rho)
    op = np.asarray(op)
    if op.shape != matrix.shape:
        raise InvalidArgumentError(
            f"operator of shape {op.shape} does not match a state of shape {matrix.shape}"
        )
    return complex(np.sum(matrix * op.T))


def output_flux(model: CascadeModel, rho: hilbert.DensityMatrix, t: float) -> float:
    """Photon flux ``<L_0^dagger L_0>`` leaving the cascade at time ``t``."""
    return max(0.0, float(np.real(expectation(rho, flux_operator_at(model, t)))))


def integrated_flux(series: TimeSeries) -> float:
    """
    Photons lost to modes other than the output mode over the whole run.

    This is the final value of the ``lost`` channel, which the integrator accumulates with the
    state. Series without it (e.g. read back from older tables) fall back to the trapezoid of
    the ``flux`` samples.
    """
    if "lost" in series.names:
        return float(series["lost"][-1])
    logger.warning("series has no 'lost' channel, integrating the flux samples instead")
    return series.integrated("flux")


def purity(rho: StateLike) -> float:
    """``Tr(rho^2)``."""
    matrix = _matrix(rho)
    return float(np.real(np.sum(matrix * matrix.T)))


def fock_populations(rho: StateLike) -> np.ndarray:
    """Diagonal of a single-mode state."""
    return np.real(np.diag(_matrix(rho))).copy()


def mode_state(rho: hilbert.DensityMatrix, slot: hilbert.SlotLike) -> np.ndarray:
    """Reduced matrix of one slot, e.g. the output mode ``v``."""
    index = hilbert.slot_index(slot)
    return hilbert.partial_trace(rho, [index]).matrix.reshape(
        (rho.layout.dims[index],) * 2
    )


def required_levels(alpha: complex) -> int:
    """
    Fock levels a coherent state of amplitude ``alpha`` needs.

    >>> required_levels(1.4)
    12
    """
    magnitude = abs(alpha)
    return math.ceil(magnitude ** 2 + constants.COHERENT_HEADROOM * magnitude - 1e-9) + 1


def cat_state(output_levels: int, alpha: complex) -> np.ndarray:
    """
    Atom-mode cat ``(|up>|alpha> + |down>|-alpha>) / sqrt2`` on ``3 x output_levels``.

    :raises InsufficientTruncationError: when the output truncation cannot hold ``alpha``.
    """
    if output_levels < required_levels(alpha):
        raise InsufficientTruncationError(
            f"alpha={alpha} needs {required_levels(alpha)} output levels, got {output_levels}"
        )
    up = np.kron(
        hilbert.fock_state(ATOM_LEVELS, constants.AtomLevel.UP),
        hilbert.coherent_state(output_levels, alpha),
    )
    down = np.kron(
        hilbert.fock_state(ATOM_LEVELS, constants.AtomLevel.DOWN),
        hilbert.coherent_state(output_levels, -alpha),
    )
    return (up + down) / math.sqrt(2)


def cat_fidelity(atom_mode: StateLike, alpha: complex) -> float:
    """
    Fidelity ``<cat|rho|cat>`` of an atom x output-mode state with the ideal cat.

    :param atom_mode: state on ``3 x (M + 1)``, see :func:`atom_mode_state`.
    :param alpha: coherent amplitude of the cat.
    :return: the fidelity.
    """
    matrix = _matrix(atom_mode)
    if matrix.shape[0] % ATOM_LEVELS:
        raise InvalidDimensionError("atom-mode state dimension must be a multiple of 3")
    cat = cat_state(matrix.shape[0] // ATOM_LEVELS, alpha)
    return float(np.real(cat.conj() @ matrix @ cat))


def atom_mode_state(model: CascadeModel, rho: hilbert.DensityMatrix) -> np.ndarray:
    """
    Reduce a full cascaded state to the atom and the output mode.

    The input cavity and the intracavity field of the scatterer are traced out.
    """
    subsystems = model.system.subsystem_dims
    if len(subsystems) != 2 or subsystems[0] != ATOM_LEVELS:
        raise InvalidArgumentError(f"{model.system.name} has no atom inside a cavity")
    input_levels, _, output_levels = rho.layout.dims
    dims = (input_levels, subsystems[0], subsystems[1], output_levels)
    return hilbert.reduce(rho.matrix, dims, [1, 3])


def postselect_atom(
    atom_mode: StateLike,
    outcome: constants.AtomLevel = constants.AtomLevel.DOWN,
    rotation: np.ndarray = SPIN_ROTATION,
) -> Tuple[float, np.ndarray]:
    """
    Rotate the atom, detect it in ``outcome`` and return the conditional output-mode state.

    :param atom_mode: state on ``3 x (M + 1)``.
    :param outcome: detected atomic level.
    :param rotation: unitary applied to the atom before detection.
    :return: outcome probability and normalized conditional mode state.
    :raises DegeneratePostselectionError: when the outcome has probability below 10^-9.
    """
    matrix = _matrix(atom_mode)
    levels = matrix.shape[0] // ATOM_LEVELS
    unitary = np.kron(rotation, np.eye(levels))
    rotated = unitary @ matrix @ unitary.conj().T
    block = rotated.reshape(ATOM_LEVELS, levels, ATOM_LEVELS, levels)[outcome, :, outcome, :]
    probability = float(np.real(np.trace(block)))
    if probability < constants.MIN_POSTSELECTION_PROBABILITY:
        raise DegeneratePostselectionError(
            f"outcome {outcome.name.lower()} has probability {probability:.2e}"
        )
    conditional = block / probability
    return probability, 0.5 * (conditional + conditional.conj().T)


@dataclass(frozen=True)
class WignerGrid:
    """Wigner function samples ``values[i, j] = W(x[j], p[i])``."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        """Validate grid."""
        if self.values.shape != (len(self.p), len(self.x)):
            raise InvalidDimensionError("Wigner values do not match the (p, x) axes")

    def integral(self) -> float:
        """``integral W dx dp``, close to 1 when the state fits inside the grid."""
        return float(trapezoid(trapezoid(self.values, self.x, axis=1), self.p))

    def marginal_x(self) -> np.ndarray:
        """``integral W dp`` on the x axis."""
        return trapezoid(self.values, self.p, axis=0)

    def at(self, x: float, p: float) -> float:
        """Value at the grid point nearest to ``(x, p)``."""
        return float(self.values[np.abs(self.p - p).argmin(), np.abs(self.x - x).argmin()])


def _displacement_factory(levels: int) -> Callable[[complex], np.ndarray]:
    """
    Displacement operators ``D(beta)`` on ``levels`` Fock states.

    ``D(beta) = R V exp(|beta| Lambda) V^dagger R^dagger`` with ``a^dagger - a = V Lambda V^dagger``
    diagonalized once and ``R = exp(i arg(beta) n)``, which equals the matrix exponential of
    the truncated generator for every ``beta``.
    """
    annihilate = hilbert.annihilation(levels)
    generator = annihilate.conj().T - annihilate
    eigenvalues, vectors = np.linalg.eigh(1j * generator)
    occupation = np.arange(levels)

    def displace(beta: complex) -> np.ndarray:
        phases = np.exp(1j * np.angle(beta) * occupation)
        rotated = phases[:, None] * vectors
        return (rotated * np.exp(-1j * abs(beta) * eigenvalues)) @ rotated.conj().T

    return displace


def wigner(
    rho_mode: StateLike,
    x_range: Tuple[float, float] = (-4.0, 4.0),
    p_range: Tuple[float, float] = (-4.0, 4.0),
    resolution: int = 81,
) -> WignerGrid:
    """
    Wigner function ``W(beta) = (2/pi) Tr[D(beta) Pi D^dagger(beta) rho]`` on a square grid.

    The grid axes are ``x = Re beta = <(a + a^dagger)/2>`` and ``p = Im beta`` and the function
    integrates to one over ``dx dp``, so the vacuum peaks at ``W(0, 0) = 2/pi``. In the other
    common convention, ``x' = sqrt2 x`` and ``p' = sqrt2 p`` with ``W' = W/2``, the vacuum
    peaks at ``1/pi``.

    Displacements act on a space padded beyond the truncation of ``rho_mode`` so that the
    displaced parity stays exact over the grid.

    :param rho_mode: single-mode state, e.g. ``mode_state(rho, "v")``.
    :param x_range: span of ``Re beta``.
    :param p_range: span of ``Im beta``.
    :param resolution: points per axis.
    :return: the sampled Wigner function.
    """
    if isinstance(rho_mode, hilbert.DensityMatrix):
        if sum(dim > 1 for dim in rho_mode.layout.dims) > 1:
            raise InvalidArgumentError("the Wigner function needs a single-mode state")
    matrix = _matrix(rho_mode)
    if resolution < 2:
        raise InvalidArgumentError("the Wigner grid needs at least 2 points per axis")
    levels = matrix.shape[0]
    xs = np.linspace(*x_range, resolution)
    ps = np.linspace(*p_range, resolution)
    reach = math.hypot(max(map(abs, x_range)), max(map(abs, p_range)))
    padded = levels + math.ceil(reach ** 2 + constants.COHERENT_HEADROOM * reach) + 4
    displace = _displacement_factory(padded)
    parity = (-1.0) ** np.arange(padded)

    values = np.empty((resolution, resolution))
    for row, p in enumerate(ps):
        for column, x in enumerate(xs):
            # Rows of D^dagger(beta) restricted to the support of rho.
            shifted = displace(complex(x, p))[:levels, :].conj().T
            diagonal = np.einsum("ni,ij,nj->n", shifted, matrix, shifted.conj())
            values[row, column] = 2 / np.pi * float(np.real(parity @ diagonal))

    grid = WignerGrid(xs, ps, values)
    edge = max(
        np.abs(values[0]).max(),
        np.abs(values[-1]).max(),
        np.abs(values[:, 0]).max(),
        np.abs(values[:, -1]).max(),
    )
    if edge > WIGNER_EDGE_FRACTION * np.abs(values).max():
        logger.warning(
            "Wigner grid too small: boundary value %.2e against a peak of %.2e",
            edge,
            np.abs(values).max(),
        )
    return grid


def quadrature_distribution(rho_mode: StateLike, xs: np.ndarray) -> np.ndarray:
    """
    Probability density of ``X = (a + a^dagger) / 2`` at the points ``xs``.

    The Fock wavefunctions are built by the stable Hermite-function recurrence.
    """
    matrix = _matrix(rho_mode)
    q = math.sqrt(2) * np.asarray(xs, dtype=float)
    functions = np.empty((matrix.shape[0], q.size))
    functions[0] = np.pi ** -0.25 * np.exp(-0.5 * q ** 2)
    if matrix.shape[0] > 1:
        functions[1] = math.sqrt(2) * q * functions[0]
    for level in range(2, matrix.shape[0]):
        functions[level] = (
            math.sqrt(2 / level) * q * functions[level - 1]
            - math.sqrt((level - 1) / level) * functions[level - 2]
        )
    density = np.einsum("mx,mn,nx->x", functions, matrix, functions)
    return math.sqrt(2) * np.real(density)
