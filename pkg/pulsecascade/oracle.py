"""
Independent reference solutions for single excitations.

With one excitation shared by the input cavity, the scatterer and the output cavity the
cascaded master equation closes on three amplitudes: the state stays
``psi_u |1,g,0> + psi_s |0,e,0> + psi_v |0,g,1>`` plus an incoherent vacuum part holding the
photon that escaped to other modes. The amplitudes follow ``i dpsi/dt = H_eff psi`` with
``H_eff = H - (i/2) l^dagger l``, ``l`` being the row of ``L_0`` on the one-excitation states.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from . import constants, hilbert
from .cascade import CascadeModel
from .exceptions import InvalidArgumentError
from .pulses import ModeFunction

logger = logging.getLogger(constants.LOGGER_NAME)

AMPLITUDE_SLOTS = 3

InitialAmplitudes = Union[Sequence[complex], np.ndarray, hilbert.DensityMatrix]


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Amplitudes ``(psi_u, psi_s, psi_v)`` on the grid and the escaped probability."""

    times: np.ndarray
    amplitudes: np.ndarray
    loss: np.ndarray
    emission: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        """``|psi|^2`` per slot, shape ``(times, 3)``."""
        return np.abs(self.amplitudes) ** 2

    def emitted_flux(self) -> np.ndarray:
        """Flux ``|l psi|^2`` into modes other than the output cavity."""
        return np.abs(self.emission) ** 2


def _excitation_indices(model: CascadeModel) -> Tuple[Optional[int], ...]:
    """Full-space indices of |1,g,0>, |0,e,0> and |0,g,1> (None where a slot is absent)."""
    input_levels, scatterer, output_levels = model.layout.dims

    def _index(n_u: int, s: int, n_v: int) -> Optional[int]:
        if n_u >= input_levels or s >= scatterer or n_v >= output_levels:
            return None
        return (n_u * scatterer + s) * output_levels + n_v

    return _index(1, 0, 0), _index(0, 1, 0), _index(0, 0, 1)


def _amplitudes_of(model: CascadeModel, rho: hilbert.DensityMatrix) -> np.ndarray:
    """Amplitudes of a pure state inside the one-excitation manifold."""
    indices = [index for index in _excitation_indices(model) if index is not None]
    block = rho.matrix[np.ix_(indices, indices)]
    if abs(np.real(np.trace(block)) - 1.0) > constants.TRACE_TOLERANCE:
        raise InvalidArgumentError("initial state is not a single excitation")
    eigenvalues, vectors = np.linalg.eigh(block)
    if eigenvalues[-1] < 1 - constants.TRACE_TOLERANCE:
        raise InvalidArgumentError("initial single-excitation state is not pure")
    amplitudes = np.zeros(AMPLITUDE_SLOTS, dtype=complex)
    position = 0
    for slot, index in enumerate(_excitation_indices(model)):
        if index is not None:
            amplitudes[slot] = vectors[position, -1]
            position += 1
    return amplitudes


def _check_model(model: CascadeModel) -> complex:
    system = model.system
    if system.extra_channels:
        raise InvalidArgumentError("the single-excitation oracle does not support extra channels")
    if len(system.subsystem_dims) != 1:
        raise InvalidArgumentError(f"{system.name} has no single-excitation closure")
    return complex(system.coupling[0, 1]) if system.dimension > 1 else 0j


def _generator(
    model: CascadeModel, lowering: complex
) -> Callable[[float], Tuple[np.ndarray, np.ndarray]]:
    """Effective Hamiltonian and emission row at time t."""
    root = np.sqrt(model.system.gamma)
    scatterer = model.system.dimension > 1

    def _effective(t: float) -> Tuple[np.ndarray, np.ndarray]:
        gu, gv = model.gu.at(t), model.gv.at(t)
        emission = np.array([gu, root * lowering, gv])
        feed = np.zeros((AMPLITUDE_SLOTS, AMPLITUDE_SLOTS), dtype=complex)
        feed[0, 1] = root * np.conj(gu) * lowering
        feed[1, 2] = root * gv * np.conj(lowering)
        feed[0, 2] = np.conj(gu) * gv
        hamiltonian = 0.5j * (feed - feed.conj().T)
        if scatterer:
            local = model.system.hamiltonian_at(t)
            hamiltonian += np.diag([local[0, 0], local[1, 1], local[0, 0]])
        return hamiltonian - 0.5j * np.outer(emission.conj(), emission), emission

    return _effective


def single_excitation_evolve(
    model: CascadeModel,
    psi0: InitialAmplitudes,
    substeps: int = constants.ORACLE_SUBSTEPS,
) -> AmplitudeTrajectory:
    """
    Integrate the one-excitation amplitudes with fixed-step RK4 on ``grid.dt / substeps``.

    :param model: cascade with a cavity or two-level scatterer and no extra channels.
    :param psi0: ``(psi_u, psi_s, psi_v)``, or a full density matrix of one excitation.
    :param substeps: RK4 steps per grid interval.
    :return: the amplitude trajectory on the grid.
    :raises InvalidArgumentError: for multi-excitation initial states or unsupported models.
    """
    lowering = _check_model(model)
    if isinstance(psi0, hilbert.DensityMatrix):
        psi = _amplitudes_of(model, psi0)
    else:
        psi = np.asarray(psi0, dtype=complex)
        if psi.shape != (AMPLITUDE_SLOTS,):
            raise InvalidArgumentError("need the three amplitudes (psi_u, psi_s, psi_v)")
        if abs(np.vdot(psi, psi) - 1.0) > constants.TRACE_TOLERANCE:
            raise InvalidArgumentError("single-excitation amplitudes must be normalized")
    for slot, index in enumerate(_excitation_indices(model)):
        if index is None and psi[slot] != 0:
            raise InvalidArgumentError(f"slot {constants.SLOT_LABELS[slot]} cannot hold a photon")

    effective = _generator(model, lowering)
    grid = model.grid
    h = grid.dt / substeps

    def _derivative(t: float, state: np.ndarray) -> np.ndarray:
        matrix, _ = effective(t)
        return -1j * (matrix @ state)

    amplitudes = np.empty((grid.n_steps, AMPLITUDE_SLOTS), dtype=complex)
    emission = np.empty(grid.n_steps, dtype=complex)
    for j, t in enumerate(grid.times):
        amplitudes[j] = psi
        emission[j] = effective(float(t))[1] @ psi
        if j == grid.n_steps - 1:
            break
        for step in range(substeps):
            start = float(t) + step * h
            k1 = _derivative(start, psi)
            k2 = _derivative(start + 0.5 * h, psi + 0.5 * h * k1)
            k3 = _derivative(start + 0.5 * h, psi + 0.5 * h * k2)
            k4 = _derivative(start + h, psi + h * k3)
            psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    loss = 1.0 - np.sum(np.abs(amplitudes) ** 2, axis=1)
    return AmplitudeTrajectory(grid.times.copy(), amplitudes, loss, emission)


def closed_form_reflection(
    u: ModeFunction, gamma: float, detuning: float = 0.0, normalize: bool = True
) -> ModeFunction:
    """
    Pulse reflected by a one-sided cavity, by time-domain convolution.

    ``v(t) = u(t) - gamma integral_{t0}^{t} exp(-(gamma/2 + i detuning)(t - s)) u(s) ds``,
    with the convolution integrated as ``y' = -(gamma/2 + i detuning) y + u`` by RK4 on a
    quarter of the grid step; ``u`` between samples comes from cubic splines.
    """
    if gamma < 0:
        raise InvalidArgumentError("gamma must be non-negative")
    grid = u.grid
    times = grid.times
    real = CubicSpline(times, u.samples.real)
    imag = CubicSpline(times, u.samples.imag)

    def _derivative(t: float, y: complex) -> complex:
        return -(0.5 * gamma + 1j * detuning) * y + complex(real(t), imag(t))

    h = grid.dt / constants.ORACLE_SUBSTEPS
    convolution = np.zeros(grid.n_steps, dtype=complex)
    y = 0j
    for j in range(grid.n_steps - 1):
        for step in range(constants.ORACLE_SUBSTEPS):
            start = float(times[j]) + step * h
            k1 = _derivative(start, y)
            k2 = _derivative(start + 0.5 * h, y + 0.5 * h * k1)
            k3 = _derivative(start + 0.5 * h, y + 0.5 * h * k2)
            k4 = _derivative(start + h, y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        convolution[j + 1] = y

    reflected = ModeFunction(grid, u.samples - gamma * convolution)
    logger.debug("closed-form reflection norm %.8f", reflected.norm)
    return reflected.normalized() if normalize else reflected
