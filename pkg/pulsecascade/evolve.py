"""
Integration of the cascaded Lindblad master equation.

The density matrix is propagated as a full matrix. The right-hand side is written with the
effective Hamiltonian ``H_eff = H - (i/2) sum_i L_i^dagger L_i``:

    d rho / dt = -i H_eff rho + i rho H_eff^dagger + sum_i L_i rho L_i^dagger

which needs four matrix products per evaluation plus two per extra channel, and which also
holds for the non-Hermitian operators propagated by the regression module. ``rho`` may be a
stack of matrices of shape ``(..., D, D)``.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Set, Tuple

import numpy as np
from scipy.integrate import solve_ivp, trapezoid

from . import constants, hilbert
from .cascade import CascadeModel, effective_hamiltonian_at, flux_operator_at, lindblad0_at
from .exceptions import (
    IntegrationDivergedError,
    IntegrationError,
    InvalidArgumentError,
    InvalidDimensionError,
    NumericalFailureError,
)

logger = logging.getLogger(constants.LOGGER_NAME)

# Fock populations recorded per virtual cavity.
RECORDED_LEVELS = 4

Monitor = Callable[[hilbert.DensityMatrix], float]


class IntegrationMethod(enum.Enum):
    """Integration schemes."""

    RK4_FIXED = "rk4_fixed"
    RK45_ADAPTIVE = "rk45_adaptive"


@dataclass(frozen=True)
class IntegrationConfig:
    """
    Integrator settings.

    ``dt`` is the step of ``rk4_fixed`` (defaults to the grid step); ``rtol`` and ``atol``
    control ``rk45_adaptive``. Channels are recorded every ``stride`` grid points and at the
    final time. ``eigen_checkpoints`` evenly spaced sampling points also record the smallest
    eigenvalue of the state.
    """

    method: IntegrationMethod = IntegrationMethod.RK45_ADAPTIVE
    rtol: float = constants.DEFAULT_RTOL
    atol: float = constants.DEFAULT_ATOL
    dt: Optional[float] = None
    stride: int = 1
    renormalize_trace: bool = True
    eigen_checkpoints: int = 0

    def __post_init__(self):
        """Validate integrator settings."""
        if self.rtol <= 0 or self.atol <= 0:
            raise InvalidArgumentError("rtol and atol must be positive")
        if self.dt is not None and self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")
        if self.stride < 1:
            raise InvalidArgumentError("the sampling stride must be at least 1")
        if self.eigen_checkpoints < 0:
            raise InvalidArgumentError("eigen_checkpoints must be non-negative")


@dataclass(frozen=True)
class TimeSeries:
    """Named channels sampled on a shared time axis."""

    times: np.ndarray
    channels: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        """Validate that every channel shares the time axis."""
        for name, values in self.channels.items():
            if np.shape(values) != np.shape(self.times):
                raise InvalidDimensionError(
                    f"channel {name} has {np.size(values)} samples for {np.size(self.times)} times"
                )

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.channels[name]
        except KeyError:
            raise InvalidArgumentError(f"no channel named '{name}'") from None

    @property
    def names(self) -> List[str]:
        """Channel names in recording order."""
        return list(self.channels)

    def integrated(self, name: str) -> float:
        """Trapezoid integral of a channel over the sample times."""
        return float(trapezoid(self[name], self.times))


class Evolution(NamedTuple):
    """Recorded channels and the final state of an integration."""

    series: TimeSeries
    final: hilbert.DensityMatrix


def lindblad_rhs(model: CascadeModel, t: float, rho: np.ndarray) -> np.ndarray:
    """
    Time derivative of ``rho`` (or of a stack of matrices) under the cascaded master equation.

    :param model: the assembled model.
    :param t: time within the grid span.
    :param rho: matrix or stack of matrices of the model dimension.
    :return: the derivative, same shape as ``rho``.
    """
    size = model.layout.dimension
    if np.shape(rho)[-2:] != (size, size):
        raise InvalidDimensionError(
            f"state of shape {np.shape(rho)} does not match dimension {size}"
        )
    h_eff = effective_hamiltonian_at(model, t)
    l0 = lindblad0_at(model, t)
    derivative = -1j * (h_eff @ rho) + 1j * (rho @ h_eff.conj().T)
    derivative += l0 @ rho @ l0.conj().T
    for channel in model.channels:
        derivative += channel @ rho @ channel.conj().T
    return derivative


def rk4_step(model: CascadeModel, t: float, rho: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of size ``h``."""
    k1 = lindblad_rhs(model, t, rho)
    k2 = lindblad_rhs(model, t + 0.5 * h, rho + 0.5 * h * k1)
    k3 = lindblad_rhs(model, t + 0.5 * h, rho + 0.5 * h * k2)
    k4 = lindblad_rhs(model, t + h, rho + h * k3)
    return rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def output_flux_at(model: CascadeModel, t: float, rho: np.ndarray) -> float:
    """Flux ``Tr(L0 rho L0^dagger)`` leaving the cascade at time ``t``."""
    return float(np.real(np.sum(rho * flux_operator_at(model, t).T)))


def _derivatives(model: CascadeModel, t: float, rho: np.ndarray) -> Tuple[np.ndarray, float]:
    derivative = lindblad_rhs(model, t, rho)
    if not np.all(np.isfinite(derivative)):
        raise NumericalFailureError(f"state is no longer finite at t={t:.6g}")
    return derivative, output_flux_at(model, t, rho)


def rk4_step_with_loss(
    model: CascadeModel, t: float, rho: np.ndarray, h: float
) -> Tuple[np.ndarray, float]:
    """
    Runge-Kutta step of the state together with the photon number lost through ``L0``.

    The loss is integrated with the same stages as the state, so the excitations left in the
    cascade plus the loss stay constant to rounding for excitation-conserving scatterers.
    """
    k1, f1 = _derivatives(model, t, rho)
    k2, f2 = _derivatives(model, t + 0.5 * h, rho + 0.5 * h * k1)
    k3, f3 = _derivatives(model, t + 0.5 * h, rho + 0.5 * h * k2)
    k4, f4 = _derivatives(model, t + h, rho + h * k3)
    return rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4), (h / 6) * (f1 + 2 * f2 + 2 * f3 + f4)


def _sample_indices(n_steps: int, stride: int) -> np.ndarray:
    indices = np.arange(0, n_steps, stride)
    if indices[-1] != n_steps - 1:
        indices = np.append(indices, n_steps - 1)
    return indices


def _advance_fixed(
    model: CascadeModel, rho: np.ndarray, t_start: float, t_stop: float, dt: float
) -> Tuple[np.ndarray, float]:
    steps = max(1, math.ceil((t_stop - t_start) / dt - 1e-9))
    h = (t_stop - t_start) / steps
    lost = 0.0
    for step in range(steps):
        rho, increment = rk4_step_with_loss(model, t_start + step * h, rho, h)
        lost += increment
    return rho, lost


def _advance_adaptive(
    model: CascadeModel, rho: np.ndarray, t_start: float, t_stop: float, config: IntegrationConfig
) -> Tuple[np.ndarray, float]:
    shape = rho.shape
    size = rho.size

    def _derivative(t: float, flat: np.ndarray) -> np.ndarray:
        # The solver may step a hair past the segment end.
        t = min(max(t, model.grid.t0), model.grid.t1)
        derivative, flux = _derivatives(model, t, flat[:size].reshape(shape))
        return np.append(derivative.ravel(), flux)

    solution = solve_ivp(
        _derivative,
        (t_start, t_stop),
        np.append(rho.ravel(), 0.0),
        method="RK45",
        t_eval=[t_stop],
        rtol=config.rtol,
        atol=config.atol,
    )
    if not solution.success:
        if not np.all(np.isfinite(solution.y)):
            raise NumericalFailureError(f"state is no longer finite after t={t_start:.6g}")
        raise IntegrationError(f"adaptive integration failed at t={t_start}: {solution.message}")
    final = solution.y[:, -1]
    return final[:size].reshape(shape), float(np.real(final[size]))


class _Recorder:
    """Evaluates the recorded channels at the sampling points."""

    def __init__(self, model: CascadeModel, monitors: Mapping[str, Monitor]):
        self.model = model
        self.monitors = monitors
        self.system_observables = dict(model.system.observables)
        input_levels, _, output_levels = model.layout.dims
        self.levels = {
            "u": min(RECORDED_LEVELS, input_levels),
            "v": min(RECORDED_LEVELS, output_levels),
        }
        excitation = model.system.excitation_number
        self.excitation_diagonal = None
        if excitation is not None and np.allclose(excitation, np.diag(np.diag(excitation))):
            scatterer = np.real(np.diag(excitation))
            self.excitation_diagonal = (
                model.n_u_diagonal
                + model.n_v_diagonal
                + np.kron(
                    np.kron(np.ones(input_levels), scatterer), np.ones(output_levels)
                )
            )
        self.values: Dict[str, List[float]] = {}

    def _put(self, name: str, value: float) -> None:
        self.values.setdefault(name, []).append(float(value))

    def record(  # pylint: disable=too-many-arguments
        self,
        t: float,
        rho: np.ndarray,
        trace: float,
        hermiticity: float,
        lost: float,
        eigen: bool,
    ) -> None:
        model = self.model
        diagonal = np.real(np.diag(rho))
        self._put("trace", trace)
        self._put("hermiticity", hermiticity)
        self._put("n_u", diagonal @ model.n_u_diagonal)
        self._put("n_v", diagonal @ model.n_v_diagonal)

        populations = diagonal.reshape(model.layout.dims)
        for label, axes in (("u", (1, 2)), ("v", (0, 1))):
            marginal = populations.sum(axis=axes)
            for level in range(self.levels[label]):
                self._put(f"p_{label}_{level}", marginal[level])

        if self.system_observables:
            scatterer = hilbert.reduce(rho, model.layout.dims, [constants.Slot.S])
            for name, observable in self.system_observables.items():
                self._put(name, np.real(np.trace(scatterer @ observable)))

        self._put("flux", output_flux_at(model, t, rho))
        self._put("lost", lost)
        if self.excitation_diagonal is not None:
            self._put("excitations", diagonal @ self.excitation_diagonal)
        self._put("min_eigenvalue", np.linalg.eigvalsh(rho)[0] if eigen else np.nan)

        if self.monitors:
            state = hilbert.DensityMatrix(rho, model.layout)
            for name, monitor in self.monitors.items():
                self._put(name, monitor(state))

    def series(self, times: np.ndarray) -> TimeSeries:
        return TimeSeries(times, {name: np.array(values) for name, values in self.values.items()})


def _checkpoints(n_samples: int, count: int) -> Set[int]:
    if count <= 0:
        return set()
    return {int(round(index)) for index in np.linspace(0, n_samples - 1, min(count, n_samples))}


def integrate(
    model: CascadeModel,
    rho0: hilbert.DensityMatrix,
    config: Optional[IntegrationConfig] = None,
    monitors: Optional[Mapping[str, Monitor]] = None,
) -> Evolution:
    """
    Integrate the master equation over the full grid of the model.

    Channels ``trace`` (before renormalization), ``hermiticity`` (before symmetrization),
    ``n_u``, ``n_v``, the Fock populations ``p_u_k`` and ``p_v_k``, the scatterer
    observables, ``flux``, ``lost`` (the flux integrated by the solver alongside the state),
    ``excitations`` (excitation-conserving scatterers) and ``min_eigenvalue`` (NaN away from
    checkpoints) are recorded, followed by ``monitors``.

    The ``flux`` samples only show the outgoing intensity. At the start of a capture mode the
    coupling jumps from zero to its ``1/sqrt(t)`` onset, so the first sample can be far off the
    curve and integrating the samples afterwards gives a grid-dependent loss. Use ``lost``.

    :param model: the assembled model.
    :param rho0: initial state on the model layout.
    :param config: integrator settings.
    :param monitors: extra named functions of the state to record.
    :return: recorded channels and final state.
    :raises IntegrationDivergedError: when the trace drifts more than 10^-4.
    :raises NumericalFailureError: when the state stops being finite.
    """
    config = config or IntegrationConfig()
    grid = model.grid
    if rho0.layout != model.layout:
        raise InvalidDimensionError(
            f"initial state layout {rho0.layout.dims} does not match model {model.layout.dims}"
        )
    if config.dt is not None and config.dt > grid.dt * (1 + 1e-9):
        raise InvalidArgumentError(f"dt={config.dt} exceeds the grid step {grid.dt}")

    indices = _sample_indices(grid.n_steps, config.stride)
    times = grid.times[indices]
    checkpoints = _checkpoints(len(indices), config.eigen_checkpoints)
    recorder = _Recorder(model, monitors or {})
    logger.debug(
        "integrating %s on %d sampling points with %s",
        model.system.name,
        len(indices),
        config.method.value,
    )

    rho = rho0.matrix.copy()
    lost = 0.0
    for position, t in enumerate(times):
        if position:
            t_start = float(times[position - 1])
            if config.method is IntegrationMethod.RK4_FIXED:
                rho, increment = _advance_fixed(
                    model, rho, t_start, float(t), config.dt or grid.dt
                )
            else:
                rho, increment = _advance_adaptive(model, rho, t_start, float(t), config)
            lost += increment
        if not np.all(np.isfinite(rho)):
            raise NumericalFailureError(f"state is no longer finite at t={t:.6g}")

        trace = float(np.real(np.trace(rho)))
        if abs(trace - 1.0) > constants.MAX_TRACE_DRIFT:
            raise IntegrationDivergedError(
                f"trace drifted to {trace:.8f} at t={t:.6g}; reduce dt or tighten tolerances"
            )
        hermiticity = float(np.max(np.abs(rho - rho.conj().T)))
        rho = 0.5 * (rho + rho.conj().T)
        if config.renormalize_trace:
            rho = rho / trace
        recorder.record(float(t), rho, trace, hermiticity, lost, position in checkpoints)

    return Evolution(
        recorder.series(times),
        hilbert.DensityMatrix.from_matrix(rho, model.layout, normalize=config.renormalize_trace),
    )
