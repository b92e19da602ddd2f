"""
Emitter autocorrelation and dominant output modes.

The scatterer is driven by the input cavity alone (no output cavity). Its emission
``L(t) = g_u(t) a_u + sqrt(gamma) c`` has the two-time correlation
``G(t_j, t_k) = <L^dagger(t_j) L(t_k)>``, obtained for ``t_j >= t_k`` by the quantum
regression theorem: ``sigma = L(t_k) rho(t_k)`` is propagated with the master equation
generator up to ``t_j`` and ``G = Tr(L^dagger(t_j) sigma(t_j))``. The eigenmodes of ``G``
are the output modes the scatterer actually emits into.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from . import constants, hilbert
from .cascade import CascadeModel, lindblad0_at
from .evolve import rk4_step
from .exceptions import InvalidArgumentError, InvalidDimensionError
from .pulses import CouplingKind, ModeFunction, TimeGrid

logger = logging.getLogger(constants.LOGGER_NAME)

# Relative gap below which two occupations count as degenerate.
DEGENERACY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """``values[j, k] = g1(t_j, t_k)`` with its trapezoid quadrature weights."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        """Validate correlation matrix."""
        size = self.grid.n_steps
        if self.values.shape != (size, size):
            raise InvalidDimensionError(
                f"correlation matrix of shape {self.values.shape} does not match {size} times"
            )
        scale = max(1.0, float(np.abs(self.values).max(initial=0.0)))
        if np.abs(self.values - self.values.conj().T).max(initial=0.0) > 1e-8 * scale:
            raise InvalidArgumentError("correlation matrix is not Hermitian")

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights of the grid."""
        return self.grid.weights

    def total_photons(self) -> float:
        """``integral g1(t, t) dt``, the mean number of emitted photons."""
        return float(np.real(np.diag(self.values)) @ self.weights)


class OutputMode(NamedTuple):
    """An emitted mode and its mean photon number."""

    occupation: float
    mode: ModeFunction


def _columns(
    model: CascadeModel, rho0: np.ndarray, first: int, stop: int, substeps: int
) -> Tuple[int, np.ndarray]:
    """
    Columns ``first <= k < stop`` of the correlation matrix (lower triangle only).

    The state and the active columns are propagated together as one stack.
    """
    grid = model.grid
    times = grid.times
    h = grid.dt / substeps
    block = np.zeros((grid.n_steps, stop - first), dtype=complex)
    stack = rho0[np.newaxis].copy()

    for j in range(grid.n_steps):
        emission = lindblad0_at(model, float(times[j]))
        rho = stack[0]
        if first <= j < stop:
            stack = np.concatenate([stack, (emission @ rho)[np.newaxis]])
        active = stack.shape[0] - 1
        if active:
            block[j, :active] = np.einsum("ab,kab->k", emission.conj(), stack[1:])
        if j == grid.n_steps - 1:
            break
        for step in range(substeps):
            stack = rk4_step(model, float(times[j]) + step * h, stack, h)
    return first, block


def g1_matrix(
    model: CascadeModel,
    rho0: hilbert.DensityMatrix,
    substeps: int = constants.REGRESSION_SUBSTEPS,
    max_batch: Optional[int] = None,
    workers: int = 1,
) -> CorrelationMatrix:
    """
    Emitter autocorrelation on the grid of the model.

    :param model: model assembled without output cavity.
    :param rho0: initial state of input cavity and scatterer.
    :param substeps: RK4 steps per grid interval.
    :param max_batch: largest number of columns propagated together; each batch repeats the
        forward propagation of the state, trading time for memory.
    :param workers: batches computed concurrently.
    :return: the Hermitian correlation matrix.
    """
    if model.layout.dims[constants.Slot.V] != 1 or model.gv.kind is not CouplingKind.NONE:
        raise InvalidArgumentError("g1_matrix needs a model without output cavity")
    if rho0.layout != model.layout:
        raise InvalidDimensionError("initial state does not match the model layout")
    if substeps < 1 or workers < 1:
        raise InvalidArgumentError("substeps and workers must be positive")

    n_steps = model.grid.n_steps
    batch = n_steps if max_batch is None else max_batch
    if batch < 1:
        raise InvalidArgumentError("max_batch must be positive")
    bounds = [(first, min(first + batch, n_steps)) for first in range(0, n_steps, batch)]
    logger.debug(
        "correlation matrix of %d times in %d batches on %d workers",
        n_steps,
        len(bounds),
        workers,
    )

    values = np.zeros((n_steps, n_steps), dtype=complex)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [
            executor.submit(_columns, model, rho0.matrix, first, stop, substeps)
            for first, stop in bounds
        ]
        for future in futures:
            first, block = future.result()
            values[:, first : first + block.shape[1]] = block

    lower = np.tril(values)
    values = lower + np.tril(values, -1).conj().T
    # The diagonal is <L^dagger L>, real up to rounding.
    values[np.diag_indices(n_steps)] = np.real(np.diag(lower))
    return CorrelationMatrix(model.grid, values)


def _phase_fixed(samples: np.ndarray) -> np.ndarray:
    peak = samples[np.abs(samples).argmax()]
    return samples * (abs(peak) / peak) if abs(peak) > 0 else samples


def dominant_modes(correlation: CorrelationMatrix, count: int) -> List[OutputMode]:
    """
    The ``count`` most occupied modes of ``g1(t, t') = sum_i n_i v_i*(t) v_i(t')``.

    Modes come sorted by occupation, each rotated so that its largest sample is real and
    positive; (near) degenerate occupations are ordered by the time of the mode's peak.

    :param correlation: the correlation matrix.
    :param count: number of modes.
    :return: occupations with unit-normalized modes.
    """
    grid = correlation.grid
    if not 1 <= count <= grid.n_steps:
        raise InvalidArgumentError(f"cannot extract {count} modes from {grid.n_steps} times")
    root = np.sqrt(correlation.weights)
    kernel = root[:, None] * correlation.values * root[None, :]
    occupations, vectors = eigh(0.5 * (kernel + kernel.conj().T))
    if occupations[0] < -1e-6:
        logger.warning("correlation matrix has a negative occupation %.2e", occupations[0])

    selected = []
    for index in range(grid.n_steps - 1, grid.n_steps - 1 - count, -1):
        samples = _phase_fixed(np.conj(vectors[:, index] / root))
        selected.append((float(occupations[index]), samples))

    ordered: List[Tuple[float, np.ndarray]] = []
    group: List[Tuple[float, np.ndarray]] = []
    for occupation, samples in selected:
        if group and abs(group[0][0] - occupation) > DEGENERACY_TOLERANCE * max(
            1.0, abs(occupation)
        ):
            ordered.extend(sorted(group, key=lambda item: int(np.abs(item[1]).argmax())))
            group = []
        group.append((occupation, samples))
    ordered.extend(sorted(group, key=lambda item: int(np.abs(item[1]).argmax())))

    return [OutputMode(occupation, ModeFunction(grid, samples)) for occupation, samples in ordered]
