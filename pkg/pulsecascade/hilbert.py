"""
Operator algebra on truncated tensor-product Hilbert spaces.

Every operator is a dense complex ``numpy`` matrix. The cascaded space has three slots in a
fixed order: the input virtual cavity ``u``, the scatterer ``s`` and the output virtual
cavity ``v``. A scatterer with internal structure (an atom inside a cavity) is flattened into
the single ``s`` slot; :func:`reduce` reaches its parts when given the refined dimensions.

Dense matrices are used throughout. The largest space of interest (an alpha = 2 cat state)
has a dimension of about 2500, where dense BLAS products still beat sparse bookkeeping for
operators that couple all three slots; below roughly 10^4 this holds on commodity hardware.
"""

import logging
from dataclasses import dataclass
from functools import reduce as fold
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from . import constants
from .exceptions import InvalidArgumentError, InvalidDimensionError

logger = logging.getLogger(constants.LOGGER_NAME)

# Operators are plain dense complex matrices; their dimension is their shape.
Operator = np.ndarray

SlotLike = Union[constants.Slot, int, str]


@dataclass(frozen=True)
class SpaceLayout:
    """
    Dimensions of the (u, s, v) slots: ``[N + 1, d, M + 1]``.

    A slot of dimension 1 is absent. The regression module drops the output cavity that way,
    and a reduced density matrix keeps its layout with the traced slots set to 1.
    """

    dims: Tuple[int, int, int]

    def __post_init__(self):
        """Validate layout."""
        dims = tuple(int(dim) for dim in self.dims)
        if len(dims) != len(constants.Slot):
            raise InvalidDimensionError(
                f"a layout has {len(constants.Slot)} slots, got {len(dims)}"
            )
        if any(dim < 1 for dim in dims):
            raise InvalidDimensionError(f"slot dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def dimension(self) -> int:
        """Dimension of the full tensor-product space."""
        return int(np.prod(self.dims))

    @property
    def labels(self) -> Tuple[str, ...]:
        """Slot labels in tensor order."""
        return constants.SLOT_LABELS

    def keeping(self, keep: Iterable[SlotLike]) -> "SpaceLayout":
        """Layout of a reduced state: traced slots collapse to dimension 1."""
        kept = {slot_index(slot) for slot in keep}
        return SpaceLayout(
            tuple(dim if index in kept else 1 for index, dim in enumerate(self.dims))
        )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Density matrix on a :class:`SpaceLayout`.

    Construction checks the shape and Hermiticity; use :meth:`from_matrix` to symmetrize
    (and optionally normalize) a raw integrator state first.
    """

    matrix: np.ndarray
    layout: SpaceLayout

    def __post_init__(self):
        """Validate density matrix."""
        matrix = np.asarray(self.matrix, dtype=complex)
        size = self.layout.dimension
        if matrix.shape != (size, size):
            raise InvalidDimensionError(
                f"density matrix of shape {matrix.shape} does not match layout {self.layout.dims}"
            )
        asymmetry = np.max(np.abs(matrix - matrix.conj().T)) if size else 0.0
        if asymmetry > constants.HERMITICITY_TOLERANCE:
            raise InvalidArgumentError(
                f"density matrix is not Hermitian (deviation {asymmetry:.3e})"
            )
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_matrix(
        cls, matrix: np.ndarray, layout: SpaceLayout, normalize: bool = True
    ) -> "DensityMatrix":
        """
        Symmetrize ``(rho + rho^dagger) / 2`` and optionally divide by the trace.

        >>> layout = SpaceLayout((2, 1, 1))
        >>> DensityMatrix.from_matrix(np.diag([2.0, 2.0]), layout).trace
        1.0
        """
        matrix = np.asarray(matrix, dtype=complex)
        matrix = 0.5 * (matrix + matrix.conj().T)
        if normalize:
            trace = np.real(np.trace(matrix))
            if trace <= 0:
                raise InvalidArgumentError(f"cannot normalize a trace of {trace:.3e}")
            matrix = matrix / trace
        return cls(matrix, layout)

    @property
    def trace(self) -> float:
        """Real part of the trace."""
        return float(np.real(np.trace(self.matrix)))

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue; negative values flag a loss of positivity."""
        return float(np.linalg.eigvalsh(self.matrix)[0])


def slot_index(slot: SlotLike) -> int:
    """
    Index of a slot given as :class:`constants.Slot`, integer or label.

    >>> slot_index("v")
    2
    """
    if isinstance(slot, str):
        try:
            return constants.SLOT_LABELS.index(slot)
        except ValueError:
            raise InvalidArgumentError(f"unknown slot label '{slot}'") from None
    index = int(slot)
    if not 0 <= index < len(constants.Slot):
        raise InvalidArgumentError(f"slot index {index} out of range")
    return index


def annihilation(dim: int) -> Operator:
    """
    Truncated annihilation operator with ``<n-1|a|n> = sqrt(n)``.

    >>> annihilation(2).tolist()
    [[0j, (1+0j)], [0j, 0j]]

    :param dim: number of Fock levels kept.
    :return: a ``dim x dim`` complex matrix.
    """
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number(dim: int) -> Operator:
    """Number operator ``a^dagger a`` on ``dim`` levels."""
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def embed(op: Operator, slot: SlotLike, layout: SpaceLayout) -> Operator:
    """
    Embed a single-slot operator as ``I x ... x op x ... x I`` on the full space.

    :param op: operator on the slot.
    :param slot: slot the operator acts on.
    :param layout: the space layout.
    :return: operator on the full space.
    """
    index = slot_index(slot)
    op = np.asarray(op, dtype=complex)
    if op.shape != (layout.dims[index], layout.dims[index]):
        raise InvalidDimensionError(
            f"operator of shape {op.shape} does not fit slot {constants.SLOT_LABELS[index]} "
            f"of dimension {layout.dims[index]}"
        )
    factors = [
        op if position == index else np.eye(dim, dtype=complex)
        for position, dim in enumerate(layout.dims)
    ]
    return fold(np.kron, factors)


def reduce(matrix: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """
    Partial trace of a matrix on a tensor product with arbitrary factor dimensions.

    The kept factors stay in their original order.

    >>> bell = np.zeros(4, dtype=complex)
    >>> bell[[0, 3]] = 2 ** -0.5
    >>> np.allclose(reduce(np.outer(bell, bell.conj()), (2, 2), [0]), np.eye(2) / 2)
    True

    :param matrix: square matrix on the product space.
    :param dims: factor dimensions in tensor order.
    :param keep: indices of the factors to keep.
    :return: the reduced matrix on the kept factors.
    """
    dims = [int(dim) for dim in dims]
    kept = sorted(set(keep))
    if not kept:
        raise InvalidArgumentError("partial trace needs at least one kept factor")
    if kept[0] < 0 or kept[-1] >= len(dims):
        raise InvalidArgumentError(f"kept factors {kept} out of range for {len(dims)} factors")
    size = int(np.prod(dims))
    if matrix.shape[-2:] != (size, size):
        raise InvalidDimensionError(
            f"matrix of shape {matrix.shape} does not match factor dimensions {dims}"
        )

    tensor = np.asarray(matrix).reshape(dims + dims)
    remaining = len(dims)
    for factor in reversed(range(len(dims))):
        if factor in kept:
            continue
        tensor = np.trace(tensor, axis1=factor, axis2=factor + remaining)
        remaining -= 1
    kept_size = int(np.prod([dims[factor] for factor in kept]))
    return tensor.reshape(kept_size, kept_size)


def partial_trace(rho: DensityMatrix, keep: Iterable[SlotLike]) -> DensityMatrix:
    """
    Reduced density matrix on the kept slots.

    The result lives on the same layout with the traced slots collapsed to dimension 1, so a
    reduction to ``{v}`` yields the ``(M + 1) x (M + 1)`` state of the output mode.

    :param rho: state on the full layout.
    :param keep: nonempty set of slots to keep.
    :return: the reduced state.
    """
    kept = sorted({slot_index(slot) for slot in keep})
    if not kept:
        raise InvalidArgumentError("partial trace needs a nonempty set of kept slots")
    reduced = reduce(rho.matrix, rho.layout.dims, kept)
    return DensityMatrix(
        0.5 * (reduced + reduced.conj().T), rho.layout.keeping(kept)
    )


def fock_state(dim: int, n: int) -> np.ndarray:
    """
    Fock state ``|n>`` as a vector of length ``dim``.

    >>> fock_state(3, 1).tolist()
    [0j, (1+0j), 0j]
    """
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock state |{n}> does not fit {dim} levels")
    state = np.zeros(dim, dtype=complex)
    state[n] = 1.0
    return state


def coherent_state(dim: int, alpha: complex) -> np.ndarray:
    """
    Coherent state ``|alpha>`` truncated to ``dim`` levels and renormalized.

    The Fock amplitudes are built by the recurrence ``c_n = c_{n-1} alpha / sqrt(n)`` to avoid
    factorial overflow.

    :param dim: number of Fock levels kept.
    :param alpha: complex amplitude.
    :return: the normalized state vector.
    """
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
    amplitudes = np.empty(dim, dtype=complex)
    amplitudes[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for level in range(1, dim):
        amplitudes[level] = amplitudes[level - 1] * alpha / np.sqrt(level)
    edge = abs(amplitudes[-1]) ** 2
    if edge > 1e-6:
        logger.warning(
            "coherent state alpha=%s has population %.2e in its top level", alpha, edge
        )
    return amplitudes / np.linalg.norm(amplitudes)


def pure_density(state: np.ndarray) -> np.ndarray:
    """Projector ``|psi><psi|`` of a normalized state vector."""
    state = np.asarray(state, dtype=complex)
    return np.outer(state, state.conj())


def product_state(layout: SpaceLayout, factors: Sequence[np.ndarray]) -> DensityMatrix:
    """
    Product density matrix ``rho_u x rho_s x rho_v``.

    Each factor is either a state vector or a density matrix of its slot.
    """
    if len(factors) != len(layout.dims):
        raise InvalidArgumentError(
            f"need one factor per slot ({len(layout.dims)}), got {len(factors)}"
        )
    matrices = []
    for index, factor in enumerate(factors):
        factor = np.asarray(factor, dtype=complex)
        matrix = pure_density(factor) if factor.ndim == 1 else factor
        if matrix.shape != (layout.dims[index],) * 2:
            raise InvalidDimensionError(
                f"factor of shape {matrix.shape} does not fit slot "
                f"{constants.SLOT_LABELS[index]} of dimension {layout.dims[index]}"
            )
        matrices.append(matrix)
    return DensityMatrix.from_matrix(fold(np.kron, matrices), layout)
