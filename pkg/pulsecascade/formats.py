"""
File formats of simulation results.

Text tables are tab-delimited with a header row and floats written with 17 significant digits,
so identical results produce byte-identical files. Density matrix checkpoints are binary:

    uint32 slot count | uint32 slot dimensions | complex128 entries, row-major

all little-endian.
"""

import logging
from functools import singledispatch
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from . import constants, hilbert
from .analyze import WignerGrid
from .evolve import TimeSeries
from .exceptions import InvalidArgumentError, InvalidDimensionError
from .pulses import Custom, ModeFunction, TimeGrid, make_mode
from .regression import CorrelationMatrix, OutputMode

logger = logging.getLogger(constants.LOGGER_NAME)

PathLike = Union[str, Path]

DELIMITER = "\t"
CHECKPOINT_HEADER_TYPE = "<u4"
CHECKPOINT_ENTRY_TYPE = "<c16"


def _number(value: float) -> str:
    """
    Text form of a float.

    >>> _number(0.1)
    '0.10000000000000001'
    >>> _number(float("nan"))
    'nan'
    """
    return f"{value:.17g}"


def _rows(header: Sequence[str], columns: Iterable[np.ndarray]) -> str:
    table = np.column_stack(list(columns))
    lines = [DELIMITER.join(header)]
    lines.extend(DELIMITER.join(_number(value) for value in row) for row in table)
    return "\n".join(lines) + "\n"


@singledispatch
def format_table(table: TimeSeries) -> str:
    """
    Format a result as a delimited text table.

    Note that this is the base function, arbitrarily the time series; every result type is
    registered.

    >>> series = TimeSeries(np.array([0.0, 0.5]), {"n_v": np.array([0.0, 1.0])})
    >>> format_table(series).splitlines()
    ['t\\tn_v', '0\\t0', '0.5\\t1']

    :param table: time series, mode function, Wigner grid or correlation matrix.
    :return: the table as text.
    """
    if not isinstance(table, TimeSeries):
        raise InvalidArgumentError(f"no table format for {type(table).__name__}")
    return _rows(["t"] + table.names, [table.times] + [table[name] for name in table.names])


@format_table.register
def _(table: ModeFunction) -> str:
    return _rows(["t", "re", "im"], [table.grid.times, table.samples.real, table.samples.imag])


@format_table.register
def _1(table: WignerGrid) -> str:
    # Axis block, then one row per p value with W along x.
    lines = [
        "# x" + DELIMITER + DELIMITER.join(map(_number, table.x)),
        "# p" + DELIMITER + DELIMITER.join(map(_number, table.p)),
    ]
    lines.extend(DELIMITER.join(map(_number, row)) for row in table.values)
    return "\n".join(lines) + "\n"


@format_table.register
def _2(table: CorrelationMatrix) -> str:
    times = table.grid.times
    first, second = np.meshgrid(times, times, indexing="ij")
    return _rows(
        ["t", "t_prime", "re", "im"],
        [first.ravel(), second.ravel(), table.values.real.ravel(), table.values.imag.ravel()],
    )


def format_occupations(modes: Sequence[OutputMode]) -> str:
    """Table of mode indices and mean photon numbers."""
    indices = np.arange(1, len(modes) + 1, dtype=float)
    return _rows(["mode", "occupation"], [indices, [mode.occupation for mode in modes]])


def write_table(table, path: PathLike) -> Path:
    """Write any table-formattable result to ``path``."""
    target = Path(path)
    target.write_text(format_table(table))
    logger.debug("wrote %s to %s", type(table).__name__, target)
    return target


def _is_numeric(line: str) -> bool:
    try:
        [float(field) for field in line.split()]  # pylint: disable=expression-not-assigned
    except ValueError:
        return False
    return True


def load_mode(path: PathLike, grid: TimeGrid) -> ModeFunction:
    """
    Read a mode file onto a grid and normalize it.

    The file holds whitespace-separated columns ``t``, ``re`` and optionally ``im`` (zero when
    missing), with or without a header line. Samples are linearly interpolated onto the grid;
    the mode is zero outside the file's span.

    :raises InvalidArgumentError: for unreadable files, wrong column counts or unordered times.
    """
    try:
        lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    except OSError as error:
        raise InvalidArgumentError(f"cannot read mode file {path}: {error}") from None
    if lines and not _is_numeric(lines[0]):
        lines = lines[1:]
    try:
        data = np.loadtxt(lines, ndmin=2)
    except ValueError as error:
        raise InvalidArgumentError(f"cannot read mode file {path}: {error}") from None
    if data.shape[1] not in (2, 3) or data.shape[0] < 2:
        raise InvalidArgumentError(f"mode file {path} needs t, re and optionally im columns")
    times, real = data[:, 0], data[:, 1]
    imag = data[:, 2] if data.shape[1] == 3 else np.zeros_like(real)
    if np.any(np.diff(times) <= 0):
        raise InvalidArgumentError(f"mode file {path} has non-increasing times")
    samples = np.interp(grid.times, times, real, left=0.0, right=0.0) + 1j * np.interp(
        grid.times, times, imag, left=0.0, right=0.0
    )
    return make_mode(Custom(samples), grid)


def write_checkpoint(rho: hilbert.DensityMatrix, path: PathLike) -> Path:
    """Write a density matrix in the binary checkpoint layout."""
    target = Path(path)
    header = np.array([len(rho.layout.dims), *rho.layout.dims], dtype=CHECKPOINT_HEADER_TYPE)
    entries = np.ascontiguousarray(rho.matrix, dtype=CHECKPOINT_ENTRY_TYPE)
    target.write_bytes(header.tobytes() + entries.tobytes())
    logger.debug("wrote checkpoint of dims %s to %s", rho.layout.dims, target)
    return target


def read_checkpoint(path: PathLike) -> hilbert.DensityMatrix:
    """
    Read a density matrix checkpoint.

    :raises InvalidDimensionError: when the header and the payload disagree.
    """
    blob = Path(path).read_bytes()
    width = np.dtype(CHECKPOINT_HEADER_TYPE).itemsize
    if len(blob) < width:
        raise InvalidDimensionError(f"checkpoint {path} is truncated")
    count = int(np.frombuffer(blob, dtype=CHECKPOINT_HEADER_TYPE, count=1)[0])
    if count != len(constants.Slot):
        raise InvalidDimensionError(f"checkpoint {path} has {count} slots")
    dims: List[int] = [
        int(dim)
        for dim in np.frombuffer(blob, dtype=CHECKPOINT_HEADER_TYPE, count=count, offset=width)
    ]
    layout = hilbert.SpaceLayout((dims[0], dims[1], dims[2]))
    offset = width * (count + 1)
    expected = layout.dimension ** 2 * np.dtype(CHECKPOINT_ENTRY_TYPE).itemsize
    if len(blob) - offset != expected:
        raise InvalidDimensionError(
            f"checkpoint {path} holds {len(blob) - offset} bytes, dims {dims} need {expected}"
        )
    entries = np.frombuffer(blob, dtype=CHECKPOINT_ENTRY_TYPE, offset=offset)
    return hilbert.DensityMatrix.from_matrix(
        entries.reshape(layout.dimension, layout.dimension), layout, normalize=False
    )
