"""
Tests for result tables, mode files and density matrix checkpoints.
"""
from pathlib import Path

import numpy as np
import pytest

from pulsecascade import formats, hilbert
from pulsecascade.analyze import WignerGrid
from pulsecascade.exceptions import InvalidArgumentError, InvalidDimensionError
from pulsecascade.pulses import Gaussian, ModeFunction, TimeGrid, make_mode
from pulsecascade.regression import CorrelationMatrix, OutputMode

from .conftest import random_density


def test_mode_table(gaussian: ModeFunction):
    """Modes are written as t, re, im."""
    lines = formats.format_table(gaussian).splitlines()
    assert lines[0] == "t\tre\tim"
    assert len(lines) == gaussian.grid.n_steps + 1
    assert lines[1].split("\t")[0] == "0"


def test_wigner_table():
    """The Wigner table starts with its axes, then one row per p."""
    grid = WignerGrid(np.array([-1.0, 1.0]), np.array([0.0, 0.5, 1.0]), np.zeros((3, 2)))
    lines = formats.format_table(grid).splitlines()
    assert lines[0] == "# x\t-1\t1"
    assert lines[1] == "# p\t0\t0.5\t1"
    assert len(lines) == 5


def test_correlation_table():
    """Correlation matrices are flattened into (t, t') rows."""
    grid = TimeGrid(0.0, 1.0, 2)
    table = formats.format_table(CorrelationMatrix(grid, np.eye(2, dtype=complex)))
    lines = table.splitlines()
    assert lines[0] == "t\tt_prime\tre\tim"
    assert lines[1:] == ["0\t0\t1\t0", "0\t1\t0\t0", "1\t0\t0\t0", "1\t1\t1\t0"]


def test_unknown_table_type():
    """Only results have a table format."""
    with pytest.raises(InvalidArgumentError, match="no table format for dict"):
        formats.format_table({})


def test_occupations(gaussian: ModeFunction):
    """Occupations are numbered from one."""
    table = formats.format_occupations([OutputMode(0.75, gaussian), OutputMode(0.25, gaussian)])
    assert table.splitlines() == ["mode\toccupation", "1\t0.75", "2\t0.25"]


def test_written_tables_are_reproducible(tmp_path: Path, gaussian: ModeFunction):
    """Writing the same result twice gives identical bytes."""
    first = formats.write_table(gaussian, tmp_path / "a.tsv")
    second = formats.write_table(gaussian, tmp_path / "b.tsv")
    assert first.read_bytes() == second.read_bytes()


def test_mode_file_is_read_back(tmp_path: Path, gaussian: ModeFunction):
    """A written mode loads onto the same grid unchanged."""
    path = formats.write_table(gaussian, tmp_path / "mode.tsv")
    loaded = formats.load_mode(path, gaussian.grid)
    assert np.allclose(loaded.samples, gaussian.samples)


def test_mode_file_is_interpolated(tmp_path: Path):
    """Coarse mode files are interpolated onto a finer grid and renormalized."""
    coarse = make_mode(Gaussian(5.0, 1.0), TimeGrid(0.0, 10.0, 201))
    path = formats.write_table(coarse, tmp_path / "mode.tsv")
    fine = TimeGrid(0.0, 10.0, 1001)
    loaded = formats.load_mode(path, fine)
    assert loaded.norm == pytest.approx(1.0)
    assert abs(loaded.at(5.0) - coarse.at(5.0)) < 1e-3


def test_real_mode_file_without_header(tmp_path: Path):
    """Two columns mean a real mode; a file may start directly with samples."""
    grid = TimeGrid(0.0, 2.0, 5)
    path = tmp_path / "mode.txt"
    path.write_text("0 0.5\n0.5 0.5\n1.0 0.5\n1.5 0.5\n2.0 0.5\n")
    loaded = formats.load_mode(path, grid)
    assert loaded.samples[0] == pytest.approx(1 / np.sqrt(2.0))
    assert np.allclose(loaded.samples.imag, 0.0)
    assert np.allclose(loaded.samples, loaded.samples[0])


def test_header_line_is_detected(tmp_path: Path):
    """Headed and headerless files with the same samples load the same mode."""
    grid = TimeGrid(0.0, 1.0, 11)
    rows = "0\t1\t0\n0.5\t2\t1\n1\t1\t0\n"
    headed, bare = tmp_path / "headed.tsv", tmp_path / "bare.tsv"
    headed.write_text("t\tre\tim\n" + rows)
    bare.write_text(rows)
    assert np.array_equal(
        formats.load_mode(headed, grid).samples, formats.load_mode(bare, grid).samples
    )
    assert formats.load_mode(bare, grid).at(0.5).imag > 0


class TestModeFileErrors:
    """Broken mode files are reported with their path."""

    grid = TimeGrid(0.0, 1.0, 11)

    def test_missing_file(self, tmp_path: Path):
        """Unreadable files are argument errors."""
        with pytest.raises(InvalidArgumentError, match="cannot read mode file"):
            formats.load_mode(tmp_path / "absent.tsv", self.grid)

    def test_wrong_columns(self, tmp_path: Path):
        """Two or three columns are accepted, nothing else."""
        path = tmp_path / "mode.tsv"
        path.write_text("t\tre\tim\tx\n0\t1\t0\t0\n1\t1\t0\t0\n")
        with pytest.raises(InvalidArgumentError, match="needs t, re and optionally im"):
            formats.load_mode(path, self.grid)

    def test_unordered_times(self, tmp_path: Path):
        """Times increase."""
        path = tmp_path / "mode.tsv"
        path.write_text("t\tre\tim\n0\t1\t0\n0.5\t1\t0\n0.2\t1\t0\n")
        with pytest.raises(InvalidArgumentError, match="non-increasing"):
            formats.load_mode(path, self.grid)


def test_checkpoint_round_trip(tmp_path: Path):
    """Checkpoints restore layout and matrix exactly."""
    layout = hilbert.SpaceLayout((2, 3, 2))
    rho = hilbert.DensityMatrix(random_density(layout.dimension, 7), layout)
    restored = formats.read_checkpoint(formats.write_checkpoint(rho, tmp_path / "state.bin"))
    assert restored.layout == layout
    assert np.array_equal(restored.matrix, rho.matrix)


def test_checkpoint_layout(tmp_path: Path):
    """The header holds the slot count and dimensions as little-endian uint32."""
    layout = hilbert.SpaceLayout((1, 2, 1))
    rho = hilbert.DensityMatrix(np.diag([1.0, 0.0]).astype(complex), layout)
    blob = formats.write_checkpoint(rho, tmp_path / "state.bin").read_bytes()
    assert blob[:16] == bytes([3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0])
    assert len(blob) == 16 + 4 * 16


class TestCheckpointErrors:
    """Corrupt checkpoints raise dimension errors."""

    def test_truncated_payload(self, tmp_path: Path):
        """Missing entries are detected."""
        layout = hilbert.SpaceLayout((2, 2, 2))
        rho = hilbert.DensityMatrix(random_density(8, 1), layout)
        path = formats.write_checkpoint(rho, tmp_path / "state.bin")
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(InvalidDimensionError, match="need"):
            formats.read_checkpoint(path)

    def test_empty_file(self, tmp_path: Path):
        """A file without header is truncated."""
        path = tmp_path / "state.bin"
        path.write_bytes(b"")
        with pytest.raises(InvalidDimensionError, match="truncated"):
            formats.read_checkpoint(path)

    def test_wrong_slot_count(self, tmp_path: Path):
        """Checkpoints hold three slots."""
        path = tmp_path / "state.bin"
        path.write_bytes(np.array([2, 1, 1], dtype="<u4").tobytes())
        with pytest.raises(InvalidDimensionError, match="2 slots"):
            formats.read_checkpoint(path)
