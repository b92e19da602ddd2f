"""
Tests for the emitter autocorrelation and the dominant output modes.
"""
import numpy as np
import pytest

from pulsecascade import hilbert
from pulsecascade.cascade import CascadeModel, assemble, preset
from pulsecascade.evolve import integrate
from pulsecascade.exceptions import InvalidArgumentError, InvalidDimensionError
from pulsecascade.pulses import (
    CouplingSchedule,
    ExponentialDecay,
    Flat,
    Gaussian,
    TimeGrid,
    gu_from_mode,
    gv_from_mode,
    make_mode,
    overlap,
    reflect_mode,
)
from pulsecascade.regression import CorrelationMatrix, dominant_modes, g1_matrix

from .conftest import single_photon_state


@pytest.fixture(name="decaying_atom")
def fixture_decaying_atom() -> CascadeModel:
    """Excited two-level atom with nothing coming in and no output cavity."""
    grid = TimeGrid(0.0, 16.0, 321)
    return assemble(preset("two_level_atom", gamma=1.0), CouplingSchedule.zero(grid), None, 1)


def _excited(model: CascadeModel) -> hilbert.DensityMatrix:
    return hilbert.product_state(model.layout, [[1.0], hilbert.fock_state(2, 1), [1.0]])


def test_spontaneous_emission_mode(decaying_atom: CascadeModel):
    """An excited atom emits one photon into the exponential mode of its decay rate."""
    correlation = g1_matrix(decaying_atom, _excited(decaying_atom))
    assert correlation.total_photons() == pytest.approx(1.0, abs=1e-3)
    (top,) = dominant_modes(correlation, 1)
    assert top.occupation == pytest.approx(1.0, abs=1e-3)
    expected = make_mode(ExponentialDecay(1.0), decaying_atom.grid)
    assert abs(overlap(expected, top.mode)) ** 2 >= 0.999


def test_batches_and_workers_agree(decaying_atom: CascadeModel):
    """Splitting the columns into batches does not change the matrix."""
    rho0 = _excited(decaying_atom)
    whole = g1_matrix(decaying_atom, rho0)
    batched = g1_matrix(decaying_atom, rho0, max_batch=50, workers=2)
    assert np.allclose(whole.values, batched.values, atol=1e-12)


def test_needs_a_model_without_output_cavity(empty_cavity: CascadeModel):
    """Correlations are taken on the emitter alone."""
    with pytest.raises(InvalidArgumentError, match="without output cavity"):
        g1_matrix(empty_cavity, single_photon_state(empty_cavity))


def test_rejects_bad_batches(decaying_atom: CascadeModel):
    """Batch sizes, substeps and worker counts are positive."""
    rho0 = _excited(decaying_atom)
    with pytest.raises(InvalidArgumentError):
        g1_matrix(decaying_atom, rho0, max_batch=0)
    with pytest.raises(InvalidArgumentError):
        g1_matrix(decaying_atom, rho0, workers=0)


class TestDominantModes:
    """Eigen-decomposition of hand-built correlation matrices."""

    grid = TimeGrid(0.0, 10.0, 101)

    def _correlation(self, *components) -> CorrelationMatrix:
        values = sum(
            occupation * np.outer(np.conj(mode.samples), mode.samples)
            for occupation, mode in components
        )
        return CorrelationMatrix(self.grid, values)

    def test_sorted_by_occupation(self):
        """The most occupied mode comes first."""
        early = make_mode(Flat(3.0, start=1.0), self.grid)
        late = make_mode(Flat(3.0, start=6.0), self.grid)
        modes = dominant_modes(self._correlation((0.2, early), (0.7, late)), 2)
        assert [mode.occupation for mode in modes] == pytest.approx([0.7, 0.2], abs=1e-9)
        assert abs(overlap(late, modes[0].mode)) ** 2 == pytest.approx(1.0, abs=1e-9)
        assert abs(overlap(early, modes[1].mode)) ** 2 == pytest.approx(1.0, abs=1e-9)

    def test_phase_is_fixed(self):
        """The largest sample of a mode is real and positive."""
        pulse = make_mode(Gaussian(5.0, 0.8), self.grid)
        (mode,) = dominant_modes(self._correlation((1.0, pulse)), 1)
        peak = mode.mode.samples[np.abs(mode.mode.samples).argmax()]
        assert peak.real > 0
        assert peak.imag == pytest.approx(0.0, abs=1e-12)
        assert mode.mode.norm == pytest.approx(1.0)

    def test_count_out_of_range(self):
        """At most one mode per time."""
        pulse = make_mode(Gaussian(5.0, 0.8), self.grid)
        with pytest.raises(InvalidArgumentError):
            dominant_modes(self._correlation((1.0, pulse)), 0)

    def test_matrix_validation(self):
        """Correlation matrices are square on the grid and Hermitian."""
        with pytest.raises(InvalidDimensionError):
            CorrelationMatrix(self.grid, np.zeros((3, 3)))
        skew = np.zeros((101, 101), dtype=complex)
        skew[0, 1] = 1.0
        with pytest.raises(InvalidArgumentError, match="not Hermitian"):
            CorrelationMatrix(self.grid, skew)


def test_found_mode_captures_the_reflected_photon():
    """The empty cavity emits the reflected pulse, and capturing it recovers the photon."""
    grid = TimeGrid(0.0, 20.0, 401)
    u = make_mode(Gaussian(3.0, 0.6), grid)
    system = preset("empty_cavity", gamma=1.0)
    emitter = assemble(system, gu_from_mode(u), None, 2)
    rho0 = hilbert.product_state(
        emitter.layout, [hilbert.fock_state(2, 1), hilbert.fock_state(2, 0), [1.0]]
    )
    (top,) = dominant_modes(g1_matrix(emitter, rho0), 1)
    assert abs(overlap(reflect_mode(u, 1.0), top.mode)) ** 2 >= 0.999

    capture = assemble(system, gu_from_mode(u), gv_from_mode(top.mode), 2, 2)
    series = integrate(capture, single_photon_state(capture)).series
    assert series["n_v"][-1] == pytest.approx(top.occupation, abs=1e-3)


def test_occupations_survive_grid_refinement():
    """Halving the grid step leaves the leading occupations in place."""
    occupations = []
    for steps in (161, 321):
        grid = TimeGrid(0.0, 16.0, steps)
        model = assemble(
            preset("two_level_atom", gamma=1.0), CouplingSchedule.zero(grid), None, 1
        )
        modes = dominant_modes(g1_matrix(model, _excited(model)), 2)
        occupations.append([mode.occupation for mode in modes])
    assert occupations[0] == pytest.approx(occupations[1], abs=1e-3)


def test_empty_cavity_emits_one_mode():
    """A single photon reflected by an empty cavity occupies one mode."""
    grid = TimeGrid(0.0, 20.0, 401)
    u = make_mode(Gaussian(3.0, 0.6), grid)
    emitter = assemble(preset("empty_cavity", gamma=1.0), gu_from_mode(u), None, 2)
    rho0 = hilbert.product_state(
        emitter.layout, [hilbert.fock_state(2, 1), hilbert.fock_state(2, 0), [1.0]]
    )
    (top,) = dominant_modes(g1_matrix(emitter, rho0), 1)
    assert top.occupation >= 0.999


def test_stimulated_emission_photon_count():
    """One incident and one emitted photon leave the atom, mostly in a single mode."""
    grid = TimeGrid(0.0, 10.0, 201)
    u = make_mode(ExponentialDecay(1 / 0.36), grid)
    emitter = assemble(preset("two_level_atom", gamma=1.0), gu_from_mode(u), None, 2)
    rho0 = hilbert.product_state(
        emitter.layout, [hilbert.fock_state(2, 1), hilbert.fock_state(2, 1), [1.0]]
    )
    correlation = g1_matrix(emitter, rho0)
    assert correlation.total_photons() == pytest.approx(2.0, abs=1e-2)
    modes = dominant_modes(correlation, 4)
    assert 1.9 <= sum(mode.occupation for mode in modes) <= correlation.total_photons() + 1e-6
    assert modes[0].occupation > 1.8
