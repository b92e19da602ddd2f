"""
Tests comparing the master equation with the single-excitation reference solutions.
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pulsecascade import hilbert
from pulsecascade.cascade import CascadeModel, assemble, preset
from pulsecascade.evolve import IntegrationConfig, integrate
from pulsecascade.exceptions import InvalidArgumentError
from pulsecascade.oracle import closed_form_reflection, single_excitation_evolve
from pulsecascade.pulses import (
    CouplingSchedule,
    ExponentialDecay,
    Gaussian,
    ModeFunction,
    TimeGrid,
    gu_from_mode,
    gv_from_mode,
    make_mode,
    reflect_mode,
)

from .conftest import single_photon_state

TIGHT = IntegrationConfig(rtol=1e-10, atol=1e-12)


def _compare(model: CascadeModel) -> float:
    """Largest deviation of n_u, the scatterer population and n_v between the two solvers."""
    rho0 = single_photon_state(model)
    series = integrate(model, rho0, TIGHT).series
    populations = single_excitation_evolve(model, rho0, substeps=8).populations
    scatterer = "cavity" if "cavity" in series.names else "excited"
    return max(
        np.abs(series["n_u"] - populations[:, 0]).max(),
        np.abs(series[scatterer] - populations[:, 1]).max(),
        np.abs(series["n_v"] - populations[:, 2]).max(),
    )


def _model(system_name: str, center: float, width: float, detuning: float) -> CascadeModel:
    grid = TimeGrid(0.0, 20.0, 401)
    u = make_mode(Gaussian(center, width), grid)
    if system_name == "two_level_atom":
        system = preset(system_name, gamma=1.0, excited=False, detuning=detuning)
    else:
        system = preset(system_name, gamma=1.0, detuning=detuning)
    v = reflect_mode(u, 1.0, detuning)
    return assemble(system, gu_from_mode(u), gv_from_mode(v), 2, 2)


@pytest.mark.parametrize("system_name", ["empty_cavity", "two_level_atom"])
def test_master_equation_matches_amplitudes(system_name: str):
    """Single-photon scattering agrees with the three-amplitude solution."""
    assert _compare(_model(system_name, 3.0, 0.6, 0.0)) < 1e-6


@pytest.mark.slow
@given(
    system_name=st.sampled_from(["empty_cavity", "two_level_atom"]),
    center=st.floats(min_value=2.5, max_value=5.0),
    width=st.floats(min_value=0.4, max_value=1.0),
    detuning=st.floats(min_value=-1.0, max_value=1.0),
)
@settings(deadline=None, max_examples=20)
def test_randomized_scenarios_match_amplitudes(
    system_name: str, center: float, width: float, detuning: float
):
    """Random pulses and detunings keep the two solvers in agreement."""
    assert _compare(_model(system_name, center, width, detuning)) < 1e-6


def test_spontaneous_emission_amplitude():
    """An excited atom decays as exp(-gamma t / 2) in amplitude."""
    grid = TimeGrid(0.0, 10.0, 201)
    model = assemble(preset("two_level_atom", gamma=1.0), CouplingSchedule.zero(grid), None, 2)
    trajectory = single_excitation_evolve(model, [0, 1, 0])
    assert np.allclose(np.abs(trajectory.amplitudes[:, 1]), np.exp(-grid.times / 2), atol=1e-8)
    assert np.allclose(trajectory.loss, 1 - np.exp(-grid.times), atol=1e-8)
    assert np.allclose(trajectory.emitted_flux(), np.exp(-grid.times), atol=1e-8)


def test_release_flux_follows_the_mode():
    """A virtual cavity with nothing behind it emits exactly |u(t)|^2."""
    grid = TimeGrid(0.0, 20.0, 4001)
    u = make_mode(ExponentialDecay(1.0), grid)
    model = assemble(preset("pass_through"), gu_from_mode(u), None, 2)
    trajectory = single_excitation_evolve(model, [1, 0, 0])
    assert np.allclose(trajectory.emitted_flux(), np.abs(u.samples) ** 2, atol=1e-6)


def test_release_and_capture_are_dual(gaussian: ModeFunction):
    """Capturing the released mode itself transfers the photon completely."""
    model = assemble(
        preset("pass_through"), gu_from_mode(gaussian), gv_from_mode(gaussian), 2, 2
    )
    trajectory = single_excitation_evolve(model, [1, 0, 0])
    assert trajectory.populations[-1, 2] >= 1 - 1e-4
    assert trajectory.loss[-1] <= 1e-4


@pytest.mark.parametrize("detuning", [0.0, 0.7])
def test_closed_form_reflection_matches_filter(gaussian: ModeFunction, detuning: float):
    """Time-domain convolution and frequency-domain filtering give the same pulse."""
    direct = closed_form_reflection(gaussian, 1.0, detuning)
    filtered = reflect_mode(gaussian, 1.0, detuning)
    difference = np.abs(direct.samples - filtered.samples) ** 2
    assert np.sqrt(difference @ gaussian.grid.weights) < 1e-4


def test_zero_coupling_reflects_unchanged(gaussian: ModeFunction):
    """Without a cavity the pulse comes back as it went in."""
    assert np.allclose(closed_form_reflection(gaussian, 0.0).samples, gaussian.samples)
    with pytest.raises(InvalidArgumentError):
        closed_form_reflection(gaussian, -1.0)


class TestUnsupported:
    """Models and states outside the single-excitation closure."""

    def test_extra_channels(self, gaussian: ModeFunction):
        """Phase noise has no amplitude description."""
        system = preset("phase_noise", gamma=1.0, tau_jit=1.0)
        model = assemble(system, gu_from_mode(gaussian), None, 2)
        with pytest.raises(InvalidArgumentError, match="extra channels"):
            single_excitation_evolve(model, [1, 0, 0])

    def test_atom_in_cavity(self, gaussian: ModeFunction):
        """The composite scatterer has no single-excitation closure."""
        system = preset("atom_in_cavity", g=1.0, gamma=1.0, cavity_levels=2)
        model = assemble(system, gu_from_mode(gaussian), None, 2)
        with pytest.raises(InvalidArgumentError, match="closure"):
            single_excitation_evolve(model, [1, 0, 0])

    def test_two_excitations(self, empty_cavity: CascadeModel):
        """Two photons are not a single excitation."""
        layout = empty_cavity.layout
        rho = hilbert.product_state(
            layout,
            [hilbert.fock_state(2, 1), hilbert.fock_state(2, 1), hilbert.fock_state(2, 0)],
        )
        with pytest.raises(InvalidArgumentError, match="not a single excitation"):
            single_excitation_evolve(empty_cavity, rho)

    def test_unnormalized_amplitudes(self, empty_cavity: CascadeModel):
        """Amplitudes carry unit probability."""
        with pytest.raises(InvalidArgumentError, match="normalized"):
            single_excitation_evolve(empty_cavity, [1, 1, 0])

    def test_absent_output_slot(self, gaussian: ModeFunction):
        """A photon cannot start in a dropped output cavity."""
        model = assemble(preset("empty_cavity", gamma=1.0), gu_from_mode(gaussian), None, 2)
        with pytest.raises(InvalidArgumentError, match="cannot hold a photon"):
            single_excitation_evolve(model, [0, 0, 1])
