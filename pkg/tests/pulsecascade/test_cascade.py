"""
Tests for scatterer presets and the assembled cascade.
"""
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from pulsecascade import hilbert
from pulsecascade.cascade import (
    CascadeModel,
    Preset,
    SystemSpec,
    assemble,
    effective_hamiltonian_at,
    flux_operator_at,
    hamiltonian_at,
    lindblad0_at,
    preset,
)
from pulsecascade.exceptions import InvalidArgumentError, InvalidDimensionError
from pulsecascade.pulses import Gaussian, TimeGrid, gu_from_mode, gv_from_mode, make_mode

times = st.floats(min_value=0.0, max_value=20.0)


@pytest.fixture(name="atom_cavity")
def fixture_atom_cavity() -> CascadeModel:
    """Small atom-in-cavity cascade with every extra channel switched on."""
    grid = TimeGrid(0.0, 6.0, 301)
    u = make_mode(Gaussian(3.0, 0.5), grid)
    system = preset(
        Preset.ATOM_IN_CAVITY,
        g=2.0,
        gamma=1.0,
        atom_decay=0.5,
        kappa_oc=0.1,
        cavity_levels=2,
        decay_branching=0.7,
    )
    return assemble(system, gu_from_mode(u), gv_from_mode(u), 2, 2)


def _dagger(matrix: np.ndarray) -> np.ndarray:
    return matrix.conj().T


@given(t=times)
@settings(
    deadline=None, max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
def test_hamiltonian_is_hermitian(empty_cavity: CascadeModel, t: float):
    """The cascaded Hamiltonian is Hermitian at all times."""
    h = hamiltonian_at(empty_cavity, t)
    assert np.allclose(h, _dagger(h))


def test_series_product_of_three_components(empty_cavity: CascadeModel):
    """
    H and L_0 equal the series product input -> scatterer -> output.

    With L_u = g_u a_u, L_s = sqrt(gamma) c and L_v = g_v a_v, every later component sees
    the earlier ones through H += (1/2i)(L_later^dagger L_earlier - h.c.).
    """
    model = empty_cavity
    for t in (0.5, 3.0, 7.25):
        parts = [
            model.gu.at(t) * model.a_u,
            model.sqrt_gamma * model.c,
            model.gv.at(t) * model.a_v,
        ]
        expected = model.scatterer_hamiltonian(t).copy()
        for later in range(3):
            for earlier in range(later):
                exchange = _dagger(parts[later]) @ parts[earlier]
                expected += (exchange - _dagger(exchange)) / 2j
        assert np.allclose(hamiltonian_at(model, t), expected)
        assert np.allclose(lindblad0_at(model, t), sum(parts))


def test_effective_hamiltonian_and_flux(atom_cavity: CascadeModel):
    """H_eff = H - (i/2) sum L^dagger L and the flux operator is L_0^dagger L_0."""
    model = atom_cavity
    for t in (0.0, 1.3, 3.0, 6.0):
        l0 = lindblad0_at(model, t)
        decay = _dagger(l0) @ l0 + sum(_dagger(channel) @ channel for channel in model.channels)
        assert np.allclose(
            effective_hamiltonian_at(model, t), hamiltonian_at(model, t) - 0.5j * decay
        )
        assert np.allclose(flux_operator_at(model, t), _dagger(l0) @ l0)


def test_assemble_without_output_cavity(gaussian):
    """Without a capture schedule the output slot collapses."""
    model = assemble(preset("two_level_atom", gamma=1.0), gu_from_mode(gaussian))
    assert model.layout.dims == (2, 2, 1)
    assert not model.gv.samples.any()


def test_assemble_needs_output_levels(gaussian):
    """An output cavity needs a truncation."""
    schedule = gu_from_mode(gaussian)
    with pytest.raises(InvalidArgumentError, match="output_levels"):
        assemble(preset("two_level_atom", gamma=1.0), schedule, schedule)


class TestPresets:
    """Scatterer presets."""

    def test_unknown_preset(self):
        """Presets are looked up by name."""
        with pytest.raises(InvalidArgumentError, match="unknown preset"):
            preset("laser")

    def test_unknown_parameter(self):
        """Misspelled parameters are reported."""
        with pytest.raises(InvalidArgumentError, match="bad parameters"):
            preset("empty_cavity", gamma=1.0, gama=2.0)

    def test_phase_noise_dephases_photons(self):
        """Mirror jitter is a number-operator channel at rate 1 / tau_jit."""
        system = preset("phase_noise", gamma=1.0, tau_jit=0.5, cavity_levels=3)
        (channel,) = system.extra_channels
        assert channel.label == "jitter"
        assert channel.rate == pytest.approx(2.0)
        assert np.allclose(channel.operator, hilbert.number(3))

    def test_two_level_atom_starts_excited(self):
        """The two-level atom is prepared in |e> by default."""
        system = preset("two_level_atom", gamma=1.0)
        assert np.allclose(system.initial_state, [0, 1])
        assert np.allclose(system.coupling, [[0, 1], [0, 0]])

    def test_atom_in_cavity_structure(self):
        """Atom (down, up, e) times cavity, flattened into one slot."""
        system = preset(
            "atom_in_cavity",
            g=1.0,
            gamma=1.0,
            atom_decay=2.0,
            cavity_levels=3,
            decay_branching=0.25,
        )
        assert system.dimension == 9
        assert system.subsystem_dims == (3, 3)
        rates = {channel.label: channel.rate for channel in system.extra_channels}
        assert rates == pytest.approx({"decay_up": 0.5, "decay_down": 1.5})
        initial = np.asarray(system.initial_state)
        assert np.vdot(initial, initial) == pytest.approx(1.0)
        down = system.observables["down"]
        assert np.real(initial.conj() @ down @ initial) == pytest.approx(0.5)

    def test_atom_in_cavity_conserves_excitations(self):
        """The Jaynes-Cummings exchange commutes with photons plus excitations."""
        system = preset("atom_in_cavity", g=1.3, gamma=1.0, cavity_levels=3)
        number = system.excitation_number
        hamiltonian = system.hamiltonian_at(0.0)
        assert np.allclose(hamiltonian @ number, number @ hamiltonian)

    def test_negative_rates(self):
        """Rates are non-negative."""
        with pytest.raises(InvalidArgumentError):
            preset("atom_in_cavity", g=1.0, gamma=1.0, atom_decay=-1.0)
        with pytest.raises(InvalidArgumentError):
            preset("empty_cavity", gamma=0.0)


class TestSystemSpec:
    """Validation of hand-built scatterers."""

    def test_non_hermitian_hamiltonian(self):
        """Scatterer Hamiltonians are Hermitian."""
        with pytest.raises(InvalidArgumentError, match="Hermitian"):
            SystemSpec("bad", np.array([[0, 1], [0, 0]]), hilbert.annihilation(2), 1.0)

    def test_subsystem_dims_must_multiply(self):
        """Sub-dimensions split the scatterer slot exactly."""
        with pytest.raises(InvalidDimensionError):
            SystemSpec(
                "bad", np.zeros((4, 4)), hilbert.annihilation(4), 1.0, subsystem_dims=(3, 2)
            )

    def test_time_dependent_hamiltonian(self, gaussian):
        """A callable Hamiltonian is evaluated at every time."""
        drive = hilbert.annihilation(2) + hilbert.annihilation(2).conj().T
        system = SystemSpec("driven", lambda t: t * drive, hilbert.annihilation(2), 1.0)
        model = assemble(system, gu_from_mode(gaussian))
        assert model.static_hamiltonian is None
        assert np.allclose(
            model.scatterer_hamiltonian(2.0), hilbert.embed(2.0 * drive, "s", model.layout)
        )
