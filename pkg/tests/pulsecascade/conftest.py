"""
Shared fixtures: small grids, pulses and models that integrate in well under a second.
"""
import numpy as np
import pytest

from pulsecascade import hilbert
from pulsecascade.cascade import CascadeModel, assemble, preset
from pulsecascade.pulses import (
    Gaussian,
    ModeFunction,
    TimeGrid,
    gu_from_mode,
    gv_from_mode,
    make_mode,
    reflect_mode,
)


@pytest.fixture(name="grid")
def fixture_grid() -> TimeGrid:
    """Grid long enough for a reflected Gaussian to leave a unit-rate cavity."""
    return TimeGrid(0.0, 20.0, 1001)


@pytest.fixture(name="gaussian")
def fixture_gaussian(grid: TimeGrid) -> ModeFunction:
    """Gaussian input pulse centred at 3 / gamma."""
    return make_mode(Gaussian(3.0, 0.6), grid)


@pytest.fixture(name="empty_cavity")
def fixture_empty_cavity(gaussian: ModeFunction) -> CascadeModel:
    """Single-photon input reflected by a resonant cavity into the reflected mode."""
    system = preset("empty_cavity", gamma=1.0)
    v = reflect_mode(gaussian, 1.0)
    return assemble(system, gu_from_mode(gaussian), gv_from_mode(v), 2, 2)


def single_photon_state(model: CascadeModel) -> hilbert.DensityMatrix:
    """One photon in the input cavity, scatterer and output cavity empty."""
    input_levels, _, output_levels = model.layout.dims
    return hilbert.product_state(
        model.layout,
        [
            hilbert.fock_state(input_levels, 1),
            np.asarray(model.system.initial_state),
            hilbert.fock_state(output_levels, 0),
        ],
    )


def random_density(dim: int, seed: int) -> np.ndarray:
    """Random full-rank density matrix."""
    rng = np.random.default_rng(seed)
    factor = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    matrix = factor @ factor.conj().T
    return matrix / np.trace(matrix)
