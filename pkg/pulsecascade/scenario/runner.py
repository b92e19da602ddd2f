"""
Scenario pipeline: modes, couplings, model, initial state, integration and result files.
"""

import logging
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .. import analyze, formats, hilbert
from ..cascade import CascadeModel, SystemSpec, assemble, preset
from ..evolve import TimeSeries, integrate
from ..exceptions import InvalidArgumentError
from ..pulses import (
    CouplingSchedule,
    ExponentialDecay,
    Flat,
    Gaussian,
    ModeFunction,
    ModeShape,
    TimeGrid,
    gu_from_mode,
    gv_from_mode,
    make_mode,
    reflect_mode,
)
from ..regression import OutputMode, dominant_modes, g1_matrix
from .constants import LOGGER_NAME, OutputChoice, ShapeKind, StateKind
from .elements import PulseSpec, ScenarioConfig

logger = logging.getLogger(LOGGER_NAME)

TIME_SERIES_FILE = "time_series.tsv"
CHECKPOINT_FILE = "rho_final.bin"
WIGNER_FILE = "wigner_v.tsv"
POSTSELECTED_WIGNER_FILE = "wigner_postselected.tsv"
MODES_FILE = "modes_used.tsv"
OCCUPATIONS_FILE = "occupations.tsv"


class RunSummary(NamedTuple):
    """Final figures of a run."""

    name: str
    n_u: float
    n_v: float
    loss: float
    output_populations: Tuple[float, ...]
    fidelity: Optional[float] = None
    postselection_probability: Optional[float] = None

    def __str__(self) -> str:
        populations = ", ".join(f"{value:.4f}" for value in self.output_populations)
        text = (
            f"{self.name}: n_u={self.n_u:.4f} n_v={self.n_v:.4f} loss={self.loss:.4f} "
            f"p_v=[{populations}]"
        )
        if self.fidelity is not None:
            text += f" fidelity={self.fidelity:.4f}"
        if self.postselection_probability is not None:
            text += f" p_down={self.postselection_probability:.4f}"
        return text


def _shape(pulse: PulseSpec) -> ModeShape:
    if pulse.kind is ShapeKind.GAUSSIAN:
        return Gaussian(pulse.center, pulse.width)  # type: ignore[arg-type]
    if pulse.kind is ShapeKind.EXPONENTIAL:
        return ExponentialDecay(pulse.rate, pulse.start)  # type: ignore[arg-type]
    if pulse.kind is ShapeKind.FLAT:
        return Flat(pulse.duration, pulse.start)  # type: ignore[arg-type]
    raise InvalidArgumentError(f"{pulse.kind.value} is not an analytic shape")


def mode_of(pulse: PulseSpec, grid: TimeGrid) -> ModeFunction:
    """Sampled, normalized mode of a pulse setting."""
    if pulse.kind is ShapeKind.FILE:
        return formats.load_mode(pulse.path, grid)  # type: ignore[arg-type]
    return make_mode(_shape(pulse), grid)


def build_system(config: ScenarioConfig) -> SystemSpec:
    """The scatterer of a scenario."""
    return preset(config.preset, **config.system)


def initial_state(
    config: ScenarioConfig, system: SystemSpec, layout: hilbert.SpaceLayout
) -> hilbert.DensityMatrix:
    """``|n>`` or ``|alpha>`` in u, the preset state in s and vacuum in v."""
    input_levels, _, output_levels = layout.dims
    if config.input.state is StateKind.COHERENT:
        source = hilbert.coherent_state(input_levels, config.input.alpha)
    else:
        source = hilbert.fock_state(input_levels, config.input.photons)
    return hilbert.product_state(
        layout,
        [source, np.asarray(system.initial_state), hilbert.fock_state(output_levels, 0)],
    )


def _input(
    config: ScenarioConfig, grid: TimeGrid
) -> Tuple[Optional[ModeFunction], CouplingSchedule]:
    if config.input.pulse.kind is ShapeKind.NONE:
        return None, CouplingSchedule.zero(grid)
    u = mode_of(config.input.pulse, grid)
    return u, gu_from_mode(u, config.input.g_max, config.input.floor)


def emitter_model(config: ScenarioConfig) -> Tuple[CascadeModel, hilbert.DensityMatrix]:
    """Input cavity and scatterer without output cavity, with its initial state."""
    grid = config.grid.to_grid()
    system = build_system(config)
    _, gu = _input(config, grid)
    model = assemble(system, gu, None, config.input.levels)
    return model, initial_state(config, system, model.layout)


def find_modes(
    config: ScenarioConfig, count: int, workers: int = 1, max_batch: Optional[int] = None
) -> List[OutputMode]:
    """Dominant output modes of the scatterer under the scenario's input."""
    model, rho0 = emitter_model(config)
    correlation = g1_matrix(model, rho0, max_batch=max_batch, workers=workers)
    modes = dominant_modes(correlation, count)
    logger.info(
        "found %d modes holding %.4f of %.4f emitted photons",
        count,
        sum(mode.occupation for mode in modes),
        correlation.total_photons(),
    )
    return modes


def output_mode(
    config: ScenarioConfig, system: SystemSpec, grid: TimeGrid, u: Optional[ModeFunction]
) -> ModeFunction:
    """The output mode the scenario asks for."""
    choice = config.output.choice
    if choice is OutputChoice.G1:
        return find_modes(config, 1)[0].mode
    if choice in (OutputChoice.REFLECT, OutputChoice.INPUT):
        if u is None:
            raise InvalidArgumentError(f"output mode {choice.value} needs an input pulse")
        if choice is OutputChoice.INPUT:
            return u
        return reflect_mode(u, system.gamma, system.detuning)
    return mode_of(config.output.pulse, grid)  # type: ignore[arg-type]


def build_model(config: ScenarioConfig) -> Tuple[CascadeModel, Dict[str, ModeFunction]]:
    """The full cascaded model of a scenario and the modes it uses."""
    grid = config.grid.to_grid()
    system = build_system(config)
    u, gu = _input(config, grid)
    v = output_mode(config, system, grid, u)
    gv = gv_from_mode(v, config.output.g_max, config.output.floor)
    model = assemble(system, gu, gv, config.input.levels, config.output.levels)
    modes = {"v": v} if u is None else {"u": u, "v": v}
    return model, modes


def _write_modes(modes: Dict[str, ModeFunction], target: Path) -> None:
    times = next(iter(modes.values())).grid.times
    channels = {}
    for label, mode in modes.items():
        channels[f"{label}_re"] = mode.samples.real
        channels[f"{label}_im"] = mode.samples.imag
    formats.write_table(TimeSeries(times, channels), target)


def run_scenario(config: ScenarioConfig, out_dir: Optional[Path] = None) -> RunSummary:
    """
    Integrate a scenario and write the requested files into ``out_dir``.

    :param config: validated scenario.
    :param out_dir: directory for result files; nothing is written without it.
    :return: final photon numbers, losses and fidelities.
    """
    logger.info("running %s", config.describe())
    model, modes = build_model(config)
    rho0 = initial_state(config, model.system, model.layout)

    alpha = config.cat_amplitude
    monitors = {}
    if alpha is not None:
        monitors["fidelity"] = lambda state: analyze.cat_fidelity(
            analyze.atom_mode_state(model, state), alpha
        )
    evolution = integrate(model, rho0, config.integration, monitors)
    series, final = evolution.series, evolution.final

    output_levels = model.layout.dims[2]
    summary = RunSummary(
        name=config.name,
        n_u=float(series["n_u"][-1]),
        n_v=float(series["n_v"][-1]),
        loss=analyze.integrated_flux(series),
        output_populations=tuple(
            float(series[f"p_v_{level}"][-1]) for level in range(min(output_levels, 4))
        ),
        fidelity=float(series["fidelity"][-1]) if alpha is not None else None,
    )

    if out_dir is None:
        return summary
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = config.outputs
    if outputs.time_series:
        formats.write_table(series, out_dir / TIME_SERIES_FILE)
    if outputs.checkpoint:
        formats.write_checkpoint(final, out_dir / CHECKPOINT_FILE)
    if outputs.modes:
        _write_modes(modes, out_dir / MODES_FILE)
    extent = (-outputs.wigner_range, outputs.wigner_range)
    if outputs.wigner:
        grid = analyze.wigner(
            analyze.mode_state(final, "v"), extent, extent, outputs.wigner_resolution
        )
        formats.write_table(grid, out_dir / WIGNER_FILE)
    if outputs.wigner_postselected:
        probability, conditional = analyze.postselect_atom(analyze.atom_mode_state(model, final))
        grid = analyze.wigner(conditional, extent, extent, outputs.wigner_resolution)
        formats.write_table(grid, out_dir / POSTSELECTED_WIGNER_FILE)
        summary = summary._replace(postselection_probability=probability)
    return summary


def write_modes(modes: List[OutputMode], out_dir: Path) -> List[Path]:
    """Write ``mode_<i>.tsv`` per mode and the occupation table."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        formats.write_table(mode.mode, out_dir / f"mode_{index}.tsv")
        for index, mode in enumerate(modes, start=1)
    ]
    occupations = out_dir / OCCUPATIONS_FILE
    occupations.write_text(formats.format_occupations(modes))
    return paths + [occupations]


def wigner_from_checkpoint(
    checkpoint: Path, slot: str = "v", extent: float = 4.0, resolution: int = 81
) -> analyze.WignerGrid:
    """Wigner function of one slot of a stored final state."""
    rho = formats.read_checkpoint(checkpoint)
    index = hilbert.slot_index(slot)
    if rho.layout.dims[index] < 2:
        raise InvalidArgumentError(f"slot {slot} is absent from the checkpoint")
    return analyze.wigner(
        analyze.mode_state(rho, index), (-extent, extent), (-extent, extent), resolution
    )

