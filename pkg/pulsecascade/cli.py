"""
Command line interface.

    pulsecascade run <config> [--out DIR]
    pulsecascade find-modes <config> -k K [--out DIR] [--workers W]
    pulsecascade wigner <checkpoint> [--mode v] [--range R] [--res N] [--out FILE]

Exit codes: 0 on success, 1 on simulation failures, 2 on config errors.
"""

import argparse
import enum
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from . import constants, formats
from .exceptions import SimulationError
from .scenario import ConfigError, find_modes, load_scenario, run_scenario, write_modes
from .scenario.runner import wigner_from_checkpoint

logger = logging.getLogger(constants.LOGGER_NAME)

EXIT_OK = 0
EXIT_SIMULATION_ERROR = 1
EXIT_CONFIG_ERROR = 2

LOG_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}


class Action(enum.Enum):
    """Subcommands."""

    RUN = "run"
    FIND_MODES = "find-modes"
    WIGNER = "wigner"


@dataclass
class Command:
    """A parsed command line."""

    action: Action
    path: Path
    log_level: int = logging.WARNING
    out: Optional[Path] = None
    count: int = 1
    workers: int = 1
    slot: str = "v"
    extent: float = 4.0
    resolution: int = 81


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsecascade", description="Quantum pulses scattering on cascaded systems."
    )
    parser.add_argument("--log-level", choices=sorted(LOG_LEVELS), default="warning")
    actions = parser.add_subparsers(dest="action", required=True)

    run = actions.add_parser(Action.RUN.value, help="integrate a scenario")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=Path("."), help="directory for result files")

    modes = actions.add_parser(Action.FIND_MODES.value, help="dominant output modes")
    modes.add_argument("config", type=Path)
    modes.add_argument("-k", "--count", type=int, default=1)
    modes.add_argument("--workers", type=int, default=1)
    modes.add_argument("--out", type=Path, default=Path("."))

    wigner = actions.add_parser(Action.WIGNER.value, help="Wigner function of a checkpoint")
    wigner.add_argument("checkpoint", type=Path)
    wigner.add_argument("--mode", choices=constants.SLOT_LABELS, default="v")
    wigner.add_argument("--range", dest="extent", type=float, default=4.0)
    wigner.add_argument("--res", dest="resolution", type=int, default=81)
    wigner.add_argument("--out", type=Path, default=None, help="file, default wigner_<mode>.tsv")
    return parser


def parse_command(argv: Optional[List[str]] = None) -> Command:
    """Turn command line arguments into a command."""
    args = _parser().parse_args(argv)
    action = Action(args.action)
    command = Command(action, Path("."), LOG_LEVELS[args.log_level])
    if action is Action.WIGNER:
        command.path = args.checkpoint
        command.slot = args.mode
        command.extent = args.extent
        command.resolution = args.resolution
        command.out = args.out
    else:
        command.path = args.config
        command.out = args.out
    if action is Action.FIND_MODES:
        command.count = args.count
        command.workers = args.workers
    return command


def _execute(command: Command) -> None:
    if command.action is Action.RUN:
        summary = run_scenario(load_scenario(command.path), command.out)
        print(summary)
    elif command.action is Action.FIND_MODES:
        config = load_scenario(command.path)
        modes = find_modes(config, command.count, command.workers)
        write_modes(modes, command.out or Path("."))
        for index, mode in enumerate(modes, start=1):
            print(f"mode {index}: {mode.occupation:.6f}")
    else:
        grid = wigner_from_checkpoint(
            command.path, command.slot, command.extent, command.resolution
        )
        target = command.out or command.path.with_name(f"wigner_{command.slot}.tsv")
        formats.write_table(grid, target)
        print(f"wrote {target}, integral {grid.integral():.6f}")


def execute_command(command: Command) -> int:
    """Execute a command and return the process exit code."""
    logging.basicConfig(
        level=command.log_level, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )
    try:
        _execute(command)
    except ConfigError as error:
        logger.error("%s: %s", command.path, error)
        return EXIT_CONFIG_ERROR
    except (SimulationError, OSError) as error:
        logger.error("%s failed: %s", command.action.value, error)
        return EXIT_SIMULATION_ERROR
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the ``pulsecascade`` script."""
    return execute_command(parse_command(argv))


if __name__ == "__main__":
    sys.exit(main())
