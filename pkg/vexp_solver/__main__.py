"""vexp-solver command line entry point."""

import logging
import sys
from typing import Optional

import click

from vexp_solver import cli
from vexp_solver.config import VEXP_LOG_LEVEL, VEXP_OUTPUT_DIR
from vexp_solver.shared_libraries.errors import ConfigError
from vexp_solver.shared_libraries.types import RunConfig

# Basic logging configuration
logging.basicConfig(level=getattr(logging, VEXP_LOG_LEVEL.upper(), logging.INFO))
logger = logging.getLogger(__name__)


def _run_options(func):
    func = click.option(
        "--seed",
        "seed",
        default=None,
        type=click.IntRange(0, 2**64 - 1),
        help="Seed for every random generator; overrides solver.seed.",
    )(func)
    func = click.option(
        "--out",
        "out",
        default=None,
        type=click.Path(file_okay=False),
        help=f"Output directory; overrides output_dir (default {VEXP_OUTPUT_DIR}).",
    )(func)
    func = click.option(
        "--config",
        "config_path",
        default=None,
        type=click.Path(dir_okay=False),
        help="TOML run configuration.",
    )(func)
    return func


def _dispatch(experiment: str, config_path: Optional[str], out: Optional[str], seed: Optional[int]) -> None:
    try:
        if config_path is not None:
            config = cli.load_config(config_path)
        else:
            config = RunConfig(output_dir=VEXP_OUTPUT_DIR)
        config = config.model_copy(update={"experiment": experiment})
        code = cli.run(config, output_dir=out, seed=seed)
    except ConfigError as e:
        logger.error(f"Error: {e}")
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(1)
    except Exception as e:
        logger.error(f"An error occurred during {experiment}: {e}", exc_info=True)
        sys.exit(1)
    sys.exit(code)


@click.group()
def main() -> None:
    """Variable-exponent mountain-pass experiments."""


@main.command("solve")
@_run_options
def solve(config_path: Optional[str], out: Optional[str], seed: Optional[int]) -> None:
    """Mountain-pass solve; writes profiles.csv and telemetry.csv."""
    _dispatch("solve", config_path, out, seed)


@main.command("check-hypotheses")
@_run_options
def check_hypotheses(config_path: Optional[str], out: Optional[str], seed: Optional[int]) -> None:
    """Sample-based (V), (H0)-(H3) and AR checks; writes hypotheses.csv."""
    _dispatch("check-hypotheses", config_path, out, seed)


@main.command("verify-geometry")
@_run_options
def verify_geometry(config_path: Optional[str], out: Optional[str], seed: Optional[int]) -> None:
    """Cone lemma, blow-down and sphere geometry; writes geometry.csv."""
    _dispatch("verify-geometry", config_path, out, seed)


@main.command("decay-study")
@_run_options
def decay_study(config_path: Optional[str], out: Optional[str], seed: Optional[int]) -> None:
    """Re-solve over truncation radii; writes decay.csv."""
    _dispatch("decay-study", config_path, out, seed)


@main.command("multiplicity")
@_run_options
def multiplicity(config_path: Optional[str], out: Optional[str], seed: Optional[int]) -> None:
    """beta_k sequence and the (A1)/(A2) premises; writes beta.csv and conditions.csv."""
    _dispatch("multiplicity", config_path, out, seed)


if __name__ == "__main__":
    main()
