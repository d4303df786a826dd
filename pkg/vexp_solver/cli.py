"""Experiment orchestration and report files for the command line.

Every run writes manifest.json (the resolved config) plus the CSV files of
its experiment into the output directory. run() returns the process exit
code: 0 when every certification passed, 2 when the run completed with a
failed certification.
"""

import csv
import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from vexp_solver.energy import EnergyAssembly
from vexp_solver.grid_core import Grid
from vexp_solver.mountain_pass import (
    cerami_telemetry,
    decay_study,
    far_point,
    mountain_pass_solve,
    verify_blowdown,
    verify_cone_lemma,
    verify_mp_geometry,
)
from vexp_solver.mountain_pass.geometry import default_cone
from vexp_solver.multiplicity import (
    DiscreteBasis,
    beta_sequence,
    build_cone_family,
    verify_A1_proxy,
    verify_A2,
)
from vexp_solver.problem_def import (
    BUILTIN_INSTANCES,
    ProblemInstance,
    check_AR,
    check_H0,
    check_H1,
    check_H2,
    check_H3,
    check_V,
    get_instance,
    inline_instance,
)
from vexp_solver.shared_libraries.errors import ConfigError, PreconditionError, VexpError
from vexp_solver.shared_libraries.types import HypothesisReport, RunConfig, Verdict

logger = logging.getLogger(__name__)

HYPOTHESIS_SAMPLE_NODES = 101


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(value) for value in row])


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Raises:
        ConfigError: naming the offending key.
    """
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError("config", f"file {path} not found") from None
    except tomllib.TOMLDecodeError as err:
        raise ConfigError("config", f"malformed TOML: {err}") from None
    return validate_config(data)


def validate_config(data: dict[str, Any]) -> RunConfig:
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as err:
        first = err.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(key, first["msg"]) from None
    if config.instance.inline is None and config.instance.name not in BUILTIN_INSTANCES:
        raise ConfigError("instance.name", f"unknown instance {config.instance.name!r}")
    if any(radius <= 0 for radius in config.decay.radii):
        raise ConfigError("decay.radii", "radii must be positive")
    if any(radius <= 0 for radius in config.geometry.radii):
        raise ConfigError("geometry.radii", "radii must be positive")
    interior = (config.grid.nodes - 2) ** config.grid.dimension
    if any(not 1 <= k <= interior for k in config.multiplicity.ks):
        raise ConfigError("multiplicity.ks", f"every k must lie in 1..{interior}")
    return config


def resolve_instance(config: RunConfig) -> ProblemInstance:
    if config.instance.inline is not None:
        return inline_instance(config.instance.inline, name=config.instance.name or "inline")
    return get_instance(config.instance.name)


def _grid(config: RunConfig) -> Grid:
    return Grid.symmetric(config.grid.dimension, config.grid.half_width, config.grid.nodes)


def _coordinate_header(dimension: int) -> list[str]:
    return [f"x{axis + 1}" for axis in range(dimension)]


def run_solve(config: RunConfig, instance: ProblemInstance, out: Path) -> bool:
    grid = _grid(config)
    assembly = EnergyAssembly(instance, grid, config.solver.variant)
    e = far_point(assembly, radius=config.solver.cone_radius)
    report = mountain_pass_solve(assembly, e, config.solver)
    write_csv(
        out / "profiles.csv",
        _coordinate_header(grid.dimension) + ["u"],
        (list(x) + [u] for x, u in zip(grid.coordinates, report.profile)),
    )
    write_csv(
        out / "telemetry.csv",
        ["iter", "phi", "s_n", "norm"],
        zip(range(len(report.energies)), report.energies, report.cerami, report.norms),
    )
    bounded = cerami_telemetry(report).bounded
    positive = report.positivity is None or report.positivity.positive
    return report.converged and positive and bounded and report.final_energy > 0.0


def _hypothesis_samples(grid: Grid) -> np.ndarray:
    interior = grid.interior_indices
    stride = max(1, interior.size // HYPOTHESIS_SAMPLE_NODES)
    return grid.coordinates[interior[::stride]]


def _witness_text(report: HypothesisReport) -> str:
    if report.witness is None:
        return ""
    x = " ".join(_fmt(value) for value in report.witness.x)
    return f"x=[{x}];t={_fmt(report.witness.t)};{report.witness.detail}"


def run_check_hypotheses(config: RunConfig, instance: ProblemInstance, out: Path) -> bool:
    grid = _grid(config)
    x = _hypothesis_samples(grid)
    reports = [
        check_V(instance, grid.dimension, x_samples=x),
        check_H0(instance, x),
        check_H1(instance, x),
        check_H2(instance, x),
        check_H3(instance, x),
        check_AR(instance, x),
    ]
    write_csv(
        out / "hypotheses.csv",
        ["name", "verdict", "constants", "witness"],
        (
            [
                report.name,
                report.verdict.value,
                ";".join(f"{key}={_fmt(value)}" for key, value in sorted(report.constants.items())),
                _witness_text(report),
            ]
            for report in reports
        ),
    )
    # AR is reported, never required
    return all(report.certified for report in reports if report.name != "AR")


def run_verify_geometry(config: RunConfig, instance: ProblemInstance, out: Path) -> bool:
    grid = _grid(config)
    assembly = EnergyAssembly(instance, grid, config.solver.variant)
    geometry = config.geometry
    rows: list[list[Any]] = []
    origin = np.full(grid.dimension, 0.5 * (grid.lower + grid.upper))
    try:
        cone_report = verify_cone_lemma(
            assembly.exponents, origin, geometry.epsilons, geometry.delta, geometry.theta
        )
        cone_ok = cone_report.verdict is Verdict.CERTIFIED
        rows.append(["cone-lemma", cone_report.verdict.value, "epsilon", cone_report.certifying_epsilon])
    except PreconditionError as err:
        logger.info(f"Cone lemma skipped: {err}")
        cone_ok = True
        rows.append(["cone-lemma", Verdict.INAPPLICABLE.value, "epsilon", None])

    cone = default_cone(assembly, config.solver.cone_radius)
    blowdown = verify_blowdown(assembly, cone)
    rows.append(["blowdown-zero-crossing", blowdown.verdict.value, "t", blowdown.zero_crossing_t])
    rows.append(["blowdown-deep-crossing", blowdown.verdict.value, "t", blowdown.deep_crossing_t])

    mp = verify_mp_geometry(assembly, geometry.radii, geometry.samples, seed=config.solver.seed)
    rows.append(["mp-geometry-radius", mp.verdict.value, "r", mp.radius])
    rows.append(["mp-geometry-delta", mp.verdict.value, "delta", mp.delta])
    rows.append(["mp-geometry-far-point", mp.verdict.value, "norm", mp.far_point_norm])
    for sphere in mp.spheres:
        rows.append(["sphere-min", "sampled", f"r={_fmt(sphere.radius)}", sphere.min_energy])
    write_csv(out / "geometry.csv", ["check", "verdict", "quantity", "value"], rows)
    return cone_ok and blowdown.verdict is Verdict.CERTIFIED and mp.verdict is Verdict.CERTIFIED


def run_decay_study(config: RunConfig, instance: ProblemInstance, out: Path) -> bool:
    table = decay_study(
        instance,
        config.decay.radii,
        config.decay.spacing,
        config.solver,
        dimension=config.grid.dimension,
        variant=config.solver.variant,
    )
    write_csv(
        out / "decay.csv",
        ["R", "tail_max_u", "tail_max_gradu", "converged"],
        ([row.half_width, row.tail_max_u, row.tail_max_gradu, row.converged] for row in table.rows),
    )
    return table.verdict is Verdict.CERTIFIED


def run_multiplicity(config: RunConfig, instance: ProblemInstance, out: Path) -> bool:
    grid = _grid(config)
    settings = config.multiplicity
    seed = config.solver.seed
    assembly = EnergyAssembly(instance, grid, "full")
    basis = DiscreteBasis.build(grid)
    betas = beta_sequence(
        basis, settings.ks, assembly.exponents, assembly.potential, settings.restarts, seed
    )
    write_csv(out / "beta.csv", ["k", "beta_k"], ([row.k, row.beta] for row in betas))

    family = build_cone_family(grid, settings.cones)
    a2 = verify_A2(assembly, family, settings.rhos, settings.samples, seed, basis=basis)
    a1 = verify_A1_proxy(
        basis, assembly, settings.ks, settings.restarts, settings.samples, seed, betas=betas
    )
    rows: list[list[Any]] = [
        ["A2", a2.verdict.value, "rho", a2.radius],
        ["A2-bookkeeping", str(a2.bookkeeping.consistent).lower(), "codim+1/dim",
         f"{a2.bookkeeping.codim_plus + 1}/{a2.bookkeeping.dim_minus}"],
        ["A1", a1.verdict.value, "c_sigma", a1.c_sigma],
    ]
    rows.extend(["A1-min-energy", a1.verdict.value, f"k={row.k}", row.min_energy] for row in a1.rows)
    write_csv(out / "conditions.csv", ["condition", "verdict", "quantity", "value"], rows)
    a1_ok = a1.verdict in (Verdict.CERTIFIED, Verdict.INAPPLICABLE)
    return a2.verdict is Verdict.CERTIFIED and a2.bookkeeping.consistent and a1_ok


EXPERIMENTS: dict[str, Callable[[RunConfig, ProblemInstance, Path], bool]] = {
    "solve": run_solve,
    "check-hypotheses": run_check_hypotheses,
    "verify-geometry": run_verify_geometry,
    "decay-study": run_decay_study,
    "multiplicity": run_multiplicity,
}


def write_manifest(config: RunConfig, out: Path) -> None:
    manifest = json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True)
    (out / "manifest.json").write_text(manifest + "\n", encoding="utf-8")


def run(config: RunConfig, output_dir: Optional[str | Path] = None, seed: Optional[int] = None) -> int:
    """Dispatch the configured experiment.

    Returns 0 when every certification passed, 2 when the experiment
    completed with a failed certification and 1 when a VexpError aborted it
    before its reports were complete.

    Raises:
        ConfigError: the configuration cannot be turned into a problem.
    """
    if seed is not None:
        config = config.model_copy(update={"solver": config.solver.model_copy(update={"seed": seed})})
    if output_dir is not None:
        config = config.model_copy(update={"output_dir": str(output_dir)})
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(config, out)
    try:
        instance = resolve_instance(config)
        _grid(config)
    except VexpError as err:
        raise ConfigError("instance", str(err)) from err
    logger.info(f"Running {config.experiment} on {instance.name} into {out}")
    try:
        passed = EXPERIMENTS[config.experiment](config, instance, out)
    except VexpError as err:
        logger.error(f"{config.experiment} aborted: {err}", exc_info=True)
        return 1
    logger.info(f"{config.experiment}: {'all certifications passed' if passed else 'some certifications failed'}")
    return 0 if passed else 2
