"""
exdyn command line.

    exdyn finite analyze --input g.json --out report.json
    exdyn finite verify --max-size 5 --trials 1000 --seed 42 --out summary.json
    exdyn cycles --map "z^2-1" --period 2 --out cycles.json
    exdyn basins --map "z^2-1" --period 2 --grid 800x800 --window -2,2,-2,2 --out basins.ppm --stats stats.json
    exdyn basins --map "z^2-1" --period 2 --sphere --tilt 60 --out sphere.ppm
    exdyn refine --a p1.grid --b p2.grid --out refine.json
    exdyn immediate --grid p2.grid --end 0+0i --out mask.ppm

Exit codes: 0 success, 1 a theorem failed with its hypotheses satisfied, 2 bad input,
3 file system trouble.
"""

import argparse
import logging
import sys

from config import (
    CAPTURE_RADIUS,
    CONFIRM_FACTOR,
    DEFAULT_GRID,
    DEFAULT_WINDOW,
    DEFAULT_WORKERS,
    EXIT_IO,
    EXIT_OK,
    EXIT_THEOREM_FAILED,
    EXIT_USAGE,
    LOG_LEVEL,
    MAX_ITERATIONS,
    SPHERE_SIZE,
    SPHERE_TILT,
    SWEEP_WORKERS,
    VERIFY_MAX_SIZE,
    VERIFY_SEED,
    VERIFY_TRIALS,
)
from core.basin_grid import (
    GridSpec,
    compute_basins,
    immediate_basin_grid,
    load_grid,
    refinement_check,
    save_grid,
)
from core.complex_map import parse_map
from core.cycle_finder import find_cycles
from core.errors import ExdynError, InvalidParams, RenderIOError
from core.externology import right_externology
from core.finite_space import validate
from core.finite_sweep import verify_sweep
from core.sphere_view import compute_sphere_basins
from core.theorem_suite import analyze, report_to_dict
from utils.cli_helpers import RunConfig, configure_logging, join_negative_values
from utils.render import (
    build_palette,
    load_palette_overrides,
    render,
    render_mask,
    render_sphere,
    write_png,
    write_ppm,
)
from utils.report_io import parse_finite_instance, read_json, write_json

logger = logging.getLogger("exdyn")


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def run_finite_analyze(config: RunConfig) -> int:
    """Region report of one instance; exits 1 when a check fails under its hypotheses"""
    flow, topo, target = parse_finite_instance(read_json(config.path("input")))
    validate(flow, topo)
    if config.cross_check:
        right_externology(flow, topo, cross_check=True)
    report = analyze(flow, topo, target)
    write_json(report_to_dict(report), config.path("out"))
    failures = report.failures_under_hypotheses()
    if failures:
        logger.error("checks failed with hypotheses satisfied: %s", ", ".join(failures))
        return EXIT_THEOREM_FAILED
    violated = report.failures_with_violated_hypotheses()
    if violated:
        logger.warning("checks failing outside their hypotheses: %s", ", ".join(violated))
    return EXIT_OK


def run_finite_verify(config: RunConfig) -> int:
    """Theorem sweep summary"""
    summary = verify_sweep(config.max_size, config.trials, config.seed, config.workers)
    write_json(summary, config.path("out"))
    logger.info(
        "verified %d discrete maps and %d non-T1 instances: %d hypothesis-violation failures, %d real failures",
        summary["checked"], summary["non_t1_checked"],
        summary["hypothesis_violation_failures"], summary["hypothesis_satisfied_failures"],
    )
    if summary["hypothesis_satisfied_failures"] or summary["equivariance"]["failures"]:
        return EXIT_THEOREM_FAILED
    return EXIT_OK


def run_cycles(config: RunConfig) -> int:
    """Cycles of the map whose period divides --period"""
    cycles = find_cycles(parse_map(config.map_text), config.period)
    write_json(cycles.to_json(), config.path("out"))
    return EXIT_OK


def _write_image(image, config: RunConfig) -> None:
    if config.path("out"):
        write_ppm(image, config.path("out"))
    if config.path("png"):
        write_png(image, config.path("png"))


def run_sphere_basins(config: RunConfig) -> int:
    """Basins drawn on the Riemann sphere"""
    if config.path("grid_out"):
        raise InvalidParams("--grid-out stores flat windows only; drop it or --sphere")
    sphere = compute_sphere_basins(parse_map(config.map_text), config.sphere, config.period, config.params)
    overrides = load_palette_overrides(config.path("palette")) if config.path("palette") else None
    _write_image(render_sphere(sphere, build_palette(sphere.cycles, overrides)), config)
    if config.path("stats"):
        write_json(sphere.stats, config.path("stats"))
    return EXIT_OK


def run_basins(config: RunConfig) -> int:
    """Classify the grid, render it and write the stats"""
    if config.sphere is not None:
        return run_sphere_basins(config)
    width, height = config.grid_size
    grid_spec = GridSpec(width, height, config.window)
    grid = compute_basins(parse_map(config.map_text), grid_spec, config.period, config.params)
    overrides = load_palette_overrides(config.path("palette")) if config.path("palette") else None
    _write_image(render(grid, build_palette(grid.cycles, overrides)), config)
    if config.path("stats"):
        write_json(grid.stats, config.path("stats"))
    if config.path("grid_out"):
        save_grid(grid, config.path("grid_out"))
    return EXIT_OK


def run_refine(config: RunConfig) -> int:
    """Compare two grids of the same window"""
    stats = refinement_check(load_grid(config.path("a")), load_grid(config.path("b")))
    write_json(stats, config.path("out"))
    return EXIT_OK


def run_immediate(config: RunConfig) -> int:
    """Immediate basin mask of one end"""
    grid = load_grid(config.path("grid"))
    label = grid.cycles.resolve_end(config.end)
    mask = immediate_basin_grid(grid, label)
    _write_image(render_mask(mask), config)
    if config.path("stats"):
        write_json({
            "end": grid.end_name(label),
            "label": label,
            "immediate_pixels": int(mask.sum()),
            "basin_pixels": int((grid.labels == label).sum()),
        }, config.path("stats"))
    return EXIT_OK


# =============================================================================
# PARSER
# =============================================================================

def _add_classify_flags(parser) -> None:
    parser.add_argument("--max-iterations", type=int, default=MAX_ITERATIONS)
    parser.add_argument("--capture-radius", type=float, default=CAPTURE_RADIUS, help="chordal capture radius")
    parser.add_argument("--confirm-factor", type=int, default=CONFIRM_FACTOR,
                        help="confirmation window is period times this")
    parser.add_argument("--escape-radius", type=float, default=None,
                        help="defaults to max(2, 2 max|c_k / c_d|, 2 / |c_d|)")
    parser.add_argument("--supersample", action="store_true", help="2x2 sub-samples per pixel, majority label")
    parser.add_argument("--workers", type=int, default=DEFAULT_WORKERS)


def build_parser() -> argparse.ArgumentParser:
    """Create the command-line parser"""
    parser = argparse.ArgumentParser(prog="exdyn", description="Exterior-space analysis of discrete semi-flows")
    parser.add_argument("--log-level", default=LOG_LEVEL)
    commands = parser.add_subparsers(dest="command", required=True)

    finite = commands.add_parser("finite", help="exact analysis of finite semi-flows")
    finite_commands = finite.add_subparsers(dest="finite_command", required=True)

    analyze_parser = finite_commands.add_parser("analyze", help="region report and theorem checks")
    analyze_parser.add_argument("--input", required=True, help="instance JSON ('-' for stdin)")
    analyze_parser.add_argument("--out", default=None, help="report path (stdout when omitted)")
    analyze_parser.add_argument("--cross-check", action="store_true",
                                help="also compare epsilon^r against the brute-force tail definition")
    analyze_parser.set_defaults(subcommand="finite-analyze", handler=run_finite_analyze)

    verify_parser = finite_commands.add_parser("verify", help="exhaustive and random theorem sweep")
    verify_parser.add_argument("--max-size", type=int, default=VERIFY_MAX_SIZE)
    verify_parser.add_argument("--trials", type=int, default=VERIFY_TRIALS)
    verify_parser.add_argument("--seed", type=int, default=VERIFY_SEED)
    verify_parser.add_argument("--workers", type=int, default=SWEEP_WORKERS)
    verify_parser.add_argument("--out", default=None)
    verify_parser.set_defaults(subcommand="finite-verify", handler=run_finite_verify)

    cycles_parser = commands.add_parser("cycles", help="periodic cycles of a polynomial")
    cycles_parser.add_argument("--map", required=True, help='"z^2-1" or "c0,c1,...,cd"')
    cycles_parser.add_argument("--period", type=int, required=True)
    cycles_parser.add_argument("--out", default=None)
    cycles_parser.set_defaults(subcommand="cycles", handler=run_cycles)

    basins_parser = commands.add_parser("basins", help="classify a pixel grid and render it")
    basins_parser.add_argument("--map", required=True)
    basins_parser.add_argument("--period", type=int, required=True)
    basins_parser.add_argument("--grid", default="x".join(str(v) for v in DEFAULT_GRID))
    basins_parser.add_argument("--window", default=",".join(str(v) for v in DEFAULT_WINDOW))
    basins_parser.add_argument("--out", default=None, help="PPM image")
    basins_parser.add_argument("--png", default=None, help="optional PNG copy")
    basins_parser.add_argument("--stats", default=None)
    basins_parser.add_argument("--grid-out", default=None, help="grid file for refine/immediate")
    basins_parser.add_argument("--palette", default=None, help="JSON colour overrides")
    basins_parser.add_argument("--sphere", action="store_true",
                               help="draw the Riemann sphere instead of the --grid/--window plane")
    basins_parser.add_argument("--sphere-size", type=int, default=SPHERE_SIZE, help="sphere image side in pixels")
    basins_parser.add_argument("--tilt", type=float, default=SPHERE_TILT,
                               help="degrees infinity is turned from the viewer towards the top")
    _add_classify_flags(basins_parser)
    basins_parser.set_defaults(subcommand="basins", handler=run_basins)

    refine_parser = commands.add_parser("refine", help="compare grids of two externologies")
    refine_parser.add_argument("--a", required=True, help="grid of the coarser externology")
    refine_parser.add_argument("--b", required=True, help="grid of the finer externology")
    refine_parser.add_argument("--out", default=None)
    refine_parser.set_defaults(subcommand="refine", handler=run_refine)

    immediate_parser = commands.add_parser("immediate", help="immediate basin of one end")
    immediate_parser.add_argument("--grid", required=True)
    immediate_parser.add_argument("--end", required=True, help="label, end name, or cycle point")
    immediate_parser.add_argument("--out", default=None, help="PPM mask")
    immediate_parser.add_argument("--png", default=None)
    immediate_parser.add_argument("--stats", default=None)
    immediate_parser.set_defaults(subcommand="immediate", handler=run_immediate)
    return parser


def main(argv=None) -> int:
    """Entry point; returns the exit code"""
    argv = join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        configure_logging(args.log_level)
        logger.info("running %s", " ".join(argv))
        return args.handler(RunConfig.from_args(args))
    except RenderIOError as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except ExdynError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
