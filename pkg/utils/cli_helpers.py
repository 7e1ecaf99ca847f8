"""
Small helpers for exdyn.py: logging setup, flag parsing and the resolved run configuration.
"""

import logging
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from config import LOG_FORMAT, LOG_LEVEL, SWEEP_WORKERS, VERIFY_MAX_SIZE, VERIFY_SEED, VERIFY_TRIALS
from core.basin_grid import ClassifyParams
from core.errors import InvalidParams
from core.sphere_view import SphereView

# flags whose values may start with a minus sign ("-2,2,-2,2")
NEGATIVE_VALUE_FLAGS = ("--window",)


def configure_logging(level: str = LOG_LEVEL) -> None:
    """One stderr handler for the whole process; reports go to files or stdout."""
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise InvalidParams(f"unknown log level {level!r}")
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(numeric)


def parse_grid_size(text: str) -> Tuple[int, int]:
    """'800x800' -> (width, height)."""
    parts = text.lower().split("x")
    if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
        raise InvalidParams(f"grid must look like WIDTHxHEIGHT, got {text!r}")
    width, height = (int(p) for p in parts)
    if width < 1 or height < 1:
        raise InvalidParams(f"grid {text!r} has no pixels")
    return width, height


def parse_window(text: str) -> Tuple[float, float, float, float]:
    """'re_min,re_max,im_min,im_max' -> floats, with both ranges nonempty."""
    try:
        values = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise InvalidParams(f"window must be four numbers, got {text!r}")
    if len(values) != 4:
        raise InvalidParams(f"window must be four numbers, got {text!r}")
    re_min, re_max, im_min, im_max = values
    if not (re_min < re_max and im_min < im_max):
        raise InvalidParams(f"window {text!r} is empty")
    return values


def join_negative_values(argv: List[str]) -> List[str]:
    """Rewrite '--window -2,2,-2,2' as '--window=-2,2,-2,2' so argparse does not read a flag."""
    joined, i = [], 0
    while i < len(argv):
        if argv[i] in NEGATIVE_VALUE_FLAGS and i + 1 < len(argv):
            joined.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            joined.append(argv[i])
            i += 1
    return joined


# flags that name files, per subcommand
PATH_FLAGS = {
    "finite-analyze": ("input", "out"),
    "finite-verify": ("out",),
    "cycles": ("out",),
    "basins": ("out", "png", "stats", "grid_out", "palette"),
    "refine": ("a", "b", "out"),
    "immediate": ("grid", "out", "png", "stats"),
}


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, parsed and checked before any work starts."""
    subcommand: str
    paths: Dict[str, str] = field(default_factory=dict)
    params: Optional[ClassifyParams] = None
    map_text: Optional[str] = None
    period: Optional[int] = None
    grid_size: Optional[Tuple[int, int]] = None
    window: Optional[Tuple[float, float, float, float]] = None
    sphere: Optional[SphereView] = None
    end: Optional[str] = None
    cross_check: bool = False
    max_size: int = VERIFY_MAX_SIZE
    trials: int = VERIFY_TRIALS
    seed: int = VERIFY_SEED
    workers: int = SWEEP_WORKERS

    def path(self, name: str) -> Optional[str]:
        return self.paths.get(name)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """Build the run configuration from parsed arguments"""
        subcommand = args.subcommand
        if subcommand not in PATH_FLAGS:
            raise InvalidParams(f"unknown subcommand {subcommand!r}")
        paths = {name: getattr(args, name) for name in PATH_FLAGS[subcommand] if getattr(args, name, None)}
        extra = {}
        if subcommand == "basins":
            extra = dict(
                grid_size=parse_grid_size(args.grid),
                window=parse_window(args.window),
                params=ClassifyParams(
                    max_iterations=args.max_iterations,
                    capture_radius=args.capture_radius,
                    confirm_factor=args.confirm_factor,
                    escape_radius=args.escape_radius,
                    supersample=args.supersample,
                    workers=args.workers,
                ),
                sphere=SphereView(args.sphere_size, args.tilt) if args.sphere else None,
            )
        if subcommand == "finite-verify":
            extra = dict(max_size=args.max_size, trials=args.trials, seed=args.seed, workers=args.workers)
        return cls(
            subcommand=subcommand,
            paths=paths,
            map_text=getattr(args, "map", None),
            period=getattr(args, "period", None),
            end=getattr(args, "end", None),
            cross_check=getattr(args, "cross_check", False),
            **extra,
        )
