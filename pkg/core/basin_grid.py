"""
Per-pixel end-point classification of polynomial semi-flows.

Every pixel center is iterated until it either stays beyond the escape radius (the end at
infinity) or is caught by a capture disk around a cycle point and then tracks the cycle for
the confirmation window. The label of (cycle i, phase j) is offsets[i] + j; -1 marks
pixels left undecided after the iteration cap.
"""

import json
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import (
    CAPTURE_RADIUS,
    CAPTURE_SAFETY,
    CONFIRM_FACTOR,
    DEDUP_TOLERANCE,
    DEFAULT_WORKERS,
    HISTOGRAM_BINS,
    MAX_ITERATIONS,
    PERIOD_CAP,
    ROOT_TOLERANCE,
    ROW_CHUNK,
)
from core.complex_map import ComplexMapSpec, chordal_distance
from core.cycle_finder import CycleClass, CycleSet, find_cycles, min_cycle_gap
from core.errors import (
    CyclePixelOutsideWindow,
    GridMismatch,
    InvalidParams,
    ParseError,
    PeriodCapExceeded,
)

logger = logging.getLogger(__name__)

UNCLASSIFIED = -1


@dataclass(frozen=True)
class ClassifyParams:
    max_iterations: int = MAX_ITERATIONS
    capture_radius: float = CAPTURE_RADIUS
    confirm_factor: int = CONFIRM_FACTOR
    escape_radius: Optional[float] = None
    root_tolerance: float = ROOT_TOLERANCE
    dedup_tolerance: float = DEDUP_TOLERANCE
    supersample: bool = False
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        numbers = (self.max_iterations, self.capture_radius, self.confirm_factor,
                   self.root_tolerance, self.dedup_tolerance, self.workers)
        if any(v <= 0 for v in numbers) or (self.escape_radius is not None and self.escape_radius <= 0):
            raise InvalidParams("classification parameters must be positive")

    def confirm_steps(self, period: int) -> int:
        """Consecutive steps an orbit must stay captured or far"""
        return period * self.confirm_factor

    def echo(self) -> Dict[str, Any]:
        """Parameters that affect labels; the worker count does not."""
        data = asdict(self)
        data.pop("workers")
        return data


@dataclass(frozen=True)
class GridSpec:
    """Pixel grid over [re_min, re_max] x [im_min, im_max]; row 0 is the top (largest imaginary part)."""

    width: int
    height: int
    window: Tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(float(v) for v in self.window))
        re_min, re_max, im_min, im_max = self.window
        if self.width < 1 or self.height < 1:
            raise InvalidParams(f"grid {self.width}x{self.height} has no pixels")
        if not (re_min < re_max and im_min < im_max):
            raise InvalidParams(f"window {self.window} is empty")

    @property
    def pixel_size(self) -> Tuple[float, float]:
        re_min, re_max, im_min, im_max = self.window
        return (re_max - re_min) / self.width, (im_max - im_min) / self.height

    def sample_points(self, rows: range, offsets=((0.5, 0.5),)) -> np.ndarray:
        """Shape (len(rows), width, len(offsets)) sample points inside each pixel."""
        re_min, _, _, im_max = self.window
        dx, dy = self.pixel_size
        cols = np.arange(self.width)
        row_idx = np.asarray(list(rows))
        samples = [
            (re_min + (cols[None, :] + ox) * dx) + 1j * (im_max - (row_idx[:, None] + oy) * dy)
            for ox, oy in offsets
        ]
        return np.stack(samples, axis=-1)

    def pixel_centers(self) -> np.ndarray:
        """Centre of every pixel, shape (height, width)"""
        return self.sample_points(range(self.height))[..., 0]

    def pixel_of(self, z: complex) -> Optional[Tuple[int, int]]:
        """(row, col) of the pixel containing z, or None outside the window."""
        if not np.isfinite(z):
            return None
        re_min, re_max, im_min, im_max = self.window
        dx, dy = self.pixel_size
        col = int(np.floor((z.real - re_min) / dx))
        row = int(np.floor((im_max - z.imag) / dy))
        if 0 <= row < self.height and 0 <= col < self.width:
            return row, col
        return None


SUPERSAMPLE_OFFSETS = ((0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75))


@dataclass
class BasinGrid:
    spec: GridSpec
    cycles: CycleSet
    labels: np.ndarray
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.spec.width

    @property
    def height(self) -> int:
        return self.spec.height

    @property
    def window(self) -> Tuple[float, float, float, float]:
        return self.spec.window

    def end_name(self, label: int) -> str:
        return end_name(self.cycles, label)

    def counts(self) -> Dict[int, int]:
        """Pixels per label, -1 included"""
        values, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def end_name(cycles: CycleSet, label: int) -> str:
    """End name of a label, unclassified for -1"""
    if label == UNCLASSIFIED:
        return "unclassified"
    return cycles.end_names()[label]


# =============================================================================
# CLASSIFICATION
# =============================================================================

class _CycleTable:
    """Flattened finite cycle points that may capture orbits (indifferent cycles never do)."""

    def __init__(self, cycles: CycleSet):
        offsets = cycles.offsets
        values, labels_base, positions, periods, starts = [], [], [], [], []
        for index, cycle in enumerate(cycles.cycles):
            if cycle.is_infinity or cycle.kind is CycleClass.INDIFFERENT:
                continue
            start = len(values)
            for position, point in enumerate(cycle.points):
                values.append(point.value)
                labels_base.append(offsets[index])
                positions.append(position)
                periods.append(cycle.period)
                starts.append(start)
        self.values = np.array(values, dtype=complex)
        self.label_base = np.array(labels_base, dtype=np.int64)
        self.position = np.array(positions, dtype=np.int64)
        self.period = np.array(periods, dtype=np.int64)
        self.start = np.array(starts, dtype=np.int64)
        self.infinity_label = offsets[cycles.infinity_index]

    @property
    def size(self) -> int:
        return len(self.values)

    def advance(self, point: np.ndarray, steps: np.ndarray) -> np.ndarray:
        """Table index of the cycle point reached `steps` iterates after `point`."""
        return self.start[point] + (self.position[point] + steps) % self.period[point]

    def label_for(self, point: np.ndarray, capture_step: np.ndarray) -> np.ndarray:
        """Captured on c_j at step k: phase (j - k) mod period."""
        return self.label_base[point] + (self.position[point] - capture_step) % self.period[point]


def _advance(spec: ComplexMapSpec, z: np.ndarray, radius: float) -> np.ndarray:
    """One step of h; beyond the escape radius the step runs in w = 1/z, w -> w^d / q(w)."""
    with np.errstate(all="ignore"):
        near = np.abs(z) <= radius
        result = np.empty_like(z)
        result[near] = spec.evaluate(z[near])
        far = ~near
        if np.any(far):
            w = 1.0 / z[far]
            w_next = w ** spec.degree / np.polynomial.polynomial.polyval(w, spec.array[::-1])
            result[far] = np.where(w_next == 0, np.inf, 1.0 / w_next)
    return result


def _classify_samples(samples: np.ndarray, spec: ComplexMapSpec, table: _CycleTable, period: int,
                      params: ClassifyParams, delta: float, radius: float):
    """Labels and decision steps for a flat array of starting points."""
    count = samples.size
    z = samples.astype(complex).ravel().copy()
    labels = np.full(count, UNCLASSIFIED, dtype=np.int32)
    steps = np.full(count, -1, dtype=np.int32)
    active = np.ones(count, dtype=bool)
    candidate = np.full(count, -1, dtype=np.int64)
    capture_step = np.zeros(count, dtype=np.int64)
    streak = np.zeros(count, dtype=np.int64)
    escape = np.zeros(count, dtype=np.int64)
    confirm = params.confirm_steps(period)

    for k in range(params.max_iterations + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        with np.errstate(invalid="ignore"):
            far = ~(np.abs(z[idx]) <= radius)
        escape[idx] = np.where(far, escape[idx] + 1, 0)
        escaped = idx[escape[idx] >= confirm]
        labels[escaped] = table.infinity_label
        steps[escaped] = k
        active[escaped] = False
        candidate[escaped] = -1

        tracking = idx[(candidate[idx] >= 0) & active[idx]]
        if tracking.size:
            expected = table.advance(candidate[tracking], k - capture_step[tracking])
            close = chordal_distance(z[tracking], table.values[expected]) < delta
            streak[tracking] = np.where(close, streak[tracking] + 1, 0)
            candidate[tracking[~close]] = -1
            done = tracking[close & (streak[tracking] >= confirm)]
            labels[done] = table.label_for(candidate[done], capture_step[done])
            steps[done] = k
            active[done] = False

        free = idx[(candidate[idx] < 0) & active[idx] & ~far]
        if free.size and table.size:
            distances = chordal_distance(z[free][:, None], table.values[None, :])
            nearest = np.argmin(distances, axis=1)
            hit = distances[np.arange(free.size), nearest] < delta
            caught = free[hit]
            candidate[caught] = nearest[hit]
            capture_step[caught] = k
            streak[caught] = 0

        live = np.flatnonzero(active)
        if k < params.max_iterations and live.size:
            z[live] = _advance(spec, z[live], radius)
    return labels, steps


def _majority(labels: np.ndarray) -> np.ndarray:
    """Most frequent of the sub-sample labels per pixel; ties go to the earliest sub-sample."""
    votes = np.stack([(labels == labels[:, [i]]).sum(axis=1) for i in range(labels.shape[1])], axis=1)
    winner = np.argmax(votes, axis=1)
    return labels[np.arange(labels.shape[0]), winner]


def effective_capture_radius(cycles: CycleSet, params: ClassifyParams) -> float:
    """The configured radius, shrunk below half the smallest gap between cycle points."""
    gap = min_cycle_gap(cycles)
    if gap is not None and params.capture_radius >= gap / 2:
        shrunk = CAPTURE_SAFETY * gap
        logger.warning("capture radius %.3g shrunk to %.3g (cycle points %.3g apart)",
                       params.capture_radius, shrunk, gap)
        return shrunk
    return params.capture_radius


class Classifier:
    """Cycle table and radii shared by every sample of one run."""

    def __init__(self, cycles: CycleSet, params: ClassifyParams = ClassifyParams()):
        self.cycles = cycles
        self.params = params
        self.table = _CycleTable(cycles)
        self.delta = effective_capture_radius(cycles, params)
        self.radius = params.escape_radius or cycles.spec.escape_radius

    @classmethod
    def build(cls, spec: ComplexMapSpec, period: int, params: ClassifyParams = ClassifyParams(),
              cycles: Optional[CycleSet] = None) -> "Classifier":
        """Finds the cycles of period dividing `period` unless they are handed in."""
        if period > PERIOD_CAP:
            raise PeriodCapExceeded(period, PERIOD_CAP)
        if cycles is None:
            cycles = find_cycles(spec, period, tolerance=params.root_tolerance, dedup_tolerance=params.dedup_tolerance)
        return cls(cycles, params)

    def classify(self, samples: np.ndarray):
        """Labels and decision steps for the samples, flattened."""
        return _classify_samples(samples, self.cycles.spec, self.table, self.cycles.period,
                                 self.params, self.delta, self.radius)


def classify_point(z0: complex, cycles: CycleSet, params: ClassifyParams = ClassifyParams()) -> int:
    """Label of the end the orbit of z0 converges to, or -1."""
    labels, _ = Classifier(cycles, params).classify(np.array([z0], dtype=complex))
    return int(labels[0])


def _classify_rows(grid: GridSpec, rows: range, classifier: Classifier):
    """Labels and decision steps for a block of rows"""
    params = classifier.params
    offsets = SUPERSAMPLE_OFFSETS if params.supersample else ((0.5, 0.5),)
    labels, steps = classifier.classify(grid.sample_points(rows, offsets))
    labels = labels.reshape(-1, len(offsets))
    steps = steps.reshape(-1, len(offsets))
    if params.supersample:
        labels = _majority(labels)
        steps = steps.max(axis=1)
    else:
        labels = labels[:, 0]
        steps = steps[:, 0]
    logger.debug("classified rows %d..%d", rows.start, rows.stop - 1)
    return labels.reshape(len(rows), grid.width), steps.reshape(len(rows), grid.width)


def row_chunks(height: int) -> List[range]:
    """Row ranges of ROW_CHUNK rows covering the height"""
    return [range(r, min(r + ROW_CHUNK, height)) for r in range(0, height, ROW_CHUNK)]


def map_chunks(work, chunks, workers: int) -> list:
    """Run `work` over the row chunks, on a thread pool when more than one worker is asked for."""
    if workers == 1 or len(chunks) == 1:
        return [work(rows) for rows in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, chunks))


def compute_basins(spec: ComplexMapSpec, grid: GridSpec, period: int,
                   params: ClassifyParams = ClassifyParams(), cycles: Optional[CycleSet] = None) -> BasinGrid:
    """Classify every pixel under epsilon(X, P_period); row chunks run on a thread pool."""
    classifier = Classifier.build(spec, period, params, cycles)
    chunks = row_chunks(grid.height)
    logger.info("classifying %dx%d grid in %d chunks on %d workers", grid.width, grid.height, len(chunks), params.workers)
    results = map_chunks(lambda rows: _classify_rows(grid, rows, classifier), chunks, params.workers)
    labels = np.concatenate([r[0] for r in results], axis=0).astype(np.int32)
    steps = np.concatenate([r[1] for r in results], axis=0)
    result = BasinGrid(grid, classifier.cycles, labels)
    result.stats = basin_stats(result, steps, params, classifier.delta, classifier.radius)
    logger.info("classified %d pixels, %d undecided", labels.size, result.stats["undecided"]["pixels"])
    return result


def basin_stats(grid: BasinGrid, steps: Optional[np.ndarray], params: ClassifyParams,
                delta: float, radius: float) -> Dict[str, Any]:
    """Per-end pixel counts, the undecided share, parameters and the decision-time histogram."""
    counts = grid.counts()
    total = int(grid.labels.size)
    undecided = counts.get(UNCLASSIFIED, 0)
    stats = {
        "width": grid.width,
        "height": grid.height,
        "window": list(grid.window),
        "period": grid.cycles.period,
        "cycles": grid.cycles.to_json(),
        "ends": end_rows(grid.cycles, counts),
        "undecided": {"pixels": undecided, "fraction": undecided / total if total else 0.0},
        "params": params.echo(),
        "capture_radius_used": delta,
        "escape_radius_used": radius,
    }
    if steps is not None:
        stats["iteration_histogram"] = iteration_histogram(steps, params)
    return stats


def end_rows(cycles: CycleSet, counts: Dict[int, int]) -> List[Dict[str, Any]]:
    """One stats row per end: label, name, cycle, phase and pixel count"""
    rows = []
    for label, name in enumerate(cycles.end_names()):
        cycle_index, phase = cycles.end_of(label)
        rows.append({"label": label, "end": name, "cycle": cycle_index, "phase": phase,
                     "pixels": counts.get(label, 0)})
    return rows


def iteration_histogram(steps: np.ndarray, params: ClassifyParams) -> Dict[str, list]:
    """Histogram of the step at which decided samples were labelled."""
    decided = steps[steps >= 0]
    hist, edges = np.histogram(decided, bins=HISTOGRAM_BINS, range=(0, params.max_iterations))
    return {"counts": hist.tolist(), "edges": edges.tolist()}


# =============================================================================
# GRID FILES
# =============================================================================

def save_grid(grid: BasinGrid, path) -> None:
    """One JSON header line, then the labels as raw little-endian int32, row-major."""
    header = json.dumps(grid.stats or {"width": grid.width, "height": grid.height,
                                       "window": list(grid.window), "period": grid.cycles.period,
                                       "cycles": grid.cycles.to_json()}, sort_keys=True)
    with open(path, "wb") as handle:
        handle.write(header.encode("utf-8") + b"\n")
        handle.write(grid.labels.astype("<i4").tobytes())


def load_grid(path) -> BasinGrid:
    """Read a grid file written by save_grid"""
    with open(path, "rb") as handle:
        header_line = handle.readline()
        payload = handle.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
        spec = GridSpec(int(header["width"]), int(header["height"]), tuple(header["window"]))
        cycles = CycleSet.from_json(header["cycles"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: unreadable grid header ({exc})")
    expected = spec.width * spec.height * 4
    if len(payload) != expected:
        raise GridMismatch(f"{path}: {len(payload)} label bytes, expected {expected}")
    labels = np.frombuffer(payload, dtype="<i4").astype(np.int32).reshape(spec.height, spec.width)
    return BasinGrid(spec, cycles, labels, header)


# =============================================================================
# REFINEMENT AND IMMEDIATE BASINS
# =============================================================================

def _names_of(grid: BasinGrid, labels: np.ndarray) -> np.ndarray:
    # label -1 picks the trailing "unclassified" entry
    names = np.array(grid.cycles.end_names() + ["unclassified"], dtype=object)
    return names[labels]


def refinement_check(coarse: BasinGrid, fine: BasinGrid) -> Dict[str, Any]:
    """Pixels decided under the coarser externology but undecided under the finer one."""
    if coarse.labels.shape != fine.labels.shape or tuple(coarse.window) != tuple(fine.window):
        raise GridMismatch(
            f"grids differ: {coarse.labels.shape} over {coarse.window} against {fine.labels.shape} over {fine.window}"
        )
    total = int(coarse.labels.size)
    if total == 0:
        return {"pixels": 0, "violations": 0, "violation_fraction": 0.0, "table": {}}
    a = coarse.labels.ravel()
    b = fine.labels.ravel()
    violations = int(np.count_nonzero((a != UNCLASSIFIED) & (b == UNCLASSIFIED)))
    frame = pd.DataFrame({"coarse": _names_of(coarse, a), "fine": _names_of(fine, b)})
    table = pd.crosstab(frame["coarse"], frame["fine"])
    refinement = {
        str(row): {str(col): int(count) for col, count in values.items() if count}
        for row, values in table.sort_index().iterrows()
    }
    previously_undecided = int(np.count_nonzero(a == UNCLASSIFIED))
    newly_decided = int(np.count_nonzero((a == UNCLASSIFIED) & (b != UNCLASSIFIED)))
    logger.info("refinement: %d violations out of %d pixels", violations, total)
    return {
        "pixels": total,
        "violations": violations,
        "violation_fraction": violations / total,
        "coarse_undecided": previously_undecided,
        "newly_decided": newly_decided,
        "newly_decided_fraction": newly_decided / previously_undecided if previously_undecided else 0.0,
        "table": refinement,
    }


def _flood(mask: np.ndarray, seeds: List[Tuple[int, int]]) -> np.ndarray:
    """4-connected flood fill of mask from the seeds"""
    filled = np.zeros_like(mask, dtype=bool)
    queue = deque(seeds)
    for row, col in seeds:
        filled[row, col] = True
    height, width = mask.shape
    while queue:
        row, col = queue.popleft()
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            r, c = row + dr, col + dc
            if 0 <= r < height and 0 <= c < width and mask[r, c] and not filled[r, c]:
                filled[r, c] = True
                queue.append((r, c))
    return filled


def immediate_basin_grid(grid: BasinGrid, label: int) -> np.ndarray:
    """Pixels of the end's basin 4-connected to the pixel holding the end's cycle point.

    A repelling cycle point usually sits on a pixel that classifies elsewhere; the mask is then empty.
    """
    cycle_index, phase = grid.cycles.end_of(label)
    cycle = grid.cycles.cycles[cycle_index]
    point = cycle.points[phase]
    pixel = None if point.is_infinity else grid.spec.pixel_of(point.value)
    if pixel is None:
        raise CyclePixelOutsideWindow(f"cycle point {point} of end {grid.end_name(label)} is outside the window")
    mask = grid.labels == label
    if not mask[pixel]:
        logger.warning("the pixel holding %s is labelled %s; immediate basin of %s is empty",
                       point, grid.end_name(int(grid.labels[pixel])), grid.end_name(label))
        return np.zeros_like(mask)
    return _flood(mask, [pixel])
