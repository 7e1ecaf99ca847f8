"""
Basins drawn on the Riemann sphere.
The unit sphere is seen from outside under orthographic projection, with infinity at the north
pole. Each visible point goes back to the plane by inverse stereographic projection; the northern
half is taken through the chart w = 1/z so the neighbourhood of infinity keeps its precision.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config import SPHERE_SIZE, SPHERE_TILT
from core.basin_grid import (
    UNCLASSIFIED,
    Classifier,
    ClassifyParams,
    end_rows,
    iteration_histogram,
    map_chunks,
    row_chunks,
)
from core.complex_map import INFINITY, ComplexMapSpec
from core.cycle_finder import CycleSet
from core.errors import InvalidParams

logger = logging.getLogger(__name__)


def sphere_to_plane(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Inverse stereographic projection from the north pole (0, 0, 1), which goes to infinity."""
    with np.errstate(divide="ignore", invalid="ignore"):
        south = (x + 1j * y) / (1.0 - z)
        w = (x - 1j * y) / (1.0 + z)
        north = np.where(w == 0, INFINITY, 1.0 / w)
    return np.where(z > 0, north, south)


@dataclass(frozen=True)
class SphereView:
    """A square picture `size` pixels across; at tilt 0 the north pole faces the viewer."""

    size: int = SPHERE_SIZE
    tilt: float = SPHERE_TILT

    def __post_init__(self):
        object.__setattr__(self, "tilt", float(self.tilt))
        if self.size < 1:
            raise InvalidParams(f"sphere view of size {self.size} has no pixels")
        if not 0.0 <= self.tilt <= 180.0:
            raise InvalidParams(f"tilt {self.tilt} is outside 0..180 degrees")

    def disk(self, rows: range) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Screen coordinates (x, y) of the pixel centres, the depth towards the viewer and the disk mask."""
        centers = (np.arange(self.size) + 0.5) * 2.0 / self.size - 1.0
        x = np.broadcast_to(centers[None, :], (len(rows), self.size))
        y = np.broadcast_to(-centers[list(rows)][:, None], (len(rows), self.size))
        r2 = x * x + y * y
        visible = r2 <= 1.0
        depth = np.sqrt(np.clip(1.0 - r2, 0.0, None))
        return x, y, depth, visible

    def sample_points(self, rows: range) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Plane points behind the pixels of the rows, with depth and visibility."""
        x, y, depth, visible = self.disk(rows)
        angle = np.radians(self.tilt)
        sphere_y = y * np.cos(angle) - depth * np.sin(angle)
        sphere_z = y * np.sin(angle) + depth * np.cos(angle)
        return sphere_to_plane(x, sphere_y, sphere_z), depth, visible

    def pole_pixel(self) -> Optional[Tuple[int, int]]:
        """(row, col) of the pixel holding infinity, or None when the pole faces away."""
        if self.tilt > 90.0:
            return None
        height = np.sin(np.radians(self.tilt))
        row = int(np.floor((1.0 - height) * self.size / 2.0))
        return min(row, self.size - 1), self.size // 2


@dataclass
class SphereBasins:
    view: SphereView
    cycles: CycleSet
    labels: np.ndarray
    depth: np.ndarray
    visible: np.ndarray
    stats: Dict[str, Any] = field(default_factory=dict)


def _classify_sphere_rows(view: SphereView, rows: range, classifier: Classifier):
    """Visible pixels only; the rest stay unclassified"""
    points, depth, visible = view.sample_points(rows)
    labels = np.full(points.shape, UNCLASSIFIED, dtype=np.int32)
    steps = np.full(points.shape, -1, dtype=np.int32)
    if visible.any():
        found, found_steps = classifier.classify(points[visible])
        labels[visible] = found
        steps[visible] = found_steps
    return labels, steps, depth, visible


def compute_sphere_basins(spec: ComplexMapSpec, view: SphereView, period: int,
                          params: ClassifyParams = ClassifyParams(),
                          cycles: Optional[CycleSet] = None) -> SphereBasins:
    """Classify the visible sphere points under epsilon(X, P_period); pixels off the disk stay -1."""
    classifier = Classifier.build(spec, period, params, cycles)
    if params.supersample:
        logger.warning("supersampling applies to flat windows only; the sphere uses pixel centres")
    chunks = row_chunks(view.size)
    logger.info("classifying %dx%d sphere view (tilt %g) on %d workers", view.size, view.size, view.tilt, params.workers)
    results = map_chunks(lambda rows: _classify_sphere_rows(view, rows, classifier), chunks, params.workers)
    labels, steps, depth, visible = (np.concatenate([r[i] for r in results], axis=0) for i in range(4))
    result = SphereBasins(view, classifier.cycles, labels.astype(np.int32), depth, visible)
    result.stats = sphere_stats(result, steps, params, classifier.delta, classifier.radius)
    logger.info("classified %d sphere pixels, %d undecided", int(visible.sum()), result.stats["undecided"]["pixels"])
    return result


def sphere_stats(sphere: SphereBasins, steps: np.ndarray, params: ClassifyParams,
                 delta: float, radius: float) -> Dict[str, Any]:
    """Counts over the visible disk only."""
    values, counts = np.unique(sphere.labels[sphere.visible], return_counts=True)
    counts = {int(v): int(c) for v, c in zip(values, counts)}
    total = int(sphere.visible.sum())
    undecided = counts.get(UNCLASSIFIED, 0)
    return {
        "view": "sphere",
        "size": sphere.view.size,
        "tilt": sphere.view.tilt,
        "visible_pixels": total,
        "period": sphere.cycles.period,
        "cycles": sphere.cycles.to_json(),
        "ends": end_rows(sphere.cycles, counts),
        "undecided": {"pixels": undecided, "fraction": undecided / total if total else 0.0},
        "params": params.echo(),
        "capture_radius_used": delta,
        "escape_radius_used": radius,
        "iteration_histogram": iteration_histogram(steps[sphere.visible], params),
    }
