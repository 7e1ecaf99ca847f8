"""
Periodic cycles of polynomial maps.
Roots of h^n(z) - z come from Durand-Kerner simultaneous iteration on the expanded
polynomial, are polished with Newton steps on the iterated map, then grouped into orbits of
exact period. Infinity is appended as a superattracting fixed point.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from config import (
    DEDUP_TOLERANCE,
    DEGREE_CAP,
    MULTIPLIER_TOLERANCE,
    NEWTON_POLISH_STEPS,
    ROOT_MAX_RESTARTS,
    ROOT_MAX_SWEEPS,
    ROOT_SEED,
    ROOT_TOLERANCE,
)
from core.complex_map import (
    ComplexMapSpec,
    SpherePoint,
    chordal_distance,
    fixed_point_polynomial,
    orbit_derivative,
)
from core.errors import InvalidMapSpec, RootConvergenceFailure

logger = logging.getLogger(__name__)


class CycleClass(Enum):
    SUPERATTRACTING = "superattracting"
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    INDIFFERENT = "indifferent"

    @property
    def has_basin(self) -> bool:
        return self in (CycleClass.SUPERATTRACTING, CycleClass.ATTRACTING)


def classify_cycle(multiplier: complex, tolerance: float = MULTIPLIER_TOLERANCE) -> CycleClass:
    """Superattracting, attracting, repelling or indifferent from |multiplier|"""
    magnitude = abs(multiplier)
    if magnitude < tolerance:
        return CycleClass.SUPERATTRACTING
    if magnitude < 1 - tolerance:
        return CycleClass.ATTRACTING
    if magnitude > 1 + tolerance:
        return CycleClass.REPELLING
    return CycleClass.INDIFFERENT


@dataclass(frozen=True)
class Cycle:
    """c_0 -> c_1 -> ... -> c_(n-1) -> c_0 under h, starting from the smallest (re, im)."""

    points: Tuple[SpherePoint, ...]
    multiplier: complex
    kind: CycleClass
    residual: float = 0.0

    @property
    def period(self) -> int:
        return len(self.points)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points], dtype=complex)

    @property
    def is_infinity(self) -> bool:
        return self.points[0].is_infinity

    def to_json(self) -> Dict:
        """Points, period, multiplier, class and residual"""
        return {
            "points": [p.to_json() for p in self.points],
            "period": self.period,
            "multiplier": [float(self.multiplier.real), float(self.multiplier.imag)],
            "class": self.kind.value,
            "residual": float(self.residual),
        }

    @classmethod
    def from_json(cls, data: Dict) -> "Cycle":
        points = tuple(
            SpherePoint.infinity() if p == "inf" else SpherePoint(complex(p[0], p[1])) for p in data["points"]
        )
        multiplier = complex(*data["multiplier"])
        return cls(points, multiplier, CycleClass(data["class"]), float(data.get("residual", 0.0)))


INFINITY_CYCLE = Cycle((SpherePoint.infinity(),), 0j, CycleClass.SUPERATTRACTING)


def end_name(cycle: Cycle, phase: int) -> str:
    """An end is named by the cycle point its orbit sits on at times divisible by the period."""
    return str(cycle.points[phase])


@dataclass(frozen=True)
class CycleSet:
    """All cycles whose period divides n: the points of P_n, grouped. Infinity comes last."""

    spec: ComplexMapSpec
    period: int
    cycles: Tuple[Cycle, ...]

    @property
    def offsets(self) -> List[int]:
        """Label of (cycle i, phase j) is offsets[i] + j."""
        offsets, total = [], 0
        for cycle in self.cycles:
            offsets.append(total)
            total += cycle.period
        return offsets

    @property
    def label_count(self) -> int:
        """Number of ends, one per cycle point"""
        return sum(c.period for c in self.cycles)

    @property
    def infinity_index(self) -> int:
        return len(self.cycles) - 1

    def label(self, cycle_index: int, phase: int) -> int:
        return self.offsets[cycle_index] + phase

    def end_of(self, label: int) -> Tuple[int, int]:
        """(cycle index, phase) of a label"""
        for index, offset in enumerate(self.offsets):
            if offset <= label < offset + self.cycles[index].period:
                return index, label - offset
        raise KeyError(label)

    def end_names(self) -> List[str]:
        """End names in label order"""
        return [end_name(cycle, phase) for cycle in self.cycles for phase in range(cycle.period)]

    def resolve_end(self, text: str) -> int:
        """Label from an integer, an end name, or a complex literal near a cycle point."""
        text = text.strip()
        if text.isdigit():
            label = int(text)
            if not 0 <= label < self.label_count:
                raise InvalidMapSpec(f"label {label} outside 0..{self.label_count - 1}")
            return label
        names = self.end_names()
        if text in names:
            return names.index(text)
        try:
            target = complex(text.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise InvalidMapSpec(f"no end named {text!r}")
        for label, cycle_point in enumerate(p for c in self.cycles for p in c.points):
            if chordal_distance(cycle_point.value, target) < DEDUP_TOLERANCE:
                return label
        raise InvalidMapSpec(f"{text!r} is not a point of any cycle")

    def periodic_points(self) -> List[SpherePoint]:
        return [p for c in self.cycles for p in c.points]

    def to_json(self) -> Dict:
        return {
            "map": [[float(c.real), float(c.imag)] for c in self.spec.coefficients],
            "period": self.period,
            "cycles": [c.to_json() for c in self.cycles],
            "point_count": self.label_count,
        }

    @classmethod
    def from_json(cls, data: Dict) -> "CycleSet":
        spec = ComplexMapSpec(tuple(complex(re, im) for re, im in data["map"]))
        return cls(spec, int(data["period"]), tuple(Cycle.from_json(c) for c in data["cycles"]))


# =============================================================================
# ROOT FINDING
# =============================================================================

def _pairwise_products(roots: np.ndarray, block: int = 256) -> np.ndarray:
    """prod_{j != k} (z_k - z_j), in row blocks so memory stays bounded."""
    products = np.empty_like(roots)
    for start in range(0, len(roots), block):
        chunk = roots[start:start + block]
        diff = chunk[:, None] - roots[None, :]
        rows = np.arange(len(chunk))
        diff[rows, start + rows] = 1
        products[start:start + block] = np.prod(diff, axis=1)
    return products


def _weierstrass_sweeps(monic: np.ndarray, roots: np.ndarray, tolerance: float, max_sweeps: int):
    """Simultaneous Durand-Kerner updates on the monic polynomial"""
    for sweep in range(max_sweeps):
        with np.errstate(all="ignore"):
            delta = P.polyval(roots, monic) / _pairwise_products(roots)
        if not np.all(np.isfinite(delta)):
            logger.debug("Durand-Kerner stalled at sweep %d", sweep)
            return False, roots
        roots = roots - delta
        if np.max(np.abs(delta) / (1 + np.abs(roots))) < tolerance:
            logger.debug("Durand-Kerner converged after %d sweeps", sweep + 1)
            return True, roots
    return False, roots


def durand_kerner(coefficients, tolerance: float = ROOT_TOLERANCE, max_sweeps: int = ROOT_MAX_SWEEPS,
                  max_restarts: int = ROOT_MAX_RESTARTS, seed: int = ROOT_SEED) -> np.ndarray:
    """All roots of sum a_k z^k by simultaneous Weierstrass corrections.

    Starts on a circle of Cauchy radius with an angular offset; a stall restarts from the
    last iterate with a seeded random perturbation.
    """
    coefficients = np.trim_zeros(np.asarray(coefficients, dtype=complex), "b")
    degree = len(coefficients) - 1
    if degree < 1:
        return np.empty(0, dtype=complex)
    monic = coefficients / coefficients[-1]
    if degree == 1:
        return np.array([-monic[0]])
    radius = 1 + np.max(np.abs(monic[:-1]))
    roots = radius * np.exp(1j * (2 * np.pi * np.arange(degree) / degree + 0.4))
    rng = np.random.default_rng(seed)
    for attempt in range(max_restarts + 1):
        converged, roots = _weierstrass_sweeps(monic, roots, tolerance, max_sweeps)
        if converged:
            return roots
        logger.debug("restarting Durand-Kerner (attempt %d)", attempt + 1)
        finite = np.where(np.isfinite(roots), roots, 0)
        jitter = rng.normal(scale=radius * 1e-3, size=(degree, 2))
        roots = finite + jitter[:, 0] + 1j * jitter[:, 1]
    logger.warning("Durand-Kerner did not settle after %d restarts; relying on Newton polishing", max_restarts)
    return roots


def _polish(spec: ComplexMapSpec, roots: np.ndarray, n: int, steps: int = NEWTON_POLISH_STEPS) -> np.ndarray:
    """Newton on g(z) = h^n(z) - z, evaluated along the orbit rather than through the expansion."""
    for _ in range(steps):
        with np.errstate(all="ignore"):
            value, slope = orbit_derivative(spec, roots, n)
            step = (value - roots) / (slope - 1)
        usable = np.isfinite(step)
        roots = np.where(usable, roots - step, roots)
    return roots


def residuals(spec: ComplexMapSpec, points: np.ndarray, n: int) -> np.ndarray:
    """|h^n(z) - z| for each point"""
    value, _ = orbit_derivative(spec, points, n)
    return np.abs(value - points)


def _dedup(roots: np.ndarray, tolerance: float) -> np.ndarray:
    """Drop roots closer than tolerance to one already kept"""
    order = np.lexsort((roots.imag, roots.real))
    kept: List[complex] = []
    for z in roots[order]:
        if not kept or np.min(np.abs(np.array(kept) - z)) >= tolerance:
            kept.append(z)
    return np.array(kept, dtype=complex)


def _lexicographic_start(points: List[complex]) -> int:
    return min(range(len(points)), key=lambda i: (points[i].real, points[i].imag))


def _group_orbits(spec: ComplexMapSpec, roots: np.ndarray, n: int, tolerance: float) -> List[List[complex]]:
    """Split the roots of h^n(z) = z into orbits under h"""
    assigned = np.zeros(len(roots), dtype=bool)
    orbits = []
    for start in range(len(roots)):
        if assigned[start]:
            continue
        orbit = [start]
        z = roots[start]
        for _ in range(n):
            z = spec.evaluate(z)
            nearest = int(np.argmin(np.abs(roots - z)))
            if abs(roots[nearest] - z) >= tolerance * (1 + abs(z)):
                logger.debug("image of root %d strays from the root set", start)
                break
            if nearest == start:
                break
            orbit.append(nearest)
        assigned[orbit] = True
        orbits.append([roots[i] for i in orbit])
    return orbits


def find_cycles(spec: ComplexMapSpec, n: int, tolerance: float = ROOT_TOLERANCE,
                dedup_tolerance: float = DEDUP_TOLERANCE, degree_cap: int = DEGREE_CAP,
                seed: int = ROOT_SEED) -> CycleSet:
    """Every cycle whose exact period divides n, with multipliers; infinity appended last."""
    if n < 1:
        raise InvalidMapSpec(f"period must be at least 1, got {n}")
    polynomial = fixed_point_polynomial(spec, n, degree_cap)
    roots = durand_kerner(polynomial, tolerance=tolerance, seed=seed)
    roots = _polish(spec, roots, n)
    errors = residuals(spec, roots, n)
    worst = int(np.argmax(errors)) if len(errors) else 0
    if len(errors) and not errors[worst] < tolerance:
        raise RootConvergenceFailure(worst, float(errors[worst]))

    roots = _dedup(roots, dedup_tolerance)
    cycles = []
    for orbit in _group_orbits(spec, roots, n, dedup_tolerance):
        if n % len(orbit):
            logger.warning("discarding orbit of length %d, which does not divide %d", len(orbit), n)
            continue
        start = _lexicographic_start(orbit)
        ordered = orbit[start:] + orbit[:start]
        multiplier = complex(np.prod(spec.derivative(np.array(ordered))))
        cycles.append(Cycle(
            points=tuple(SpherePoint(complex(z)) for z in ordered),
            multiplier=multiplier,
            kind=classify_cycle(multiplier),
            residual=float(np.max(residuals(spec, np.array(ordered), n))),
        ))
    cycles.sort(key=lambda c: (c.period, c.values[0].real, c.values[0].imag))
    cycles.append(INFINITY_CYCLE)
    logger.info(
        "found %d cycles of period dividing %d (%d periodic points with infinity)",
        len(cycles), n, sum(c.period for c in cycles),
    )
    return CycleSet(spec, n, tuple(cycles))


def min_cycle_gap(cycles: CycleSet) -> Optional[float]:
    """Smallest chordal distance between distinct periodic points, or None with a single point."""
    points = np.array([p.value for p in cycles.periodic_points()], dtype=complex)
    if len(points) < 2:
        return None
    gaps = chordal_distance(points[:, None], points[None, :])
    gaps = np.where(np.eye(len(points), dtype=bool), np.inf, gaps)
    return float(np.min(gaps))
