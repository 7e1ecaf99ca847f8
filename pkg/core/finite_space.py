"""
Finite discrete semi-flows on finite topological spaces.
A flow is a functional graph (map[i] = image of i); a topology is given by minimal open
neighbourhoods. Everything here is exact set arithmetic on frozensets of point indices.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config import FINITE_SIZE_CAP
from core.errors import InvalidFlow, InvalidTopology, NotContinuous, SizeCapExceeded, SizeMismatch

logger = logging.getLogger(__name__)

PointSet = FrozenSet[int]
EMPTY: PointSet = frozenset()


@dataclass(frozen=True)
class FiniteSemiFlow:
    """The semi-flow generated by phi^1 = map on the points 0..size-1."""

    size: int
    map: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'map', tuple(int(v) for v in self.map))
        if self.size < 0 or len(self.map) != self.size:
            raise InvalidFlow(f"map has {len(self.map)} entries for {self.size} points")
        for i, image in enumerate(self.map):
            if not 0 <= image < self.size:
                raise InvalidFlow(f"map[{i}] = {image} is outside 0..{self.size - 1}")

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "FiniteSemiFlow":
        """Flow whose map is the given list of images"""
        return cls(len(values), tuple(values))

    @property
    def points(self) -> PointSet:
        return frozenset(range(self.size))

    def image(self, points) -> PointSet:
        """phi^1 applied to a set of points"""
        return frozenset(self.map[p] for p in points)

    def preimage(self, points) -> PointSet:
        """Points sent into the given set"""
        points = frozenset(points)
        return frozenset(i for i in range(self.size) if self.map[i] in points)

    def iterate(self, x: int, n: int) -> int:
        """phi^n(x), shortcutting through the terminal cycle for large n."""
        preperiod, cycle = self.trajectory(x)
        if n < preperiod:
            for _ in range(n):
                x = self.map[x]
            return x
        return cycle[(n - preperiod) % len(cycle)]

    @cached_property
    def _trajectories(self):
        decomposition = {}
        for start in range(self.size):
            seen = {}
            path = []
            x = start
            while x not in seen:
                seen[x] = len(path)
                path.append(x)
                x = self.map[x]
            preperiod = seen[x]
            decomposition[start] = (preperiod, tuple(path[preperiod:]))
        return decomposition

    def trajectory(self, x: int) -> Tuple[int, Tuple[int, ...]]:
        """(preperiod, cycle): phi^m(x) lies on the cycle exactly when m >= preperiod.

        The cycle is listed from phi^preperiod(x) onwards, so cycle[k] = phi^(preperiod+k)(x).
        """
        return self._trajectories[x]

    def terminal_cycle(self, x: int) -> Tuple[int, ...]:
        """The cycle reached from x, ordered from its smallest index."""
        return canonical_cycle(self.trajectory(x)[1])

    def cycles(self) -> List[Tuple[int, ...]]:
        """Terminal cycles of the functional graph, each from its smallest point"""
        found = {self.terminal_cycle(x) for x in range(self.size)}
        return sorted(found)

    def big_orbits(self) -> List[PointSet]:
        """Classes of x ~ y iff phi^k(x) = phi^l(y) for some k, l (weak components)."""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.size))
        graph.add_edges_from((i, self.map[i]) for i in range(self.size))
        return sorted((frozenset(c) for c in nx.weakly_connected_components(graph)), key=min)


def canonical_cycle(cycle: Sequence[int]) -> Tuple[int, ...]:
    """Rotate a cycle so it starts at its smallest point, keeping the map order."""
    start = cycle.index(min(cycle))
    return tuple(cycle[start:]) + tuple(cycle[:start])


@dataclass(frozen=True)
class FiniteTopology:
    """A finite topology through its minimal open neighbourhoods.

    Specialization: x lies in closure({y}) iff y is in min_open[x].
    """

    size: int
    min_open: Tuple[PointSet, ...]

    def __post_init__(self):
        object.__setattr__(self, 'min_open', tuple(frozenset(u) for u in self.min_open))
        if len(self.min_open) != self.size:
            raise InvalidTopology(f"{len(self.min_open)} neighbourhoods for {self.size} points")
        for i, neighbourhood in enumerate(self.min_open):
            if i not in neighbourhood:
                raise InvalidTopology(f"point {i} is missing from its own min_open")
            for j in neighbourhood:
                if not 0 <= j < self.size:
                    raise InvalidTopology(f"min_open[{i}] mentions unknown point {j}")
                if not self.min_open[j] <= neighbourhood:
                    raise InvalidTopology(f"min_open[{j}] is not inside min_open[{i}]")

    @classmethod
    def discrete(cls, size: int) -> "FiniteTopology":
        """Every singleton open"""
        return cls(size, tuple(frozenset([i]) for i in range(size)))

    @classmethod
    def from_preorder(cls, below: np.ndarray) -> "FiniteTopology":
        """below[x, y] True means x is in closure({y}); must be reflexive and transitive."""
        size = below.shape[0]
        return cls(size, tuple(frozenset(np.flatnonzero(below[x]).tolist()) for x in range(size)))

    @property
    def points(self) -> PointSet:
        return frozenset(range(self.size))

    @cached_property
    def is_discrete(self) -> bool:
        return all(len(u) == 1 for u in self.min_open)

    @property
    def is_t1(self) -> bool:
        # the only T1 topology on a finite set is the discrete one
        return self.is_discrete

    @cached_property
    def is_regular(self) -> bool:
        """Regular iff every minimal neighbourhood is also closed, i.e. the preorder is symmetric."""
        return all(x in self.min_open[y] for x in range(self.size) for y in self.min_open[x])

    @property
    def is_locally_compact(self) -> bool:
        return True

    def open_hull(self, points) -> PointSet:
        """Smallest open set containing the points."""
        hull = set()
        for p in points:
            hull |= self.min_open[p]
        return frozenset(hull)

    def is_open(self, points) -> bool:
        """Open iff it contains the minimal neighbourhood of each of its points"""
        points = frozenset(points)
        return all(self.min_open[p] <= points for p in points)

    def closure(self, points) -> PointSet:
        """Points whose minimal neighbourhood meets the set"""
        points = frozenset(points)
        return frozenset(x for x in range(self.size) if self.min_open[x] & points)

    def interior(self, points) -> PointSet:
        """Points whose minimal neighbourhood lies inside the set"""
        points = frozenset(points)
        return frozenset(x for x in points if self.min_open[x] <= points)


class Diagnostics(NamedTuple):
    size: int
    discrete: bool
    regular: bool
    cycle_count: int


def continuity_violation(flow: FiniteSemiFlow, topo: FiniteTopology) -> Optional[Tuple[int, int]]:
    """First pair (x, y) with x in min_open[y] but map[x] outside min_open[map[y]]."""
    for y in range(topo.size):
        target = topo.min_open[flow.map[y]]
        for x in sorted(topo.min_open[y]):
            if flow.map[x] not in target:
                return x, y
    return None


def validate(flow: FiniteSemiFlow, topo: FiniteTopology) -> Diagnostics:
    """Check sizes and continuity; raises SizeMismatch or NotContinuous"""
    if flow.size != topo.size:
        raise SizeMismatch(flow.size, topo.size)
    violation = continuity_violation(flow, topo)
    if violation is not None:
        raise NotContinuous(*violation)
    return Diagnostics(flow.size, topo.is_discrete, topo.is_regular, len(flow.cycles()))


# =============================================================================
# PERIODIC POINTS
# =============================================================================

def periodic_points(flow: FiniteSemiFlow) -> PointSet:
    """P(X): the points lying on cycles of the functional graph."""
    return frozenset(p for cycle in flow.cycles() for p in cycle)


def m_periodic(flow: FiniteSemiFlow, m: int) -> PointSet:
    """P_m(X) = {x : phi^m(x) = x}."""
    return frozenset(x for x in range(flow.size) if flow.iterate(x, m) == x)


def m_cycles(flow: FiniteSemiFlow, m: int) -> PointSet:
    """C_m(X): points of exact period m."""
    return frozenset(p for cycle in flow.cycles() if len(cycle) == m for p in cycle)


def fixed_points(flow: FiniteSemiFlow) -> PointSet:
    return m_periodic(flow, 1)


# =============================================================================
# OMEGA-LIMITS AND REGIONS OF ATTRACTION
# =============================================================================

def omega_limit(flow: FiniteSemiFlow, topo: FiniteTopology, x: int) -> PointSet:
    """Lambda(x): the tails [n, oo).x stop shrinking at the terminal cycle, so this is its closure."""
    return topo.closure(flow.trajectory(x)[1])


def omega_limit_of_set(flow: FiniteSemiFlow, topo: FiniteTopology, points) -> PointSet:
    """Union of the omega-limits of the points"""
    result = set()
    for x in points:
        result |= omega_limit(flow, topo, x)
    return frozenset(result)


def poisson_points(flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """Points lying in their own omega-limit"""
    return frozenset(x for x in range(flow.size) if x in omega_limit(flow, topo, x))


def lagrange_stable(flow: FiniteSemiFlow, topo: FiniteTopology, x: int) -> bool:
    """Whether the forward orbit of x has compact closure."""
    if not 0 <= x < flow.size:
        raise InvalidFlow(f"point {x} is outside 0..{flow.size - 1}")
    # every subset of a finite space is compact
    return True


class Regions(NamedTuple):
    pseudo_attraction: PointSet
    weak_attraction: PointSet
    attraction: PointSet


def regions(flow: FiniteSemiFlow, topo: FiniteTopology, target) -> Regions:
    """PA(S), WA(S) and A(S) for an arbitrary subset S."""
    target = frozenset(target)
    pa, wa, a = set(), set(), set()
    for x in range(flow.size):
        limit = omega_limit(flow, topo, x)
        if limit <= target:
            pa.add(x)
            if limit:
                a.add(x)
        if limit & target:
            wa.add(x)
    return Regions(frozenset(pa), frozenset(wa), frozenset(a))


# =============================================================================
# INVARIANCE
# =============================================================================

def is_right_invariant(flow: FiniteSemiFlow, points) -> bool:
    """phi^1 maps the set into itself"""
    points = frozenset(points)
    return flow.image(points) <= points


def is_left_invariant(flow: FiniteSemiFlow, points) -> bool:
    """The preimage of the set stays inside it"""
    points = frozenset(points)
    return flow.preimage(points) <= points


def is_completely_invariant(flow: FiniteSemiFlow, points) -> bool:
    return is_right_invariant(flow, points) and is_left_invariant(flow, points)


# =============================================================================
# OPEN SETS AND PATH COMPONENTS
# =============================================================================

def enumerate_opens(topo: FiniteTopology, cap: int = FINITE_SIZE_CAP) -> List[PointSet]:
    """All open sets (unions of minimal neighbourhoods), smallest first."""
    if topo.size > cap:
        raise SizeCapExceeded(topo.size, cap)
    opens = {EMPTY}
    for neighbourhood in set(topo.min_open):
        opens |= {u | neighbourhood for u in opens}
    return sorted(opens, key=lambda u: (len(u), sorted(u)))


def path_components(topo: FiniteTopology, subset) -> List[PointSet]:
    """Components of the comparability graph of the specialization preorder on the subset.

    In a finite space connected and path-connected components coincide.
    """
    return list(_components(topo, frozenset(subset)))


@lru_cache(maxsize=8192)
def _components(topo: FiniteTopology, subset: PointSet) -> Tuple[PointSet, ...]:
    graph = nx.Graph()
    graph.add_nodes_from(subset)
    graph.add_edges_from((x, y) for x in subset for y in topo.min_open[x] & subset if x != y)
    return tuple(sorted((frozenset(c) for c in nx.connected_components(graph)), key=min))


def component_of(topo: FiniteTopology, subset, x: int) -> PointSet:
    """Path component of the subset holding x, empty when x is outside"""
    for component in path_components(topo, subset):
        if x in component:
            return component
    return EMPTY
