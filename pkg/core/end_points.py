"""
End points of trajectories and their basins.

A Brown-Grossman end of a trajectory that falls into an n-cycle is stored as the cycle plus
a phase j: for all large m, phi^m(x) sits on c_((m + j) mod n). Both the shift S and the
action of phi^1 move the phase by +1, so only period-1 ends are shift-invariant.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

from core.errors import CycleNotInBasin, NotInD, NotRepresentable
from core.externology import Externology, d_region
from core.finite_space import (
    FiniteSemiFlow,
    FiniteTopology,
    PointSet,
    canonical_cycle,
    component_of,
    path_components,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class EndPointBG:
    cycle: Tuple[int, ...]
    phase: int

    def __post_init__(self):
        if not 0 <= self.phase < len(self.cycle):
            raise ValueError(f"phase {self.phase} outside 0..{len(self.cycle) - 1}")

    @property
    def period(self) -> int:
        return len(self.cycle)

    def shifted(self, steps: int = 1) -> "EndPointBG":
        """S^steps, which equals the action of phi^steps on representable ends."""
        return EndPointBG(self.cycle, (self.phase + steps) % self.period)

    def name(self) -> str:
        """Cycle and phase as text, e.g. (1,2)@0"""
        return "(" + ",".join(str(c) for c in self.cycle) + f")@{self.phase}"


def omega_end(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology, x: int,
              strict: bool = False) -> Optional[EndPointBG]:
    """omega(x) = [phi_x], or None when x is outside D (NotInD when strict)."""
    preperiod, tail_cycle = flow.trajectory(x)
    if not frozenset(tail_cycle) <= ext.generator:
        if strict:
            raise NotInD(x)
        return None
    cycle = canonical_cycle(tail_cycle)
    entry = cycle.index(tail_cycle[0])
    return EndPointBG(cycle, (entry - preperiod) % len(cycle))


def cech_end(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology, x: int) -> Optional[PointSet]:
    """The path component of the generator that the tail of x settles in.

    None outside D; NotRepresentable when the cycle straddles several components.
    """
    if x not in d_region(ext, flow):
        return None
    tail_cycle = flow.trajectory(x)[1]
    component = component_of(topo, ext.generator, tail_cycle[0])
    if not frozenset(tail_cycle) <= component:
        raise NotRepresentable(x)
    return component


def is_cech_representable(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology, x: int) -> bool:
    """Whether cech_end succeeds with a component"""
    try:
        return cech_end(ext, flow, topo, x) is not None
    except NotRepresentable:
        return False


def classify_end_steenrod(end: EndPointBG) -> bool:
    """Shift-invariant ends, the image of the Steenrod ends: S(end) = end iff the period is 1."""
    return end.shifted() == end


# =============================================================================
# REGIONS AND BASINS
# =============================================================================

def basins(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> Dict[EndPointBG, PointSet]:
    """omega-basins D_a = omega^-1(a); they partition D."""
    grouped = defaultdict(set)
    for x in range(flow.size):
        end = omega_end(ext, flow, topo, x)
        if end is not None:
            grouped[end].add(x)
    return {end: frozenset(points) for end, points in sorted(grouped.items())}


def cech_region(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """Points whose tail settles in a single path component of the generator"""
    return frozenset(x for x in range(flow.size) if is_cech_representable(ext, flow, topo, x))


def cech_basins(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> Dict[PointSet, PointSet]:
    """Cech region grouped by component"""
    grouped = defaultdict(set)
    for x in cech_region(ext, flow, topo):
        grouped[cech_end(ext, flow, topo, x)].add(x)
    return {component: frozenset(points) for component, points in sorted(grouped.items(), key=lambda kv: min(kv[0]))}


def steenrod_region(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """D^S through the shift-invariance surrogate."""
    result = set()
    for x in range(flow.size):
        end = omega_end(ext, flow, topo, x)
        if end is not None and classify_end_steenrod(end):
            result.add(x)
    return frozenset(result)


def is_attractor_end(basin, topo: FiniteTopology) -> bool:
    """An end is an attractor when its basin is open."""
    return topo.is_open(basin)


def immediate_basin(basin, end: EndPointBG, topo: FiniteTopology) -> PointSet:
    """Path components of the basin that meet the cycle of the end."""
    basin = frozenset(basin)
    seeds = basin & frozenset(end.cycle)
    if not seeds:
        raise CycleNotInBasin(f"no point of {end.name()} lies in the basin")
    result = set()
    for component in path_components(topo, basin):
        if component & seeds:
            result |= component
    return frozenset(result)


class AttractingSplit(NamedTuple):
    attracting: PointSet
    non_attracting: PointSet
    attracting_limit: PointSet
    non_attracting_limit: PointSet


def attracting_split(basin_map: Dict, topo: FiniteTopology, limit: PointSet) -> AttractingSplit:
    """Union of the open basins against the rest, and their traces on the limit space."""
    attracting, non_attracting = set(), set()
    for basin in basin_map.values():
        if is_attractor_end(basin, topo):
            attracting |= basin
        else:
            non_attracting |= basin
    attracting, non_attracting = frozenset(attracting), frozenset(non_attracting)
    return AttractingSplit(attracting, non_attracting, attracting & limit, non_attracting & limit)


def locally_stable_points(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """x in D with a neighbourhood inside D on which omega is constant."""
    region = d_region(ext, flow)
    result = set()
    for x in region:
        end = omega_end(ext, flow, topo, x)
        if all(y in region and omega_end(ext, flow, topo, y) == end for y in topo.min_open[x]):
            result.add(x)
    return frozenset(result)


def locally_cech_stable_points(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """Points whose minimal neighbourhood shares their Cech end"""
    region = cech_region(ext, flow, topo)
    result = set()
    for x in region:
        end = cech_end(ext, flow, topo, x)
        if all(y in region and cech_end(ext, flow, topo, y) == end for y in topo.min_open[x]):
            result.add(x)
    return frozenset(result)


def end_orbits(ends) -> List[Tuple[EndPointBG, ...]]:
    """Orbits of the ends under the +1 phase action (one orbit per cycle)."""
    grouped = defaultdict(list)
    for end in ends:
        grouped[end.cycle].append(end)
    return [tuple(sorted(group)) for _, group in sorted(grouped.items())]


def union_of(sets) -> PointSet:
    result = set()
    for s in sets:
        result |= s
    return frozenset(result)

