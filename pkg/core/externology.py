"""
Externologies on finite spaces, limit spaces and regions of pseudo-attraction.

On a finite space every externology is principal: the intersection of all exterior opens is
itself exterior. We therefore store that minimal exterior open (the generator) and derive
membership, limits and D-regions from it.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from config import CROSS_CHECK_ORACLES
from core.errors import InvalidExternology
from core.finite_space import (
    FiniteSemiFlow,
    FiniteTopology,
    PointSet,
    enumerate_opens,
    periodic_points,
)

logger = logging.getLogger(__name__)


class ExternologyKind(Enum):
    RIGHT_ABSORBING = "right_absorbing"
    NEIGHBORHOOD = "neighborhood"


@dataclass(frozen=True)
class Externology:
    """All open supersets of `generator`.

    `target` is S for the neighbourhood externology epsilon(X, S), and None for epsilon^r.
    """

    kind: ExternologyKind
    generator: PointSet
    size: int
    target: Optional[PointSet] = None

    @property
    def generators(self) -> List[PointSet]:
        return [self.generator]

    @property
    def base(self) -> Tuple[PointSet, ...]:
        """Decreasing base E_0 = X, E_1 = generator, constant afterwards."""
        whole = frozenset(range(self.size))
        if self.generator == whole:
            return (whole,)
        return (whole, self.generator)

    def contains(self, points, topo: FiniteTopology) -> bool:
        """Membership: an open set containing the generator."""
        points = frozenset(points)
        return topo.is_open(points) and self.generator <= points

    def label(self) -> str:
        """Short name used as a report key"""
        if self.kind is ExternologyKind.RIGHT_ABSORBING:
            return "right"
        return "nbhd(" + ",".join(str(p) for p in sorted(self.target)) + ")"


def right_externology(flow: FiniteSemiFlow, topo: FiniteTopology, cross_check: bool = CROSS_CHECK_ORACLES) -> Externology:
    """epsilon^r: opens that eventually absorb every trajectory, i.e. the opens containing P(X)."""
    generator = topo.open_hull(periodic_points(flow))
    externology = Externology(ExternologyKind.RIGHT_ABSORBING, generator, flow.size)
    if cross_check:
        from core.oracles import tail_exterior_opens

        by_tails = set(tail_exterior_opens(flow, topo))
        by_periodic = {u for u in enumerate_opens(topo) if externology.contains(u, topo)}
        if by_tails != by_periodic:
            raise InvalidExternology("tail and periodic-point characterizations of epsilon^r disagree")
    return externology


def neighborhood_externology(topo: FiniteTopology, target) -> Externology:
    """epsilon(X, S): the open neighbourhoods of S."""
    target = frozenset(target)
    if not target <= topo.points:
        raise InvalidExternology(f"S mentions points outside 0..{topo.size - 1}")
    return Externology(ExternologyKind.NEIGHBORHOOD, topo.open_hull(target), topo.size, target)


def check_externology(ext: Externology, topo: FiniteTopology) -> None:
    """Base elements open, exterior and decreasing."""
    previous = None
    for element in ext.base:
        if not ext.contains(element, topo):
            raise InvalidExternology(f"base element {sorted(element)} is not an exterior open")
        if previous is not None and not element <= previous:
            raise InvalidExternology("base is not decreasing")
        previous = element


# =============================================================================
# LIMIT SPACES
# =============================================================================

def limit_space(ext: Externology, topo: FiniteTopology) -> PointSet:
    """L: the intersection of all exterior opens, which is the generator itself."""
    return ext.generator


def bar_limit_space(ext: Externology, topo: FiniteTopology) -> PointSet:
    """bar-L: closure is monotone, so the intersection of closures is the generator's closure."""
    return topo.closure(ext.generator)


# =============================================================================
# REGIONS OF PSEUDO-ATTRACTION
# =============================================================================

def d_region(ext: Externology, flow: FiniteSemiFlow) -> PointSet:
    """D: points whose trajectory is an exterior map N -> X.

    Tails end in the terminal cycle, and every exterior open contains the generator.
    """
    return frozenset(x for x in range(flow.size) if frozenset(flow.trajectory(x)[1]) <= ext.generator)


def bar_d_region(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """Points whose terminal cycle lies in the closure of the generator"""
    hull = topo.closure(ext.generator)
    return frozenset(x for x in range(flow.size) if frozenset(flow.trajectory(x)[1]) <= hull)


def is_exterior_flow(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> bool:
    """phi^1 exterior: the preimage of the generator is again exterior."""
    return ext.contains(flow.preimage(ext.generator), topo)


def is_d_exterior(ext: Externology, flow: FiniteSemiFlow) -> bool:
    """Every trajectory is an exterior map"""
    return d_region(ext, flow) == flow.points


def relative_limit_space(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """L(D(X)) for the relative externology {D & E}."""
    return d_region(ext, flow) & ext.generator


def relative_bar_limit_space(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """bar-L(bar-D(X)): closures are taken inside bar-D."""
    region = bar_d_region(ext, flow, topo)
    return topo.closure(region & ext.generator) & region


def complement_of_closure_is_exterior(ext: Externology, topo: FiniteTopology, x: int) -> bool:
    """Whether X minus closure(V) is exterior for the smallest open neighbourhood V of x.

    Shrinking V only enlarges X minus closure(V), so min_open[x] is the best witness.
    """
    outside = topo.points - topo.closure(topo.min_open[x])
    return ext.contains(outside, topo)
