"""
Brute-force oracles straight from the definitions.
Slow on purpose: they enumerate every open set and every tail, so they refuse spaces
above the size cap. Tests use them to pin down the fast characterizations.
"""

from typing import List

from config import FINITE_SIZE_CAP
from core.errors import SizeCapExceeded
from core.externology import Externology
from core.finite_space import FiniteSemiFlow, FiniteTopology, PointSet, enumerate_opens


def _guard(size, cap=FINITE_SIZE_CAP):
    if size > cap:
        raise SizeCapExceeded(size, cap)


def tail(flow: FiniteSemiFlow, x: int, n: int) -> PointSet:
    """[n, oo).x; `size` further steps already cover the terminal cycle."""
    return frozenset(flow.iterate(x, m) for m in range(n, n + flow.size + 1))


def eventually_inside(flow: FiniteSemiFlow, x: int, points) -> bool:
    """Some tail of the trajectory of x lies inside the set"""
    points = frozenset(points)
    return any(tail(flow, x, n) <= points for n in range(flow.size + 1))


def tail_exterior_opens(flow: FiniteSemiFlow, topo: FiniteTopology) -> List[PointSet]:
    """Opens that eventually contain the tail of every trajectory."""
    _guard(flow.size)
    return [
        u for u in enumerate_opens(topo)
        if all(eventually_inside(flow, x, u) for x in range(flow.size))
    ]


def exterior_opens(ext: Externology, topo: FiniteTopology) -> List[PointSet]:
    """Every open set the externology contains"""
    return [u for u in enumerate_opens(topo) if ext.contains(u, topo)]


def intersection_limit(ext: Externology, topo: FiniteTopology) -> PointSet:
    """L as the plain intersection of the exterior opens"""
    result = topo.points
    for u in exterior_opens(ext, topo):
        result &= u
    return result


def intersection_bar_limit(ext: Externology, topo: FiniteTopology) -> PointSet:
    """bar-L as the intersection of the closures of the exterior opens"""
    result = topo.points
    for u in exterior_opens(ext, topo):
        result &= topo.closure(u)
    return result


def tail_omega_limit(flow: FiniteSemiFlow, topo: FiniteTopology, x: int) -> PointSet:
    """Intersection over n of closure([n, oo).x)."""
    _guard(flow.size)
    result = topo.points
    for n in range(flow.size + 1):
        result &= topo.closure(tail(flow, x, n))
    return result


def tail_d_region(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    """D straight from the definition: trajectories eventually inside each exterior open"""
    opens = exterior_opens(ext, topo)
    return frozenset(
        x for x in range(flow.size)
        if all(eventually_inside(flow, x, u) for u in opens)
    )


def tail_bar_d_region(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> PointSet:
    opens = exterior_opens(ext, topo)
    return frozenset(
        x for x in range(flow.size)
        if all(eventually_inside(flow, x, topo.closure(u)) for u in opens)
    )


def preimages_of_opens_are_open(flow: FiniteSemiFlow, topo: FiniteTopology) -> bool:
    """Continuity in its textbook form."""
    return all(topo.is_open(flow.preimage(u)) for u in enumerate_opens(topo))


def is_externology(members: List[PointSet], topo: FiniteTopology) -> bool:
    """Nonempty, closed under pairwise intersection and under open supersets."""
    family = set(members)
    if not family:
        return False
    opens = enumerate_opens(topo)
    for u in family:
        for v in family:
            if u & v not in family:
                return False
        for w in opens:
            if u <= w and w not in family:
                return False
    return True
