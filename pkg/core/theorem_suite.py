"""
Region report and the machine-checked theorem suite for finite flows.

Every identity is evaluated exactly. A check records whether its conclusion holds, whether
its hypotheses hold on this instance, and a witness when the conclusion fails. Finite spaces
are compact, so Lagrange stability and local compactness are always satisfied; T1 means
discrete, and regular means the specialization preorder is symmetric.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional

from core.end_points import (
    AttractingSplit,
    EndPointBG,
    attracting_split,
    basins,
    cech_basins,
    cech_end,
    cech_region,
    classify_end_steenrod,
    end_orbits,
    immediate_basin,
    is_attractor_end,
    is_cech_representable,
    locally_cech_stable_points,
    locally_stable_points,
    omega_end,
    steenrod_region,
    union_of,
)
from core.externology import (
    Externology,
    bar_d_region,
    bar_limit_space,
    complement_of_closure_is_exterior,
    d_region,
    is_d_exterior,
    is_exterior_flow,
    limit_space,
    neighborhood_externology,
    relative_bar_limit_space,
    relative_limit_space,
    right_externology,
)
from core.finite_space import (
    EMPTY,
    FiniteSemiFlow,
    FiniteTopology,
    PointSet,
    fixed_points,
    is_completely_invariant,
    is_right_invariant,
    lagrange_stable,
    m_cycles,
    m_periodic,
    omega_limit,
    omega_limit_of_set,
    periodic_points,
    poisson_points,
    regions,
    validate,
)

logger = logging.getLogger(__name__)


class CheckResult(NamedTuple):
    holds: bool
    hypothesis_satisfied: bool
    witness: Any = None


def _check(holds, hypothesis, witness=None) -> CheckResult:
    return CheckResult(bool(holds), bool(hypothesis), None if holds else witness)


def _difference_witness(left: PointSet, right: PointSet):
    """Points in exactly one of the two sets, for equality checks."""
    return sorted(left ^ right)


@dataclass
class ExternologyReport:
    label: str
    generator: PointSet
    exterior_flow: bool
    limit: PointSet
    bar_limit: PointSet
    d: PointSet
    bar_d: PointSet
    cech_d: PointSet
    steenrod_d: PointSet
    basins: Dict[EndPointBG, PointSet]
    cech_basins: Dict[PointSet, PointSet]
    attractor_ends: List[EndPointBG]
    immediate_basins: Dict[EndPointBG, PointSet]
    split: AttractingSplit
    locally_stable: PointSet
    locally_cech_stable: PointSet


@dataclass
class RegionReport:
    size: int
    discrete: bool
    regular: bool
    sets: Dict[str, PointSet]
    periodic_by_m: Dict[int, PointSet]
    cyclic_by_m: Dict[int, PointSet]
    target: Optional[PointSet]
    regions: Dict[str, PointSet]
    externologies: Dict[str, ExternologyReport]
    theorem_results: Dict[str, CheckResult] = field(default_factory=dict)

    def failures_under_hypotheses(self) -> List[str]:
        """Checks failing although their hypotheses hold"""
        return sorted(name for name, r in self.theorem_results.items() if r.hypothesis_satisfied and not r.holds)

    def failures_with_violated_hypotheses(self) -> List[str]:
        """Checks failing where their hypotheses do not hold"""
        return sorted(name for name, r in self.theorem_results.items() if not r.hypothesis_satisfied and not r.holds)


# =============================================================================
# CHECKS
# =============================================================================

def _flow_checks(flow: FiniteSemiFlow, topo: FiniteTopology) -> Dict[str, CheckResult]:
    """Checks about epsilon^r and the plain flow."""
    checks = {}
    ext = right_externology(flow, topo)
    points = flow.points
    periodic = periodic_points(flow)
    poisson = poisson_points(flow, topo)
    omega_all = omega_limit_of_set(flow, topo, points)
    omega_closure = topo.closure(omega_all)
    limit = limit_space(ext, topo)
    bar_limit = bar_limit_space(ext, topo)
    t1 = topo.is_t1
    t3 = topo.is_regular and topo.is_locally_compact

    extra = sorted(limit - periodic)
    checks["periodic_limit"] = _check(periodic == limit, t1, extra or _difference_witness(periodic, limit))
    checks["main_bar_limit"] = _check(bar_limit == omega_closure, t3, _difference_witness(bar_limit, omega_closure))

    chain = periodic <= poisson <= omega_all <= omega_closure
    checks["limit_chain"] = _check(chain, True, sorted(periodic - poisson) or sorted(poisson - omega_all))
    checks["reticulo"] = _check(
        chain and limit == periodic and omega_closure == bar_limit, t1 and t3,
        _difference_witness(limit, periodic) or _difference_witness(omega_closure, bar_limit),
    )
    checks["lemma_uno"] = _check(periodic <= limit, is_d_exterior(ext, flow), sorted(periodic - limit))

    bad = [x for x in range(flow.size) if (x not in periodic) != ext.contains(points - {x}, topo)]
    checks["lemma_dos"] = _check(not bad, t1, bad[:1])

    not_lambda = [
        x for x in range(flow.size)
        if x not in omega_closure and not complement_of_closure_is_exterior(ext, topo, x)
    ]
    checks["compact_neighbourhood"] = _check(not not_lambda, topo.is_regular, not_lambda[:1])

    shift_bad = [x for x in range(flow.size) if omega_limit(flow, topo, x) != omega_limit(flow, topo, flow.map[x])]
    checks["omega_shift_invariance"] = _check(not shift_bad, True, shift_bad[:1])

    targets = {"periodic": periodic, "limit": limit}
    for name, target in targets.items():
        checks[f"attraction_lemma_{name}"] = attraction_check(flow, topo, target)
    return checks


def attraction_check(flow: FiniteSemiFlow, topo: FiniteTopology, target: PointSet) -> CheckResult:
    """PA(S) is the disjoint union of PA(empty) and A(S), with A(S) = PA(S) n WA(S); all three invariant"""
    pa, wa, a = regions(flow, topo, target)
    pa_empty = regions(flow, topo, EMPTY).pseudo_attraction
    disjoint_union = not (pa_empty & a) and pa == pa_empty | a
    meet = a == pa & wa
    invariant = all(is_completely_invariant(flow, s) for s in (pa, wa, a))
    lagrange = not pa_empty and pa == a
    holds = disjoint_union and meet and invariant and lagrange
    witness = {"pa": sorted(pa), "wa": sorted(wa), "a": sorted(a)}
    stable = all(lagrange_stable(flow, topo, x) for x in range(flow.size))
    return _check(holds, stable, witness)


def externology_checks(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> Dict[str, CheckResult]:
    """Checks that hold for any exterior discrete semi-flow."""
    checks = {}
    exterior = is_exterior_flow(ext, flow, topo)
    points = flow.points
    limit = limit_space(ext, topo)
    bar_limit = bar_limit_space(ext, topo)
    d = d_region(ext, flow)
    bar_d = bar_d_region(ext, flow, topo)
    pa_bar, wa_bar, a_bar = regions(flow, topo, bar_limit)
    pa_l, _, a_l = regions(flow, topo, limit)

    checks["region_attraction"] = _check(d <= bar_d <= pa_bar, exterior, sorted((d - bar_d) | (bar_d - pa_bar)))
    checks["region_attraction_lagrange"] = _check(bar_d <= a_bar, exterior, sorted(bar_d - a_bar))
    checks["region_attraction_limit"] = _check(a_l <= d and pa_l <= d, exterior, sorted((a_l | pa_l) - d))
    checks["region_attraction_equal"] = _check(
        d == pa_l == a_l, exterior and limit == bar_limit, _difference_witness(d, pa_l),
    )

    boundary_weak = regions(flow, topo, bar_limit - limit).weak_attraction
    checks["region_attraction1"] = _check((pa_bar - boundary_weak) <= bar_d, exterior, sorted((pa_bar - boundary_weak) - bar_d))
    checks["region_attraction1_equal"] = _check(a_bar == bar_d, exterior and not boundary_weak, _difference_witness(a_bar, bar_d))

    relative = relative_limit_space(ext, flow, topo)
    relative_bar = relative_bar_limit_space(ext, flow, topo)
    checks["limit_of_d"] = _check(
        relative == limit and relative_bar == bar_limit, exterior,
        _difference_witness(relative, limit) or _difference_witness(relative_bar, bar_limit),
    )

    omega_d = omega_limit_of_set(flow, topo, d)
    omega_bar_d = omega_limit_of_set(flow, topo, bar_d)
    checks["omega_bar_limit"] = _check(
        omega_d <= omega_bar_d <= topo.closure(omega_bar_d) <= bar_limit, exterior,
        sorted(topo.closure(omega_bar_d) - bar_limit),
    )
    checks["limit_right_invariant"] = _check(
        is_right_invariant(flow, limit) and is_right_invariant(flow, bar_limit), exterior,
        sorted(flow.image(limit) - limit) or sorted(flow.image(bar_limit) - bar_limit),
    )
    checks["d_region_invariance"] = _check(
        is_completely_invariant(flow, d) and is_completely_invariant(flow, bar_d), exterior,
    )

    bar_bad = [
        x for x in range(flow.size)
        if (x not in bar_limit) != complement_of_closure_is_exterior(ext, topo, x)
    ]
    checks["exterior_bar_limit"] = _check(not bar_bad, True, bar_bad[:1])
    omega_bar_closure = topo.closure(omega_bar_d)
    noper_bad = [
        x for x in range(flow.size)
        if complement_of_closure_is_exterior(ext, topo, x) and x in omega_bar_closure
    ]
    checks["noper"] = _check(not noper_bad, exterior, noper_bad[:1])

    inside_right = periodic_points(flow) <= limit
    checks["exterior_and_d"] = _check(inside_right == is_d_exterior(ext, flow), True)

    cech_d = cech_region(ext, flow, topo)
    steenrod_d = steenrod_region(ext, flow, topo)
    checks["shift_inclusions"] = _check(
        steenrod_d <= cech_d <= d and is_completely_invariant(flow, cech_d) and is_right_invariant(flow, steenrod_d),
        exterior, sorted(steenrod_d - cech_d) or sorted(cech_d - d),
    )

    basin_map = basins(ext, flow, topo)
    checks["basin_partition"] = _check(_partitions(basin_map.values(), d), True)
    checks["cech_basin_partition"] = _check(_partitions(cech_basins(ext, flow, topo).values(), cech_d), True)

    equivariance_bad = [
        x for x in sorted(d)
        if omega_end(ext, flow, topo, flow.map[x]) != omega_end(ext, flow, topo, x).shifted()
    ]
    checks["omega_equivariance"] = _check(not equivariance_bad, True, equivariance_bad[:1])
    constancy_bad = [x for x in sorted(cech_d) if cech_end(ext, flow, topo, flow.map[x]) != cech_end(ext, flow, topo, x)]
    checks["cech_orbit_constancy"] = _check(not constancy_bad, True, constancy_bad[:1])

    equalizer_bad = [
        x for x in sorted(d)
        if is_cech_representable(ext, flow, topo, x) != classify_end_steenrod(omega_end(ext, flow, topo, x))
    ]
    checks["equalizer"] = _check(not equalizer_bad, topo.is_discrete, equalizer_bad[:1])

    orbit_bad = [
        orbit[0].name() for orbit in end_orbits(basin_map)
        if not is_completely_invariant(flow, union_of(basin_map[e] for e in orbit))
    ]
    checks["big_orbit_basins"] = _check(not orbit_bad, True, orbit_bad[:1])

    stable = locally_stable_points(ext, flow, topo)
    stability_bad = []
    for end, basin in basin_map.items():
        interior = topo.interior(basin)
        if is_attractor_end(basin, topo) and not basin <= stable:
            stability_bad.append(end.name())
        elif stable & basin != interior:
            stability_bad.append(end.name())
    checks["attractor_local_stability"] = _check(not stability_bad, True, stability_bad[:1])
    return checks


def _partitions(parts, whole: PointSet) -> bool:
    """The parts are pairwise disjoint and cover whole"""
    seen = set()
    for part in parts:
        if seen & part:
            return False
        seen |= part
    return frozenset(seen) == whole


def theorem_suite(flow: FiniteSemiFlow, topo: FiniteTopology, target=None) -> Dict[str, CheckResult]:
    """All checks for epsilon^r, plus the nbhd_ family for epsilon(X, S) when S is given."""
    checks = _flow_checks(flow, topo)
    checks.update(externology_checks(right_externology(flow, topo), flow, topo))
    if target is not None:
        target = frozenset(target)
        checks["attraction_lemma_target"] = attraction_check(flow, topo, target)
        nbhd = neighborhood_externology(topo, target)
        checks.update({f"nbhd_{k}": v for k, v in externology_checks(nbhd, flow, topo).items()})
    for name, result in checks.items():
        if not result.holds and result.hypothesis_satisfied:
            logger.error("check %s failed with its hypotheses satisfied (witness %s)", name, result.witness)
        elif not result.holds:
            logger.debug("check %s fails outside its hypotheses (witness %s)", name, result.witness)
    return checks


# =============================================================================
# REPORT
# =============================================================================

def externology_report(ext: Externology, flow: FiniteSemiFlow, topo: FiniteTopology) -> ExternologyReport:
    """Every set and basin of one externology"""
    limit = limit_space(ext, topo)
    basin_map = basins(ext, flow, topo)
    immediate = {}
    for end, basin in basin_map.items():
        if basin & frozenset(end.cycle):
            immediate[end] = immediate_basin(basin, end, topo)
    return ExternologyReport(
        label=ext.label(),
        generator=ext.generator,
        exterior_flow=is_exterior_flow(ext, flow, topo),
        limit=limit,
        bar_limit=bar_limit_space(ext, topo),
        d=d_region(ext, flow),
        bar_d=bar_d_region(ext, flow, topo),
        cech_d=cech_region(ext, flow, topo),
        steenrod_d=steenrod_region(ext, flow, topo),
        basins=basin_map,
        cech_basins=cech_basins(ext, flow, topo),
        attractor_ends=[end for end, basin in basin_map.items() if is_attractor_end(basin, topo)],
        immediate_basins=immediate,
        split=attracting_split(basin_map, topo, limit),
        locally_stable=locally_stable_points(ext, flow, topo),
        locally_cech_stable=locally_cech_stable_points(ext, flow, topo),
    )


def analyze(flow: FiniteSemiFlow, topo: FiniteTopology, target=None) -> RegionReport:
    """Validate, compute every named set and run the theorem suite."""
    validate(flow, topo)
    target = None if target is None else frozenset(target)
    periods = sorted({len(c) for c in flow.cycles()})
    omega_all = omega_limit_of_set(flow, topo, flow.points)
    sets = {
        "periodic": periodic_points(flow),
        "fixed": fixed_points(flow),
        "poisson": poisson_points(flow, topo),
        "omega_limit": omega_all,
        "omega_limit_closure": topo.closure(omega_all),
        "lagrange_stable": frozenset(x for x in range(flow.size) if lagrange_stable(flow, topo, x)),
    }
    externologies = {"right": externology_report(right_externology(flow, topo), flow, topo)}
    region_sets = {}
    if target is not None:
        externologies["nbhd"] = externology_report(neighborhood_externology(topo, target), flow, topo)
        pa, wa, a = regions(flow, topo, target)
        region_sets = {"pseudo_attraction": pa, "weak_attraction": wa, "attraction": a}
    report = RegionReport(
        size=flow.size,
        discrete=topo.is_discrete,
        regular=topo.is_regular,
        sets=sets,
        periodic_by_m={m: m_periodic(flow, m) for m in periods},
        cyclic_by_m={m: m_cycles(flow, m) for m in periods},
        target=target,
        regions=region_sets,
        externologies=externologies,
        theorem_results=theorem_suite(flow, topo, target),
    )
    logger.info(
        "analyzed flow on %d points: %d checks, %d failing under hypotheses",
        flow.size, len(report.theorem_results), len(report.failures_under_hypotheses()),
    )
    return report


def _points(points) -> List[int]:
    return sorted(points)


def _witness(value):
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return value


def externology_to_dict(report: ExternologyReport) -> Dict[str, Any]:
    """JSON form of an ExternologyReport"""
    return {
        "label": report.label,
        "generator": _points(report.generator),
        "exterior_flow": report.exterior_flow,
        "L": _points(report.limit),
        "bar_L": _points(report.bar_limit),
        "D": _points(report.d),
        "bar_D": _points(report.bar_d),
        "cech_D": _points(report.cech_d),
        "steenrod_D": _points(report.steenrod_d),
        "basins": [
            {"cycle": list(end.cycle), "phase": end.phase, "points": _points(points)}
            for end, points in report.basins.items()
        ],
        "cech_basins": [
            {"component": _points(component), "points": _points(points)}
            for component, points in report.cech_basins.items()
        ],
        "attractor_ends": [end.name() for end in report.attractor_ends],
        "immediate_basins": {end.name(): _points(points) for end, points in report.immediate_basins.items()},
        "attracting_basin": _points(report.split.attracting),
        "non_attracting_basin": _points(report.split.non_attracting),
        "attracting_limit": _points(report.split.attracting_limit),
        "non_attracting_limit": _points(report.split.non_attracting_limit),
        "locally_stable": _points(report.locally_stable),
        "locally_cech_stable": _points(report.locally_cech_stable),
    }


def report_to_dict(report: RegionReport) -> Dict[str, Any]:
    """JSON-ready view: sets become sorted index lists."""
    return {
        "size": report.size,
        "discrete": report.discrete,
        "regular": report.regular,
        "sets": {name: _points(points) for name, points in report.sets.items()},
        "periodic_by_m": {str(m): _points(points) for m, points in report.periodic_by_m.items()},
        "cyclic_by_m": {str(m): _points(points) for m, points in report.cyclic_by_m.items()},
        "S": None if report.target is None else _points(report.target),
        "regions": {name: _points(points) for name, points in report.regions.items()},
        "externologies": {label: externology_to_dict(ext) for label, ext in report.externologies.items()},
        "theorem_results": {
            name: {"holds": r.holds, "hypothesis_satisfied": r.hypothesis_satisfied, "witness": _witness(r.witness)}
            for name, r in report.theorem_results.items()
        },
        "failures_under_hypotheses": report.failures_under_hypotheses(),
    }
