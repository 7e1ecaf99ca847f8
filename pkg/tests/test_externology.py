import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.errors import InvalidExternology
from core.externology import (
    ExternologyKind,
    bar_d_region,
    bar_limit_space,
    check_externology,
    d_region,
    is_d_exterior,
    is_exterior_flow,
    limit_space,
    neighborhood_externology,
    relative_limit_space,
    right_externology,
)
from core.finite_space import FiniteSemiFlow, FiniteTopology, is_completely_invariant, periodic_points
from core.oracles import (
    exterior_opens,
    intersection_bar_limit,
    intersection_limit,
    is_externology,
    tail_bar_d_region,
    tail_d_region,
    tail_exterior_opens,
)
from strategies import discrete_flows, preorder_flows


class TestRightExternology:
    def test_three_cycle_exterior_opens(self, three_cycle_flow):
        flow, topo = three_cycle_flow
        ext = right_externology(flow, topo, cross_check=True)
        assert ext.kind is ExternologyKind.RIGHT_ABSORBING
        assert exterior_opens(ext, topo) == [frozenset({0, 1, 2}), frozenset({0, 1, 2, 3})]

    def test_identity_has_only_whole_space(self):
        flow = FiniteSemiFlow(3, (0, 1, 2))
        topo = FiniteTopology.discrete(3)
        assert exterior_opens(right_externology(flow, topo), topo) == [frozenset({0, 1, 2})]

    def test_constant_map(self):
        flow = FiniteSemiFlow(2, (0, 0))
        topo = FiniteTopology.discrete(2)
        assert tail_exterior_opens(flow, topo) == [frozenset({0}), frozenset({0, 1})]

    def test_sierpinski_limit_is_whole_space(self, sierpinski):
        flow, topo = sierpinski
        ext = right_externology(flow, topo)
        assert limit_space(ext, topo) == {0, 1}
        assert periodic_points(flow) == {1}

    @given(preorder_flows())
    def test_tail_definition_agrees(self, case):
        flow, topo = case
        # raises InvalidExternology on disagreement
        ext = right_externology(flow, topo, cross_check=True)
        assert is_externology(exterior_opens(ext, topo), topo)
        check_externology(ext, topo)

    @given(preorder_flows())
    def test_d_is_everything(self, case):
        flow, topo = case
        ext = right_externology(flow, topo)
        assert d_region(ext, flow) == flow.points
        assert is_d_exterior(ext, flow)
        assert is_exterior_flow(ext, flow, topo)


class TestNeighborhoodExternology:
    def test_discrete_single_point(self):
        topo = FiniteTopology.discrete(3)
        opens = exterior_opens(neighborhood_externology(topo, {1}), topo)
        assert all(1 in u for u in opens) and len(opens) == 4

    def test_sierpinski_closed_point(self, sierpinski):
        _, topo = sierpinski
        assert exterior_opens(neighborhood_externology(topo, {1}), topo) == [frozenset({0, 1})]

    def test_empty_target_gives_all_opens(self, sierpinski):
        _, topo = sierpinski
        assert len(exterior_opens(neighborhood_externology(topo, frozenset()), topo)) == 3

    def test_target_outside_space(self):
        with pytest.raises(InvalidExternology):
            neighborhood_externology(FiniteTopology.discrete(2), {5})

    def test_label(self):
        ext = neighborhood_externology(FiniteTopology.discrete(4), {2, 0})
        assert ext.label() == "nbhd(0,2)"

    def test_fixed_point_region(self):
        flow = FiniteSemiFlow(2, (0, 0))
        ext = neighborhood_externology(FiniteTopology.discrete(2), {0})
        assert d_region(ext, flow) == {0, 1}

    def test_unreachable_target(self):
        flow = FiniteSemiFlow(2, (0, 1))
        ext = neighborhood_externology(FiniteTopology.discrete(2), {1})
        assert 0 not in d_region(ext, flow)


class TestLimitSpaces:
    def test_three_cycle(self, three_cycle_flow):
        flow, topo = three_cycle_flow
        ext = right_externology(flow, topo)
        assert limit_space(ext, topo) == bar_limit_space(ext, topo) == {0, 1, 2}

    def test_discrete_neighbourhood_limit(self):
        topo = FiniteTopology.discrete(4)
        assert limit_space(neighborhood_externology(topo, {1, 3}), topo) == {1, 3}

    @given(preorder_flows(), st.data())
    def test_against_intersections(self, case, data):
        flow, topo = case
        target = data.draw(st.frozensets(st.integers(0, flow.size - 1)))
        for ext in (right_externology(flow, topo), neighborhood_externology(topo, target)):
            assert limit_space(ext, topo) == intersection_limit(ext, topo)
            assert bar_limit_space(ext, topo) == intersection_bar_limit(ext, topo)
            assert d_region(ext, flow) == tail_d_region(ext, flow, topo)
            assert bar_d_region(ext, flow, topo) == tail_bar_d_region(ext, flow, topo)

    @given(preorder_flows(), st.data())
    def test_regions_invariant(self, case, data):
        flow, topo = case
        target = data.draw(st.frozensets(st.integers(0, flow.size - 1)))
        ext = neighborhood_externology(topo, target)
        assert d_region(ext, flow) <= bar_d_region(ext, flow, topo)
        assert is_completely_invariant(flow, d_region(ext, flow))
        assert is_completely_invariant(flow, bar_d_region(ext, flow, topo))

    @given(discrete_flows())
    def test_relative_limit(self, case):
        flow, topo = case
        ext = right_externology(flow, topo)
        assert relative_limit_space(ext, flow, topo) == limit_space(ext, topo)
