import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.errors import NotContinuous
from core.finite_space import FiniteSemiFlow, FiniteTopology
from core.theorem_suite import analyze, attraction_check, report_to_dict, theorem_suite
from strategies import discrete_flows, preorder_flows


class TestTheoremSuite:
    def test_three_cycle_report(self, three_cycle_flow):
        flow, topo = three_cycle_flow
        report = analyze(flow, topo)
        assert report.sets["periodic"] == {0, 1, 2}
        assert report.sets["lagrange_stable"] == flow.points
        assert report.externologies["right"].limit == {0, 1, 2}
        assert report.failures_under_hypotheses() == []
        assert all(result.holds for result in report.theorem_results.values())

    def test_sierpinski_counterexample(self, sierpinski):
        flow, topo = sierpinski
        checks = theorem_suite(flow, topo)
        periodic = checks["periodic_limit"]
        assert not periodic.holds
        assert not periodic.hypothesis_satisfied
        assert periodic.witness == [0]
        assert all(r.holds for r in checks.values() if r.hypothesis_satisfied)

    def test_lemma_dos_on_discrete_flows(self):
        flow = FiniteSemiFlow(4, (1, 2, 0, 1))
        assert theorem_suite(flow, FiniteTopology.discrete(4))["lemma_dos"].holds

    def test_target_adds_neighbourhood_checks(self, three_cycle_flow):
        flow, topo = three_cycle_flow
        checks = theorem_suite(flow, topo, {0})
        assert "attraction_lemma_target" in checks
        assert "nbhd_basin_partition" in checks
        assert checks["nbhd_basin_partition"].holds

    def test_attraction_lemma(self, three_cycle_flow):
        flow, topo = three_cycle_flow
        result = attraction_check(flow, topo, frozenset({0, 1, 2}))
        assert result.holds and result.hypothesis_satisfied

    @given(discrete_flows())
    def test_every_check_holds_on_discrete_spaces(self, case):
        flow, topo = case
        failed = [name for name, r in theorem_suite(flow, topo).items() if not r.holds]
        assert failed == []

    @given(preorder_flows(), st.data())
    def test_no_failures_under_hypotheses(self, case, data):
        flow, topo = case
        target = data.draw(st.none() | st.frozensets(st.integers(0, flow.size - 1)))
        checks = theorem_suite(flow, topo, target)
        assert [name for name, r in checks.items() if r.hypothesis_satisfied and not r.holds] == []


class TestReport:
    def test_analyze_validates(self, sierpinski):
        _, topo = sierpinski
        with pytest.raises(NotContinuous):
            analyze(FiniteSemiFlow(2, (1, 0)), topo)

    def test_dict_is_json_ready(self, three_cycle_flow):
        flow, topo = three_cycle_flow
        document = report_to_dict(analyze(flow, topo, {0, 1}))
        assert document["sets"]["periodic"] == [0, 1, 2]
        assert document["S"] == [0, 1]
        assert document["regions"]["attraction"] == []
        assert document["periodic_by_m"] == {"3": [0, 1, 2]}
        assert document["externologies"]["right"]["L"] == [0, 1, 2]
        assert set(document["externologies"]) == {"right", "nbhd"}
        json.dumps(document, sort_keys=True)

    def test_basins_in_report(self):
        flow = FiniteSemiFlow(4, (1, 0, 2, 0))
        document = report_to_dict(analyze(flow, FiniteTopology.discrete(4), {0, 1, 2}))
        nbhd = document["externologies"]["nbhd"]
        assert nbhd["D"] == [0, 1, 2, 3]
        assert {"cycle": [0, 1], "phase": 1, "points": [1, 3]} in nbhd["basins"]
        assert nbhd["steenrod_D"] == [2]
