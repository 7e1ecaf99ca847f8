import numpy as np
import pytest

from core.finite_space import continuity_violation
from core.finite_sweep import (
    TheoremSweep,
    all_maps,
    random_monotone_map,
    random_preorder,
    sierpinski_instance,
    verify_sweep,
)
from utils.report_io import dumps


@pytest.fixture(scope="module")
def small_summary():
    return verify_sweep(max_size=3, trials=20, seed=42, workers=1)


def test_all_maps_count():
    assert sum(1 for n in range(1, 6) for _ in all_maps(n)) == 3413
    assert [flow.map for flow in all_maps(2)] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_random_preorder_is_a_topology():
    rng = np.random.default_rng(3)
    for _ in range(20):
        topo = random_preorder(int(rng.integers(2, 7)), rng)
        for x in range(topo.size):
            for y in topo.min_open[x]:
                assert topo.min_open[y] <= topo.min_open[x]


def test_random_monotone_map_is_continuous():
    rng = np.random.default_rng(5)
    for _ in range(20):
        topo = random_preorder(6, rng, density=0.6)
        assert continuity_violation(random_monotone_map(topo, rng, attempts=1), topo) is None


def test_sierpinski_leads_non_t1_family():
    sweep = TheoremSweep(max_size=1, trials=2, seed=0)
    assert sweep.non_t1_instances()[0] == sierpinski_instance()


def test_small_sweep_counts(small_summary):
    assert small_summary["checked"] == 32
    assert small_summary["non_t1_checked"] == 21
    assert small_summary["hypothesis_satisfied_failures"] == 0
    assert small_summary["hypothesis_violation_failures"] >= 1
    assert small_summary["per_check"]["periodic_limit"]["hypothesis_violation_failures"] >= 1
    assert small_summary["failures"] == []


def test_equivariance_family(small_summary):
    equivariance = small_summary["equivariance"]
    assert equivariance["checked"] == 20
    assert equivariance["failures"] == 0
    assert set(equivariance["per_check"]) == {
        "omega_equivariance", "cech_orbit_constancy", "basin_partition", "equalizer", "attraction_lemma",
    }


def test_sweep_is_deterministic(small_summary):
    assert dumps(verify_sweep(max_size=3, trials=20, seed=42, workers=1)) == dumps(small_summary)


def test_worker_count_does_not_change_summary():
    serial = verify_sweep(max_size=4, trials=10, seed=7, workers=1)
    parallel = verify_sweep(max_size=4, trials=10, seed=7, workers=2)
    assert dumps(serial) == dumps(parallel)
