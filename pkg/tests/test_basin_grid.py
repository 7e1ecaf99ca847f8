import numpy as np
import pytest

from core.basin_grid import (
    UNCLASSIFIED,
    BasinGrid,
    ClassifyParams,
    GridSpec,
    classify_point,
    compute_basins,
    effective_capture_radius,
    immediate_basin_grid,
    load_grid,
    refinement_check,
    save_grid,
)
from core.complex_map import parse_map
from core.cycle_finder import find_cycles
from core.errors import (
    CyclePixelOutsideWindow,
    GridMismatch,
    InvalidParams,
    ParseError,
    PeriodCapExceeded,
)

# 128 x 64 pixels over [-2, 2] x [-1, 1]
WIDE_WINDOW = GridSpec(128, 64, (-2.0, 2.0, -1.0, 1.0))


@pytest.fixture(scope="module")
def basilica_map():
    return parse_map("z^2-1")


@pytest.fixture(scope="module")
def period_one_cycles(basilica_map):
    return find_cycles(basilica_map, 1)


@pytest.fixture(scope="module")
def period_two_cycles(basilica_map):
    return find_cycles(basilica_map, 2)


@pytest.fixture(scope="module")
def module_params():
    return ClassifyParams(max_iterations=300, workers=1)


@pytest.fixture(scope="module")
def period_two_grid(basilica_map, module_params):
    return compute_basins(basilica_map, WIDE_WINDOW, 2, module_params)


@pytest.fixture(scope="module")
def period_one_grid(basilica_map, module_params):
    return compute_basins(basilica_map, WIDE_WINDOW, 1, module_params)


class TestParams:
    def test_positive(self):
        with pytest.raises(InvalidParams):
            ClassifyParams(max_iterations=0)
        with pytest.raises(InvalidParams):
            ClassifyParams(escape_radius=-1.0)

    def test_echo_leaves_out_workers(self):
        echo = ClassifyParams(workers=3).echo()
        assert "workers" not in echo
        assert echo["confirm_factor"] == 3

    def test_grid_spec(self):
        spec = GridSpec(4, 2, (-2, 2, -1, 1))
        assert spec.pixel_size == (1.0, 1.0)
        assert spec.pixel_centers()[0, 0] == complex(-1.5, 0.5)
        assert spec.pixel_of(0j) == (1, 2)
        assert spec.pixel_of(5 + 0j) is None
        with pytest.raises(InvalidParams):
            GridSpec(0, 2, (-1, 1, -1, 1))
        with pytest.raises(InvalidParams):
            GridSpec(2, 2, (1, -1, -1, 1))


class TestClassifyPoint:
    def test_escape(self, period_two_cycles):
        assert classify_point(3 + 0j, period_two_cycles) == period_two_cycles.label_count - 1

    def test_two_cycle_phases(self, period_two_cycles):
        # the 2-cycle is ordered (-1, 0): -1 carries phase 0 and 0 carries phase 1
        assert classify_point(0j, period_two_cycles) == 3
        assert classify_point(-1 + 0j, period_two_cycles) == 2
        assert classify_point(0.05 + 0.02j, period_two_cycles) == 3

    def test_fixed_point_captures_itself(self, period_one_cycles):
        low = period_one_cycles.cycles[0].points[0].value
        assert classify_point(low, period_one_cycles) == 0

    def test_two_cycle_invisible_at_period_one(self, period_one_cycles):
        assert classify_point(0j, period_one_cycles, ClassifyParams(max_iterations=100)) == UNCLASSIFIED

    def test_small_leading_coefficient_is_not_escape(self):
        shallow = find_cycles(parse_map("0.1z^2"), 1)
        assert shallow.end_names() == ["0+0i", "10+0i", "inf"]
        assert classify_point(9.5 + 0j, shallow) == 0
        assert classify_point(10.5 + 0j, shallow) == shallow.label_count - 1

    def test_capture_radius_shrinks(self, period_two_cycles):
        assert effective_capture_radius(period_two_cycles, ClassifyParams(capture_radius=0.9)) < 0.25
        assert effective_capture_radius(period_two_cycles, ClassifyParams()) == 1e-3


class TestComputeBasins:
    def test_labels_partition_pixels(self, period_two_grid):
        labels = period_two_grid.labels
        assert labels.shape == (64, 128)
        assert labels.min() >= UNCLASSIFIED and labels.max() < 5
        stats = period_two_grid.stats
        assert sum(end["pixels"] for end in stats["ends"]) + stats["undecided"]["pixels"] == labels.size

    def test_both_phase_basins(self, period_two_grid):
        counts = period_two_grid.counts()
        assert counts.get(2, 0) > 0 and counts.get(3, 0) > 0
        assert counts.get(4, 0) > period_two_grid.labels.size // 2

    def test_period_one_leaves_interior_undecided(self, period_one_grid, period_two_grid):
        counts = period_one_grid.counts()
        assert counts.get(0, 0) + counts.get(1, 0) <= 1
        undecided = period_one_grid.labels == UNCLASSIFIED
        filled = np.isin(period_two_grid.labels[undecided], [2, 3]).mean()
        assert filled >= 0.95

    def test_stats(self, period_two_grid):
        stats = period_two_grid.stats
        assert stats["period"] == 2
        assert stats["params"]["max_iterations"] == 300
        assert stats["ends"][3]["end"] == "0+0i"
        assert sum(stats["iteration_histogram"]["counts"]) == period_two_grid.labels.size - stats["undecided"]["pixels"]

    def test_single_pixel(self, basilica_map, module_params):
        grid = compute_basins(basilica_map, GridSpec(1, 1, (2.5, 3.5, 2.5, 3.5)), 2, module_params)
        assert grid.labels.tolist() == [[4]]

    def test_workers_do_not_change_labels(self, basilica_map):
        spec = GridSpec(24, 40, (-2.0, 2.0, -2.0, 2.0))
        serial = compute_basins(basilica_map, spec, 2, ClassifyParams(max_iterations=200, workers=1))
        threaded = compute_basins(basilica_map, spec, 2, ClassifyParams(max_iterations=200, workers=4))
        assert serial.labels.tobytes() == threaded.labels.tobytes()

    def test_supersampling(self, basilica_map):
        spec = GridSpec(8, 8, (-2.0, 2.0, -2.0, 2.0))
        grid = compute_basins(basilica_map, spec, 2, ClassifyParams(max_iterations=200, supersample=True, workers=1))
        assert grid.labels.shape == (8, 8)
        assert grid.stats["params"]["supersample"] is True

    def test_period_cap(self, basilica_map):
        with pytest.raises(PeriodCapExceeded):
            compute_basins(basilica_map, GridSpec(2, 2, (-1, 1, -1, 1)), 4)

    def test_phase_equivariance(self, basilica_map, period_two_grid, module_params):
        cycles = period_two_grid.cycles
        centers = WIDE_WINDOW.pixel_centers()
        rng = np.random.default_rng(11)
        decided = np.argwhere(period_two_grid.labels != UNCLASSIFIED)
        for row, col in decided[rng.choice(len(decided), size=40, replace=False)]:
            label = int(period_two_grid.labels[row, col])
            cycle_index, phase = cycles.end_of(label)
            expected = cycles.label(cycle_index, (phase + 1) % cycles.cycles[cycle_index].period)
            image = complex(basilica_map.evaluate(centers[row, col]))
            assert classify_point(image, cycles, module_params) == expected


class TestGridFiles:
    def test_round_trip(self, period_two_grid, tmp_path):
        path = tmp_path / "p2.grid"
        save_grid(period_two_grid, path)
        loaded = load_grid(path)
        assert np.array_equal(loaded.labels, period_two_grid.labels)
        assert loaded.window == period_two_grid.window
        assert loaded.cycles.end_names() == period_two_grid.cycles.end_names()

    def test_truncated_payload(self, period_two_grid, tmp_path):
        path = tmp_path / "short.grid"
        save_grid(period_two_grid, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(GridMismatch):
            load_grid(path)

    def test_unreadable_header(self, tmp_path):
        path = tmp_path / "bad.grid"
        path.write_bytes(b"not json\n")
        with pytest.raises(ParseError):
            load_grid(path)


class TestRefinement:
    def test_identical_grids(self, period_two_grid):
        stats = refinement_check(period_two_grid, period_two_grid)
        assert stats["violations"] == 0
        assert stats["newly_decided"] == 0

    def test_period_one_to_two(self, period_one_grid, period_two_grid):
        stats = refinement_check(period_one_grid, period_two_grid)
        assert stats["violation_fraction"] < 0.001
        assert stats["newly_decided"] > 0
        assert stats["table"]["inf"]["inf"] > 0
        assert set(stats["table"]["unclassified"]) <= {"-1+0i", "0+0i", "inf", "unclassified"}

    def test_shape_mismatch(self, period_two_grid, basilica_map, module_params):
        other = compute_basins(basilica_map, GridSpec(2, 2, (-2, 2, -1, 1)), 2, module_params)
        with pytest.raises(GridMismatch):
            refinement_check(period_two_grid, other)


class TestImmediateBasin:
    def test_component_around_zero(self, period_two_grid):
        mask = immediate_basin_grid(period_two_grid, 3)
        basin = period_two_grid.labels == 3
        assert mask[WIDE_WINDOW.pixel_of(0j)]
        assert not (mask & ~basin).any()
        assert mask.sum() < basin.sum()

    def test_connected_basin_is_whole(self, period_two_cycles):
        labels = np.full((3, 3), 4, dtype=np.int32)
        labels[1, :] = 3
        grid = BasinGrid(GridSpec(3, 3, (-1.5, 1.5, -1.5, 1.5)), period_two_cycles, labels)
        assert np.array_equal(immediate_basin_grid(grid, 3), labels == 3)

    def test_repelling_point_on_foreign_pixel(self, period_two_cycles):
        # -0.618 lands on pixel (1, 0), which is labelled infinity here
        labels = np.full((3, 3), 4, dtype=np.int32)
        grid = BasinGrid(GridSpec(3, 3, (-1.5, 1.5, -1.5, 1.5)), period_two_cycles, labels)
        assert period_two_cycles.end_names()[0].startswith("-0.618")
        mask = immediate_basin_grid(grid, 0)
        assert mask.shape == (3, 3)
        assert not mask.any()

    def test_infinity_outside_window(self, period_two_grid):
        with pytest.raises(CyclePixelOutsideWindow):
            immediate_basin_grid(period_two_grid, 4)
