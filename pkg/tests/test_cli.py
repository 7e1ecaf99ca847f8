import json

import pytest

from config import EXIT_IO, EXIT_OK, EXIT_USAGE
from core.errors import InvalidParams, ParseError
from exdyn import build_parser, main
from utils.cli_helpers import RunConfig, join_negative_values, parse_grid_size, parse_window
from utils.report_io import parse_finite_instance


def _write(path, document):
    path.write_text(json.dumps(document))
    return str(path)


def _read(path):
    return json.loads(path.read_text())


class TestHelpers:
    def test_negative_window(self):
        argv = ["basins", "--window", "-2,2,-2,2", "--map", "z^2"]
        assert join_negative_values(argv) == ["basins", "--window=-2,2,-2,2", "--map", "z^2"]

    def test_grid_size(self):
        assert parse_grid_size("800x600") == (800, 600)
        with pytest.raises(InvalidParams):
            parse_grid_size("800")

    def test_window(self):
        assert parse_window("-2,2,-1.5,1.5") == (-2.0, 2.0, -1.5, 1.5)
        with pytest.raises(InvalidParams):
            parse_window("2,-2,0,1")

    def test_run_config_for_basins(self):
        args = build_parser().parse_args(["basins", "--map", "z^2-1", "--period", "2", "--grid", "4x2",
                                          "--window=-2,2,-1,1", "--max-iterations", "50", "--out", "b.ppm"])
        config = RunConfig.from_args(args)
        assert config.subcommand == "basins"
        assert config.grid_size == (4, 2)
        assert config.window == (-2.0, 2.0, -1.0, 1.0)
        assert config.params.max_iterations == 50
        assert config.paths == {"out": "b.ppm"}

    def test_run_config_for_verify(self):
        args = build_parser().parse_args(["finite", "verify", "--max-size", "3", "--seed", "7"])
        config = RunConfig.from_args(args)
        assert (config.subcommand, config.max_size, config.seed) == ("finite-verify", 3, 7)
        assert config.params is None
        assert config.path("out") is None


class TestFinite:
    def test_analyze(self, tmp_path):
        source = _write(tmp_path / "g.json", {"size": 4, "map": [1, 2, 0, 1], "topology": "discrete"})
        out = tmp_path / "report.json"
        assert main(["finite", "analyze", "--input", source, "--out", str(out)]) == EXIT_OK
        report = _read(out)
        assert report["sets"]["periodic"] == [0, 1, 2]
        assert report["externologies"]["right"]["L"] == [0, 1, 2]
        assert report["failures_under_hypotheses"] == []

    def test_sierpinski_is_informational(self, tmp_path):
        source = _write(tmp_path / "s.json", {"map": [1, 1], "topology": {"min_open": [[0], [0, 1]]}})
        out = tmp_path / "report.json"
        assert main(["finite", "analyze", "--input", source, "--out", str(out), "--cross-check"]) == EXIT_OK
        periodic = _read(out)["theorem_results"]["periodic_limit"]
        assert periodic == {"holds": False, "hypothesis_satisfied": False, "witness": [0]}

    def test_malformed_json(self, tmp_path):
        source = tmp_path / "bad.json"
        source.write_text("{not json")
        assert main(["finite", "analyze", "--input", str(source)]) == EXIT_USAGE

    def test_discontinuous_map(self, tmp_path):
        source = _write(tmp_path / "s.json", {"map": [1, 0], "topology": {"min_open": [[0], [0, 1]]}})
        assert main(["finite", "analyze", "--input", source]) == EXIT_USAGE

    def test_missing_input(self, tmp_path):
        assert main(["finite", "analyze", "--input", str(tmp_path / "absent.json")]) == EXIT_IO

    def test_verify(self, tmp_path):
        out = tmp_path / "summary.json"
        code = main(["finite", "verify", "--max-size", "2", "--trials", "3", "--seed", "42", "--out", str(out)])
        assert code == EXIT_OK
        summary = _read(out)
        assert summary["checked"] == 5
        assert summary["hypothesis_satisfied_failures"] == 0


class TestInstances:
    def test_specialization_pairs(self, sierpinski):
        _, expected = sierpinski
        _, topo, _ = parse_finite_instance({"map": [1, 1], "topology": {"specialization": [[1, 0]]}})
        assert topo == expected

    def test_specialization_is_transitive(self):
        _, topo, _ = parse_finite_instance({"map": [0, 1, 2], "topology": {"specialization": [[2, 1], [1, 0]]}})
        assert topo.min_open[2] == {0, 1, 2}
        assert topo.min_open[0] == {0}

    def test_indiscrete(self):
        _, topo, _ = parse_finite_instance({"map": [1, 0, 0], "topology": "indiscrete"})
        assert all(u == {0, 1, 2} for u in topo.min_open)
        assert topo.is_regular and not topo.is_discrete

    def test_target_key(self):
        assert parse_finite_instance({"map": [0, 0], "target": [1]})[2] == {1}
        assert parse_finite_instance({"map": [0, 0], "S": [1], "target": [1]})[2] == {1}
        with pytest.raises(ParseError):
            parse_finite_instance({"map": [0, 0], "S": [0], "target": [1]})

    @pytest.mark.parametrize("topology", ["coarse", {"specialization": [[0, 5]]}, {"specialization": [[0]]}])
    def test_bad_topology(self, topology):
        with pytest.raises(ParseError):
            parse_finite_instance({"map": [0, 0], "topology": topology})

    def test_indiscrete_from_the_command_line(self, tmp_path):
        source = _write(tmp_path / "i.json", {"map": [1, 0], "topology": "indiscrete", "target": [0]})
        out = tmp_path / "report.json"
        assert main(["finite", "analyze", "--input", source, "--out", str(out)]) == EXIT_OK
        report = _read(out)
        assert report["S"] == [0]
        assert report["discrete"] is False


class TestComplex:
    def test_cycles(self, tmp_path):
        out = tmp_path / "cycles.json"
        assert main(["cycles", "--map", "z^2-1", "--period", "2", "--out", str(out)]) == EXIT_OK
        document = _read(out)
        assert document["point_count"] == 5
        assert document["cycles"][2]["class"] == "superattracting"
        assert document["cycles"][-1]["points"] == ["inf"]

    def test_bad_map(self):
        assert main(["cycles", "--map", "z", "--period", "1"]) == EXIT_USAGE

    def test_basins_refine_immediate(self, tmp_path):
        common = ["--map", "z^2-1", "--grid", "8x8", "--window", "-2,2,-2,2", "--workers", "1",
                  "--max-iterations", "200"]
        for period in ("1", "2"):
            code = main(["basins", "--period", period, *common,
                         "--out", str(tmp_path / f"p{period}.ppm"),
                         "--stats", str(tmp_path / f"p{period}.json"),
                         "--grid-out", str(tmp_path / f"p{period}.grid")])
            assert code == EXIT_OK
        assert (tmp_path / "p2.ppm").read_bytes().startswith(b"P6\n8 8\n255\n")
        assert _read(tmp_path / "p2.json")["width"] == 8

        refine_out = tmp_path / "refine.json"
        code = main(["refine", "--a", str(tmp_path / "p1.grid"), "--b", str(tmp_path / "p2.grid"),
                     "--out", str(refine_out)])
        assert code == EXIT_OK
        assert _read(refine_out)["pixels"] == 64

        mask_stats = tmp_path / "mask.json"
        code = main(["immediate", "--grid", str(tmp_path / "p2.grid"), "--end", "0+0i",
                     "--out", str(tmp_path / "mask.ppm"), "--stats", str(mask_stats)])
        assert code == EXIT_OK
        assert _read(mask_stats)["label"] == 3

        code = main(["immediate", "--grid", str(tmp_path / "p2.grid"), "--end", "inf"])
        assert code == EXIT_USAGE

    def test_basins_are_deterministic(self, tmp_path):
        outputs = []
        for run in ("a", "b"):
            image, stats = tmp_path / f"{run}.ppm", tmp_path / f"{run}.json"
            main(["basins", "--map", "z^2-1", "--period", "2", "--grid", "6x4", "--window", "-2,2,-1,1",
                  "--max-iterations", "100", "--out", str(image), "--stats", str(stats)])
            outputs.append((image.read_bytes(), stats.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_sphere_view(self, tmp_path):
        image, stats = tmp_path / "sphere.ppm", tmp_path / "sphere.json"
        code = main(["basins", "--map", "z^2-1", "--period", "2", "--sphere", "--sphere-size", "9", "--tilt", "0",
                     "--max-iterations", "200", "--workers", "1", "--out", str(image), "--stats", str(stats)])
        assert code == EXIT_OK
        header = b"P6\n9 9\n255\n"
        data = image.read_bytes()
        assert data.startswith(header)
        centre = len(header) + (4 * 9 + 4) * 3
        assert data[centre:centre + 3] == bytes([139, 69, 19])
        assert _read(stats)["view"] == "sphere"

    def test_sphere_refuses_grid_file(self, tmp_path):
        code = main(["basins", "--map", "z^2-1", "--period", "1", "--sphere", "--sphere-size", "3",
                     "--grid-out", str(tmp_path / "s.grid")])
        assert code == EXIT_USAGE

    def test_run_config_sphere(self):
        args = build_parser().parse_args(["basins", "--map", "z^2-1", "--period", "1", "--sphere", "--tilt", "30"])
        config = RunConfig.from_args(args)
        assert config.sphere.tilt == 30.0
        assert RunConfig.from_args(build_parser().parse_args(["basins", "--map", "z^2", "--period", "1"])).sphere is None

    def test_unwritable_image(self, tmp_path):
        code = main(["basins", "--map", "z^2-1", "--period", "1", "--grid", "2x2",
                     "--out", str(tmp_path / "missing" / "x.ppm")])
        assert code == EXIT_IO

    def test_period_cap(self):
        assert main(["basins", "--map", "z^2-1", "--period", "4", "--grid", "2x2"]) == EXIT_USAGE


class TestGoldenRun:
    ARGS = ["basins", "--map", "z^2-1", "--period", "2", "--grid", "32x32", "--window", "-2,2,-2,2",
            "--max-iterations", "200", "--workers", "1"]

    def test_basins_match_golden_files(self, tmp_path, golden_dir):
        image, stats = tmp_path / "basins.ppm", tmp_path / "basins.json"
        assert main(self.ARGS + ["--out", str(image), "--stats", str(stats)]) == EXIT_OK
        assert image.read_bytes() == (golden_dir / "basins_z2m1_p2_32.ppm").read_bytes()
        document = _read(stats)
        cycles = document.pop("cycles")
        assert cycles["period"] == 2
        assert cycles["cycles"][-1]["points"] == ["inf"]
        assert document == _read(golden_dir / "basins_z2m1_p2_32.json")


def test_missing_subcommand():
    assert main([]) == EXIT_USAGE
