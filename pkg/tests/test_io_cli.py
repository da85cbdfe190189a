import json
from fractions import Fraction

import numpy as np
import pytest

import extremal_copulas as xc
from extremal_copulas import io
from extremal_copulas.cli import run_cli
from extremal_copulas.errors import InvalidMeasureError

F = Fraction


class TestJsonRoundTrips:
    def test_segment_measure_exact(self, tmp_path):
        sm = xc.tent_copula(F(1, 3))  # non-dyadic rationals
        path = tmp_path / "tent.json"
        io.save_segment_measure(sm, path)
        assert io.load_segment_measure(path) == sm

    def test_transformed_measure_exact(self, tmp_path):
        sm = xc.shift_transform(xc.four_line_3d(), (F(1, 7), F(2, 5), F(1, 3)))
        path = tmp_path / "m.json"
        io.save_segment_measure(sm, path)
        assert io.load_segment_measure(path) == sm

    def test_grid_measure(self, tmp_path):
        gm = xc.GridMeasure(xc.GridSpec(2, 2), 40, np.array([[12, 8], [8, 12]]))
        path = tmp_path / "g.json"
        io.save_grid_measure(gm, path)
        assert io.load_grid_measure(path) == gm

    def test_grid_density(self, tmp_path):
        d = xc.grid_density_from_copula(xc.FGM(1), 2)
        path = tmp_path / "d.json"
        io.save_grid_density(d, path)
        assert io.load_grid_density(path) == d

    def test_piecewise_linear_map(self, tmp_path):
        plm = xc.PiecewiseLinearMap(
            (0, F(1, 2), 1), [[(1, 0), (2, 0)], [(1, 0), (-2, 2)]]
        )
        path = tmp_path / "plm.json"
        io.save_piecewise_linear_map(plm, path)
        loaded = io.load_piecewise_linear_map(path)
        assert loaded.breakpoints == plm.breakpoints
        assert loaded.coeffs == plm.coeffs

    def test_mixed_measure(self, tmp_path):
        mm = xc.MixedMeasure(
            F(1, 4),
            xc.grid_density_from_copula(xc.Independence(2), 2),
            xc.tent_copula(F(2, 7)),
        )
        path = tmp_path / "mm.json"
        io.save_mixed_measure(mm, path)
        loaded = io.load_mixed_measure(path)
        assert loaded.ac_weight == mm.ac_weight
        assert loaded.singular == mm.singular
        assert loaded.density == mm.density

    def test_random_constructions_round_trip(self, tmp_path):
        from helpers import random_construction

        rng = np.random.default_rng(91)
        for i in range(15):
            sm = random_construction(rng)
            path = tmp_path / f"rt{i}.json"
            io.save_segment_measure(sm, path)
            assert io.load_segment_measure(path) == sm

    def test_unknown_major_version_rejected(self, tmp_path):
        sm = xc.tent_copula(F(1, 2))
        path = tmp_path / "v.json"
        io.save_segment_measure(sm, path)
        doc = json.loads(path.read_text())
        doc["format"] = "segment-measure/2.0"
        path.write_text(json.dumps(doc))
        with pytest.raises(InvalidMeasureError, match="version"):
            io.load_segment_measure(path)

    def test_wrong_document_kind_rejected(self, tmp_path):
        gm = xc.GridMeasure(xc.GridSpec(2, 2), 4, np.ones((2, 2), dtype=int))
        path = tmp_path / "k.json"
        io.save_grid_measure(gm, path)
        with pytest.raises(InvalidMeasureError):
            io.load_segment_measure(path)

    def test_dispatching_loader(self, tmp_path):
        sm = xc.tent_copula(F(1, 2))
        p1 = tmp_path / "a.json"
        io.save_segment_measure(sm, p1)
        assert isinstance(io.load_measure(p1), xc.SegmentMeasure)


class TestCsv:
    def test_sample_csv_seventeen_digits(self, tmp_path):
        pts = xc.sample(xc.tent_copula(F(1, 2)), 50, seed=3)
        path = tmp_path / "pts.csv"
        io.write_samples_csv(pts, path)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "x1,x2"
        loaded = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        assert np.array_equal(loaded, pts)

    def test_plot_data_rows(self, tmp_path):
        path = tmp_path / "p.csv"
        io.emit_plot_data(xc.tent_copula(F(1, 2)), path)
        assert len(path.read_text().strip().splitlines()) == 3  # header + 2

        io.emit_plot_data(xc.four_line_3d(), path)
        rows = path.read_text().strip().splitlines()
        assert len(rows) == 5
        assert all(r.split(",")[0] == "0.25" for r in rows[1:])

    def test_plot_data_round_trip(self, tmp_path):
        sm = xc.approximate(xc.Independence(2), 8).measure
        path = tmp_path / "a.csv"
        io.emit_plot_data(sm, path)
        rows = path.read_text().strip().splitlines()
        assert len(rows) == 1 + 64
        # dyadic coordinates survive the float round trip exactly
        loaded = io.load_plot_data(path)
        assert loaded == sm

    def test_plot_data_dimension_guard(self, tmp_path):
        sm = xc.tent_copula(F(1, 2), n=4)
        with pytest.raises(Exception):
            io.emit_plot_data(sm, tmp_path / "x.csv")


class TestCli:
    def test_validate_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "tent.json"
        assert run_cli(["gen", "tent", "--t", "1/2", "--out", str(out)]) == 0
        capsys.readouterr()
        assert run_cli(["validate", "--measure", str(out), "--m", "100"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["ok"] is True and report["max_deviation"] == "0"

    def test_dist_matches_library(self, capsys):
        assert run_cli(["dist", "--a", "pi", "--b", "m", "--r", "64"]) == 0
        report = json.loads(capsys.readouterr().out)
        lib = xc.dinf_distance(xc.Independence(2), xc.Comonotone(2), 64)
        assert report["estimate"] == lib.estimate == 0.25

    def test_gen_perm_then_validate(self, tmp_path, capsys):
        out = tmp_path / "p.json"
        assert run_cli(["gen", "perm", "--m", "3", "--perm", "2=2,1,0",
                        "--out", str(out)]) == 0
        capsys.readouterr()
        assert run_cli(["validate", "--measure", str(out), "--m", "3"]) == 0
        assert json.loads(capsys.readouterr().out)["ok"] is True

    def test_usage_error_exit_2(self, capsys):
        assert run_cli(["dist", "--a", "pi"]) == 2
        assert run_cli(["no-such-command"]) == 2

    def test_domain_error_exit_1(self, capsys):
        assert run_cli(["gen", "tent", "--t", "1.5"]) == 1
        assert "error" in capsys.readouterr().err

    def test_approx_report(self, tmp_path, capsys):
        out = tmp_path / "a.json"
        code = run_cli(["approx", "--copula", "fgm:1", "--m", "8", "--out", str(out)])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["lattice_dinf"] <= report["certified_bound"]
        assert xc.validate_copula_measure(io.load_segment_measure(out), 8).ok

    def test_check_mp(self, tmp_path, capsys):
        plm_path = tmp_path / "doubling.json"
        io.save_piecewise_linear_map(xc.PiecewiseLinearMap.times_mod_one(2), plm_path)
        assert run_cli(["check", "mp", "--map", str(plm_path), "--r", "256"]) == 0
        assert json.loads(capsys.readouterr().out)["ok"] is True

    def test_gen_graph_emits_segments(self, tmp_path, capsys):
        plm_path = tmp_path / "doubling.json"
        io.save_piecewise_linear_map(xc.PiecewiseLinearMap.times_mod_one(2), plm_path)
        out = tmp_path / "graph.json"
        assert run_cli(["gen", "graph", "--map", str(plm_path),
                        "--out", str(out)]) == 0
        capsys.readouterr()
        sm = io.load_segment_measure(out)
        assert len(sm.segments) == 2
        assert xc.validate_copula_measure(sm, 16).ok

    def test_analyze_cover_and_extremality(self, tmp_path, capsys):
        seg = tmp_path / "four.json"
        run_cli(["gen", "fourline3d", "--out", str(seg)])
        capsys.readouterr()
        assert run_cli(["analyze", "cover", "--measure", str(seg), "--r", "8"]) == 0
        assert json.loads(capsys.readouterr().out)["covered"] is False
        assert run_cli(["analyze", "extremality", "--measure", str(seg)]) == 0
        assert json.loads(capsys.readouterr().out)["status"] == "NECESSARY_CONDITION_PASSED"

    def test_analyze_decompose_builtin_density(self, capsys):
        assert run_cli(["analyze", "decompose", "--density", "fgm:1:4"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["square"]["edge"] == "1"

    def test_optimize_and_witness(self, tmp_path, capsys):
        wit = tmp_path / "w.json"
        code = run_cli([
            "optimize", "--marginals", "uniform:0,1", "uniform:0,1",
            "--g", "x1*x2", "--k", "8", "--sense", "max", "--witness", str(wit),
        ])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["value"] == pytest.approx(1 / 3, abs=0.02)
        assert xc.validate_copula_measure(io.load_segment_measure(wit), 8).ok

    def test_optimize_three_marginals_local_solver(self, capsys):
        code = run_cli([
            "optimize", "--marginals", "uniform:0,1", "uniform:0,1", "uniform:0,1",
            "--g-builtin", "product", "--k", "4", "--restarts", "10",
        ])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["solver"] == "local"
        assert report["value"] == pytest.approx(0.25, abs=0.03)  # E[X^3]

    def test_approx_accepts_measure_file(self, tmp_path, capsys):
        seg = tmp_path / "tent.json"
        run_cli(["gen", "tent", "--t", "0.5", "--out", str(seg)])
        capsys.readouterr()
        assert run_cli(["approx", "--copula", str(seg), "--m", "8"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["lattice_dinf"] <= report["certified_bound"]

    def test_match_prob(self, capsys):
        code = run_cli([
            "match-prob", "--fx", "uniform:0,1", "--fy", "uniform:0,1",
            "--schedule", "0.25:16",
        ])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["estimate"] == 1.0

    def test_sample_csv(self, tmp_path, capsys):
        seg = tmp_path / "tent.json"
        run_cli(["gen", "tent", "--t", "0.5", "--out", str(seg)])
        capsys.readouterr()
        out = tmp_path / "pts.csv"
        code = run_cli(["sample", "--measure", str(seg), "--count", "10",
                        "--seed", "3", "--out", str(out)])
        assert code == 0
        assert len(out.read_text().strip().splitlines()) == 11
        # deterministic under the same seed
        again = tmp_path / "pts2.csv"
        run_cli(["sample", "--measure", str(seg), "--count", "10",
                 "--seed", "3", "--out", str(again)])
        assert out.read_text().splitlines()[1:] == again.read_text().splitlines()[1:]

    def test_config_supplies_defaults_flags_win(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("r = 16\n")
        assert run_cli(["dist", "--a", "pi", "--b", "m", "--config", str(cfg)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["certified_bound"] == pytest.approx(0.25 + 2 / 16)
        assert run_cli(["dist", "--a", "pi", "--b", "m", "--config", str(cfg),
                        "--r", "64"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["certified_bound"] == pytest.approx(0.25 + 2 / 64)

    def test_config_seed_and_out_dir(self, tmp_path, capsys):
        seg = tmp_path / "tent.json"
        run_cli(["gen", "tent", "--t", "0.5", "--out", str(seg)])
        capsys.readouterr()
        cfg = tmp_path / "cfg.toml"
        out_dir = tmp_path / "runs"
        cfg.write_text(f'seed = 9\ncount = 5\nout_dir = "{out_dir}"\n')
        assert run_cli(["sample", "--measure", str(seg), "--out", "pts.csv",
                        "--config", str(cfg)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["seed"] == 9 and report["count"] == 5
        assert (out_dir / "pts.csv").exists()
        # explicit flag beats the config seed
        assert run_cli(["sample", "--measure", str(seg), "--out", "pts2.csv",
                        "--config", str(cfg), "--seed", "4"]) == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 4

    def test_plot_data_command(self, tmp_path, capsys):
        seg = tmp_path / "tent.json"
        run_cli(["gen", "tent", "--t", "0.5", "--out", str(seg)])
        capsys.readouterr()
        out = tmp_path / "plot.csv"
        assert run_cli(["plot-data", "--measure", str(seg), "--out", str(out)]) == 0
        assert json.loads(capsys.readouterr().out)["rows"] == 2
