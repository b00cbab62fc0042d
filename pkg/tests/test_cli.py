import json

import numpy as np
import pytest

from sensorcollab.cli import main, run_manifest


def _read(path):
    return path.read_bytes()


class TestRegressCommand:
    def test_noiseless_two_sensors(self, tmp_path, capsys):
        code = main(["regress", "--sensors", "2", "--sigma", "0",
                     "--out-dir", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "estimate_variance" in out
        rows = (tmp_path / "rounds.csv").read_text().strip().splitlines()
        assert rows[0] == "round,test_error,estimate_variance"
        final_variance = float(rows[-1].split(",")[2])
        assert final_variance <= 1e-12

    def test_default_run_error_decreases(self, tmp_path):
        code = main(["regress", "--seed", "7", "--out-dir", str(tmp_path)])
        assert code == 0
        rows = (tmp_path / "rounds.csv").read_text().strip().splitlines()[1:]
        first = float(rows[0].split(",")[1])
        last = float(rows[-1].split(",")[1])
        assert first > last
        marginals = (tmp_path / "marginals.csv").read_text().strip().splitlines()
        assert marginals[0] == "sensor,mean,variance"
        assert len(marginals) == 51

    def test_invalid_radius_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["regress", "--radius", "-1", "--out-dir", str(tmp_path)])
        assert exc.value.code == 2

    def test_manifest_rerun_is_bit_identical(self, tmp_path):
        first = tmp_path / "a"
        code = main(["regress", "--sensors", "12", "--seed", "3",
                     "--out-dir", str(first)])
        assert code == 0
        manifest = json.loads((first / "manifest.json").read_text())
        assert set(manifest["artifacts"]) == {"rounds.csv", "marginals.csv"}
        second = tmp_path / "b"
        assert run_manifest(first / "manifest.json", second) == 0
        for name in manifest["artifacts"]:
            assert _read(first / name) == _read(second / name)


class TestClassifyCommand:
    def test_synthetic_smoke(self, tmp_path, capsys):
        code = main(["classify", "--synthetic", "--rows", "400", "--features", "8",
                     "--sensors", "4", "--particles", "2", "--rounds", "60",
                     "--trace-every", "20", "--seed", "5", "--out-dir", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "sampler median" in out
        trace = (tmp_path / "trace.csv").read_text().strip().splitlines()
        assert trace[0] == "round,sensor,test_error"
        hist = (tmp_path / "histogram.csv").read_text().strip().splitlines()
        assert hist[0] == "sensor,test_error_before,test_error_after"
        assert len(hist) == 5

    def test_single_sensor_matches_noncollaborative(self, tmp_path):
        code = main(["classify", "--synthetic", "--rows", "300", "--sensors", "1",
                     "--particles", "3", "--rounds", "40", "--seed", "6",
                     "--out-dir", str(tmp_path)])
        assert code == 0
        rows = (tmp_path / "histogram.csv").read_text().strip().splitlines()[1:]
        for row in rows:
            _, before, after = row.split(",")
            assert float(before) == float(after)

    def test_zero_rounds_matches_noncollaborative(self, tmp_path):
        code = main(["classify", "--synthetic", "--rows", "300", "--sensors", "3",
                     "--particles", "2", "--rounds", "0", "--seed", "8",
                     "--out-dir", str(tmp_path)])
        assert code == 0
        rows = (tmp_path / "histogram.csv").read_text().strip().splitlines()[1:]
        for row in rows:
            _, before, after = row.split(",")
            assert float(before) == float(after)

    def test_missing_dataset_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["classify", "--data", str(tmp_path / "nope.data"),
                  "--out-dir", str(tmp_path)])
        assert exc.value.code == 2

    def test_no_source_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["classify", "--out-dir", str(tmp_path)])
        assert exc.value.code == 2

    def test_manifest_rerun_is_bit_identical(self, tmp_path):
        first = tmp_path / "a"
        code = main(["classify", "--synthetic", "--rows", "240", "--sensors", "3",
                     "--particles", "2", "--rounds", "30", "--seed", "9",
                     "--out-dir", str(first)])
        assert code == 0
        second = tmp_path / "b"
        assert run_manifest(first / "manifest.json", second) == 0
        for name in ("trace.csv", "histogram.csv"):
            assert _read(first / name) == _read(second / name)


class TestOracleCommand:
    def test_small_run_passes(self, tmp_path, capsys):
        code = main(["oracle", "--seeds", "3", "--gibbs-instances", "1",
                     "--gibbs-steps", "20000", "--out-dir", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out
        assert (tmp_path / "oracle_report.txt").exists()

    def test_oversized_instance_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["oracle", "--sensors", "10", "--out-dir", str(tmp_path)])
        assert exc.value.code == 2

    def test_discrete_instances_all_agree(self, tmp_path, capsys):
        code = main(["oracle", "--seeds", "25", "--gibbs-instances", "1",
                     "--gibbs-steps", "15000", "--seed", "4",
                     "--out-dir", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("discrete-vs-likelihood-ratio") == 25


class TestManifestContents:
    def test_all_defaults_materialized(self, tmp_path):
        main(["regress", "--sensors", "5", "--out-dir", str(tmp_path)])
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        config = manifest["config"]
        assert config["num_sensors"] == 5
        assert config["radius"] == 0.2
        assert config["bootstrap_reps"] == 100
        assert config["edge_variance"] == 1e-8
        assert manifest["seed"] == 0
        assert manifest["subcommand"] == "regress"
