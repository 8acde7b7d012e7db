"""Command-line entry point"""

import csv
import json

import pytest

from natsearch.errors import ConfigError
from natsearch.main import EXIT_CONFIG, EXIT_OK, main, parse_delay, parse_value


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(
        "grid: {rows: 4, cols: 4}\n"
        "k: 2\n"
        "agents: 2\n"
        "policy: rnd\n"
        "budget: 12\n"
        "trials: 2\n"
        "seed: 5\n"
    )
    return path


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    extra = ["--no-progress"] if args[0] in ("run", "sweep") else []
    code = main(args + ["--out", str(out)] + extra)
    return code, out


class TestRun:

    def test_writes_outputs(self, config_file, tmp_path):
        code, out = run(["run", "--config", str(config_file)], tmp_path)
        assert code == EXIT_OK
        for name in ("trace.ndjson", "metrics.json", "belief.csv"):
            assert (out / name).exists()
        belief = (out / "belief.csv").read_text().splitlines()
        assert belief[0] == "cell,row,col,mu,var,gamma"
        assert len(belief) == 17

    def test_reruns_are_identical(self, config_file, tmp_path):
        _, first = run(["run", "--config", str(config_file)], tmp_path, "a")
        _, second = run(["run", "--config", str(config_file)], tmp_path, "b")
        assert (first / "trace.ndjson").read_bytes() == (second / "trace.ndjson").read_bytes()
        assert (first / "metrics.json").read_bytes() == (second / "metrics.json").read_bytes()

    def test_flags_override_file(self, config_file, tmp_path):
        _, out = run(["run", "--config", str(config_file), "--agents", "1", "--seed", "9",
                      "--policy", "point", "--drop", "0.5", "--delay", "uniform:0:1"], tmp_path)
        header = json.loads((out / "trace.ndjson").read_text().splitlines()[0])
        assert header["config"]["agents"] == 1
        assert header["config"]["policy"] == "point"
        assert header["config"]["comms"]["delay"]["kind"] == "uniform"
        assert header["seed"] == 9

    def test_missing_config(self, tmp_path):
        code, _ = run(["run", "--config", str(tmp_path / "missing.yaml")], tmp_path)
        assert code == EXIT_CONFIG

    def test_invalid_value(self, config_file, tmp_path):
        code, _ = run(["run", "--config", str(config_file), "--k", "99"], tmp_path)
        assert code == EXIT_CONFIG

    def test_unknown_preset(self, tmp_path):
        code, _ = run(["run", "--preset", "nope"], tmp_path)
        assert code == EXIT_CONFIG

    def test_bad_policy(self, tmp_path):
        code, _ = run(["run", "--policy", "greedy"], tmp_path)
        assert code == EXIT_CONFIG

    def test_terrain_preset_needs_dem(self, tmp_path):
        code, out = run(["run", "--preset", "terrain"], tmp_path)
        assert code == EXIT_CONFIG
        assert not (out / "trace.ndjson").exists()


class TestSweep:

    def test_writes_tables(self, config_file, tmp_path):
        code, out = run(["sweep", "--config", str(config_file), "--param", "agents", "--values", "1,2",
                         "--level", "0.5"], tmp_path)
        assert code == EXIT_OK
        curve = (out / "recovery_curve.csv").read_text().splitlines()
        assert curve[0] == "agents,T,recovery_rate,standard_error"
        assert len(curve) == 1 + 2 * 13
        ttr = (out / "time_to_recovery.csv").read_text().splitlines()
        assert ttr[0] == "agents,T,T_over_J,mean_travel,T_bound"
        assert [line.split(",")[0] for line in ttr[1:]] == ["1", "2"]

    def test_t_grid(self, config_file, tmp_path):
        _, out = run(["sweep", "--config", str(config_file), "--t-grid", "0,6,12"], tmp_path)
        curve = (out / "recovery_curve.csv").read_text().splitlines()
        assert curve[0] == "T,recovery_rate,standard_error"
        assert [line.split(",")[0] for line in curve[1:]] == ["0", "6", "12"]


class TestCalibrate:

    def test_writes_table(self, tmp_path, capsys):
        samples = tmp_path / "samples.csv"
        rows = ["distance,confidence,label"]
        rows += [f"{d},{c},person" for d, c in ((1, 0.9), (2, 0.95), (11, 0.7), (12, 0.8))]
        samples.write_text("\n".join(rows) + "\n")
        code, out = run(["calibrate", str(samples), "--bins", "0,10,20"], tmp_path)
        assert code == EXIT_OK
        table = list(csv.reader((out / "calibration.csv").read_text().splitlines()))
        assert table[0] == ["depth", "variance"]
        assert [row[0] for row in table[1:]] == ["10", "20"]
        snippet = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert snippet["noise"]["depths"] == [10.0, 20.0]
        assert snippet["noise"]["metric"] == "meters"

    def test_sparse_bins(self, tmp_path):
        samples = tmp_path / "samples.csv"
        samples.write_text("distance,confidence\n1,0.9\n")
        code, _ = run(["calibrate", str(samples), "--bins", "0,10"], tmp_path)
        assert code == EXIT_CONFIG

    def test_unparseable_bins(self, tmp_path):
        samples = tmp_path / "samples.csv"
        samples.write_text("distance,confidence\n1,0.9\n2,0.8\n")
        code, out = run(["calibrate", str(samples), "--bins", "0,abc"], tmp_path)
        assert code == EXIT_CONFIG
        assert not (out / "calibration.csv").exists()


class TestViewshed:

    def test_flat(self, flat_dem_file, tmp_path):
        code, out = run(["viewshed", "--dem", str(flat_dem_file), "--spacing", "3", "--node", "1,1"], tmp_path)
        assert code == EXIT_OK
        lines = (out / "viewshed.csv").read_text().splitlines()
        assert len(lines) == 10
        assert all(line.endswith("1.000000") for line in lines[1:])

    def test_node_outside(self, flat_dem_file, tmp_path):
        code, _ = run(["viewshed", "--dem", str(flat_dem_file), "--spacing", "3", "--node", "9"], tmp_path)
        assert code == EXIT_CONFIG


class TestParsing:

    def test_delay(self):
        assert parse_delay("5") == {"kind": "constant", "value": 5.0}
        assert parse_delay("uniform:1:2") == {"kind": "uniform", "low": 1.0, "high": 2.0}
        assert parse_delay("exponential:3") == {"kind": "exponential", "mean": 3.0}
        with pytest.raises(ConfigError):
            parse_delay("gamma:1")
        with pytest.raises(ConfigError):
            parse_delay("uniform:a:b")

    def test_value(self):
        assert parse_value("true") is True
        assert parse_value("3") == 3
        assert parse_value("0.25") == 0.25
        assert parse_value("nats") == "nats"
