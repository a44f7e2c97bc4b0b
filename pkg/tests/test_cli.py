import json

import pytest

from aldouslab.cli import main


def run(argv):
    return main(argv)


class TestGapCommand:
    def test_hypercube_json(self, capsys):
        assert run(["gap", "--graph", "hypercube", "--d", "2", "--n", "3",
                    "--process", "rw"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["gap"] == pytest.approx(1.0, abs=1e-10)

    def test_rates_file(self, tmp_path, capsys):
        path = tmp_path / "q.json"
        path.write_text(json.dumps({"size": 2, "pairs": [[1, 2, 5.0]]}))
        assert run(["gap", "--rates-file", str(path)]) == 0
        assert json.loads(capsys.readouterr().out)["gap"] == pytest.approx(10.0)

    def test_output_file_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["gap", "--graph", "hypercube", "--d", "1", "--n", "4",
                "--process", "ip", "--out"]
        assert run(args + [str(a)]) == 0
        assert run(args + [str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_graph_is_usage_error(self, capsys):
        assert run(["gap"]) == 2
        assert "error" in capsys.readouterr().err

    def test_csv_not_available(self, capsys):
        assert run(["gap", "--graph", "hypercube", "--d", "1", "--n", "3",
                    "--format", "csv"]) == 2

    def test_resource_cap_is_exit_2(self, tmp_path, capsys):
        path = tmp_path / "q.json"
        path.write_text(json.dumps({"size": 10, "pairs": [[1, 2, 1.0]]}))
        assert run(["gap", "--rates-file", str(path), "--process", "ip",
                    "--ip-mode", "matrix_free"]) == 2


class TestCampaignCommands:
    def test_containment_csv(self, capsys):
        assert run(["containment", "--N", "3", "--trials", "2",
                    "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "N,trial,ok"
        assert len(lines) == 3

    def test_aldous_exhaustive_csv(self, tmp_path):
        out = tmp_path / "verdicts.csv"
        assert run(["aldous-check", "--exhaustive-z2", "--max-vertices", "4",
                    "--tol", "1e-8", "--format", "csv", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "size,points,gap_rw,gap_ip,abs_diff,holds"
        assert len(lines) == 1 + 2 + 6 + 19

    def test_trace_fuzz_negative_control_exit_1(self, tmp_path, capsys):
        out = tmp_path / "fuzz.csv"
        code = run(["trace-fuzz", "--trials-1d", "10", "--trials-nd", "2",
                    "--d-max", "1", "--n-max", "1", "--negative-control",
                    "--format", "csv", "--out", str(out)])
        assert code == 1
        assert "violation:" in capsys.readouterr().err
        assert out.read_text().splitlines()[0] == "seed,d,n,size,lhs,rhs,slack"

    def test_trace_fuzz_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["trace-fuzz", "--trials-1d", "50", "--trials-nd", "5",
                "--d-max", "2", "--n-max", "2", "--seed", "11", "--format", "csv"]
        assert run(args + ["--out", str(a)]) == 0
        assert run(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_sequence_json(self, capsys):
        assert run(["sequence", "--d", "2", "--n-max", "2"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["count"] == 3

    def test_ratio_table_csv(self, capsys):
        assert run(["ratio-table", "--d", "1", "--n-max", "4",
                    "--ip-cap", "3", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("N,n,gap_rw")
        assert len(lines) == 4


class TestConfigFile:
    def test_config_supplies_params(self, tmp_path, capsys):
        cfg = tmp_path / "job.json"
        cfg.write_text(json.dumps({
            "schema_version": 1,
            "command": "containment",
            "params": {"n_min": 3, "n_max": 3, "trials": 2, "seed": 4},
        }))
        assert run(["containment", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["rows"]) == 2

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "job.json"
        cfg.write_text(json.dumps({
            "schema_version": 1,
            "command": "containment",
            "params": {"n_min": 3, "n_max": 3, "trials": 5},
        }))
        assert run(["containment", "--config", str(cfg), "--trials", "1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["rows"]) == 1

    def test_missing_schema_version_rejected(self, tmp_path):
        cfg = tmp_path / "job.json"
        cfg.write_text(json.dumps({"command": "containment", "params": {}}))
        assert run(["containment", "--config", str(cfg)]) == 2

    def test_command_mismatch_rejected(self, tmp_path):
        cfg = tmp_path / "job.json"
        cfg.write_text(json.dumps({"schema_version": 1, "command": "gap",
                                   "params": {}}))
        assert run(["containment", "--config", str(cfg)]) == 2


class TestRemoteMode:
    def test_server_flag_posts_request(self, monkeypatch, capsys):
        from fastapi.testclient import TestClient
        from aldouslab.service import app
        client = TestClient(app)

        def fake_post(url, json=None, timeout=None):
            path = url.split("http://lab")[1]
            return client.post(path, json=json)

        import httpx
        monkeypatch.setattr(httpx, "post", fake_post)
        assert run(["gap", "--server", "http://lab", "--graph", "hypercube",
                    "--d", "2", "--n", "2"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["gap"] == pytest.approx(2.0, abs=1e-10)

    def test_server_error_maps_to_exit_2(self, monkeypatch, capsys):
        import httpx

        class Resp:
            status_code = 409
            text = "cap exceeded"

        monkeypatch.setattr(httpx, "post", lambda *a, **k: Resp())
        assert run(["gap", "--server", "http://lab", "--graph", "hypercube",
                    "--d", "1", "--n", "3"]) == 2


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
