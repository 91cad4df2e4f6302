import csv
import io
import json

import pytest

from lempert_lab.cli import main


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestCli:
    def test_bound(self, capsys):
        assert main(["bound", "--domain", "Gtilde", "--mu", "2", "--eps", "0.01",
                     "--delta", "0.005", "--strategy", "explicit-family"]) == 0
        rows = _rows(capsys.readouterr().out)
        uppers = [float(r["value"]) for r in rows if r["direction"] == "upper"]
        lowers = [float(r["value"]) for r in rows if r["direction"] == "lower"]
        assert max(lowers) <= min(uppers)

    def test_chain_minus(self, capsys):
        assert main(["chain", "--domain", "Gminus", "--mu", "2", "--eps", "0.01",
                     "--delta", "0.005"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert float(rows[0]["value"]) == pytest.approx(0.070711, abs=1e-6)

    def test_metric_json(self, capsys):
        assert main(["metric", "--domain", "Gtilde", "--eps", "0.01", "--m", "2",
                     "--strategy", "paper", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["bounds"][0]["value"] == pytest.approx(20.0)

    def test_certified_only(self, capsys):
        assert main(["bound", "--domain", "polydisc", "--z", "0,0", "--w", "0.3,0.1",
                     "--distance", "--certified-only"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert rows and all(r["grade"] == "certified" for r in rows)

    def test_sibony_point(self, capsys):
        assert main(["sibony", "--eps", "0.01", "--X", "0,1"]) == 0
        assert float(_rows(capsys.readouterr().out)[0]["value"]) >= 1

    def test_writes_files(self, tmp_path, capsys):
        out = tmp_path / "gap"
        assert main(["asymptotics", "--experiment", "kr-gap", "--out", str(out)]) == 0
        assert (tmp_path / "gap.csv").exists()
        assert "pass" in capsys.readouterr().out


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["qti", "--eps-min", "1e-2", "--eps-max", "1e-3"],
        ["qti", "--delta-rule", "eps*3"],
        ["bound", "--domain", "G", "--mu", "3", "--eps", "0.01", "--delta", "0.005"],
        ["bound", "--domain", "G"],
        ["nosuch"],
        ["bound", "--z", "a,b"],
    ])
    def test_config_errors(self, argv, capsys):
        assert main(argv) == 2

    def test_sibony_range(self, capsys):
        # eps outside (0, 1/2) is a configuration error
        assert main(["sibony", "--eps", "0.7"]) == 2

    def test_io_error(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["qti", "--out", str(blocker / "sub" / "r")]) == 1
