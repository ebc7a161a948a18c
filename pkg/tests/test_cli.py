import csv
import subprocess
import sys

import pytest

from hausdorff import cli
from hausdorff.bounds import BoundResult
from hausdorff.scenarios import SCENARIOS, scenario_text


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "hausdorff", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd)


def fields(text):
    out = {}
    for line in text.splitlines():
        k, _, v = line.partition(" = ")
        out.setdefault(k, v)
    return out


def body(text):
    return "\n".join(ln for ln in text.splitlines() if not ln.startswith("wall_time"))


@pytest.fixture
def cyclic(tmp_path):
    path = tmp_path / "cyclic.ini"
    path.write_text(scenario_text("cyclic-group"))
    return path


def test_list():
    res = run("list")
    assert res.returncode == 0
    assert [ln.split("\t")[0] for ln in res.stdout.splitlines()] == list(SCENARIOS)


def test_bound(cyclic):
    res = run("bound", cyclic)
    assert res.returncode == 0
    f = fields(res.stdout)
    assert f["report"] == "bound" and float(f["bound.value"]) == 1.0


def test_verify_writes_out_and_csv(cyclic, tmp_path):
    out, table = tmp_path / "r.txt", tmp_path / "r.csv"
    res = run("verify", cyclic, "--out", out, "--csv", table)
    assert res.returncode == 0
    assert out.read_text() == res.stdout
    f = fields(res.stdout)
    assert f["verdict"] == "DOMINANCE_OK" and f["exact_norm"] == "1.0"
    rows = list(csv.reader(table.open()))
    assert rows[0] == ["key", "value"] and ["verdict", "DOMINANCE_OK"] in rows


def test_apply_csv(tmp_path):
    cfg = tmp_path / "cesaro.ini"
    cfg.write_text(scenario_text("cesaro"))
    table = tmp_path / "hf.csv"
    res = run("apply", cfg, "--f", "1 on 0,1", "--grid", "0.5,2,4", "--csv", table)
    assert res.returncode == 0, res.stderr
    rows = list(csv.DictReader(table.open()))
    assert [float(r["Hf"]) for r in rows] == pytest.approx([1.0, 0.5, 0.25], rel=1e-6)


def test_deterministic_reports(cyclic):
    a, b = run("verify", cyclic, "--seed", "5"), run("verify", cyclic, "--seed", "5")
    assert body(a.stdout) == body(b.stdout)
    assert fields(a.stdout)["seed"] == "5"
    assert fields(run("verify", cyclic).stdout)["seed"] == "0"


def test_config_errors_exit_3(tmp_path):
    res = run("bound", tmp_path / "nope.ini")
    assert res.returncode == 3 and "CONFIG_INVALID" in res.stderr
    bad = tmp_path / "bad.ini"
    bad.write_text(scenario_text("cyclic-group").replace("order = 5", "order = 5.5"))
    res = run("verify", bad)
    assert res.returncode == 3 and "line" in res.stderr
    assert run("scenario", "no-such-thing").returncode == 3


def test_dominance_violation_exit_2(cyclic, monkeypatch, capsys):
    fake = BoundResult(0.5, "p=q<inf", "forced")
    monkeypatch.setattr(cli, "theoretical_bound", lambda *a, **k: fake)
    assert cli.main(["verify", str(cyclic)]) == 2
    assert "verdict = DOMINANCE_VIOLATED" in capsys.readouterr().out


def test_divergent_bound_is_reported_not_failed(tmp_path, capsys):
    cfg = tmp_path / "c1.ini"
    cfg.write_text(scenario_text("cesaro").replace("p = 2\nq = 2", "p = 1\nq = 1"))
    assert cli.main(["verify", str(cfg)]) == 0
    f = fields(capsys.readouterr().out)
    assert f["verdict"] == "BOUND_DIVERGENT" and f["bound.value"] == "inf"


def test_divergence_scenario(capsys):
    assert cli.main(["scenario", "p-lt-1-divergence"]) == 0
    f = fields(capsys.readouterr().out)
    assert f["report"] == "divergence" and f["monotone_growth"] == "true"
