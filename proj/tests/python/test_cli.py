import json
import os
import re
import subprocess
import time
import urllib.request
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
CLI = os.environ.get("AGRIMON_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="AGRIMON_CLI not set")


def run(*args, check=True):
    p = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=120)
    if check:
        assert p.returncode == 0, p.stderr
    return p


@pytest.fixture(scope="module")
def flood_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("flood")
    run("run", "--config", ROOT / "configs/default.ini", "--scenario", ROOT / "scenarios/flooding.ini",
        "--data-dir", d, "--quiet")
    return d


def test_run_writes_report(flood_dir):
    rep = json.loads((flood_dir / "report.json").read_text())
    sc = rep["scenarios"][0]
    assert sc["first_alert"] == "FloodingSuspected"
    assert sc["latency_s"] <= 2.0
    assert (flood_dir / "report.txt").read_text().startswith("run report")


def test_run_is_deterministic(flood_dir, tmp_path):
    run("run", "--config", ROOT / "configs/default.ini", "--scenario", ROOT / "scenarios/flooding.ini",
        "--data-dir", tmp_path, "--quiet")
    for name in ("readings.log", "alerts.log", "rejections.log", "report.json"):
        assert (tmp_path / name).read_bytes() == (flood_dir / name).read_bytes(), name


def test_refuses_existing_run(flood_dir):
    p = run("run", "--config", ROOT / "configs/default.ini", "--data-dir", flood_dir, check=False)
    assert p.returncode != 0
    assert "--force" in p.stderr


def test_force_overwrites(tmp_path):
    run("run", "--config", ROOT / "configs/single.ini", "--data-dir", tmp_path, "--quiet")
    run("run", "--config", ROOT / "configs/single.ini", "--data-dir", tmp_path, "--quiet", "--force",
        "--duration", "60")
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["duration_s"] == 60


def test_report_csv(flood_dir):
    p = run("report", "--data-dir", flood_dir, "--csv", "-")
    lines = p.stdout.splitlines()
    assert lines[0] == "t_s,count_per_s,aggregated"
    rows = [list(map(float, l.split(","))) for l in lines[1:]]
    assert len(rows) >= 300
    total = 0
    for t, c, agg in rows:
        total += c
        assert agg == total


def test_report_text(flood_dir):
    p = run("report", "--data-dir", flood_dir)
    assert "latency by attack" in p.stdout
    assert "FloodingSuspected" in p.stdout


def test_replay_matches(flood_dir):
    p = run("replay", "--data-dir", flood_dir, "--speed", "0")
    m = re.search(r"FloodingSuspected\s+(\d+)\s+(\d+)", p.stdout)
    assert m and m.group(1) == m.group(2) and int(m.group(1)) > 0


def test_bad_config_exits_nonzero(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[detector]\nwindow_s = -3\n")
    p = run("run", "--config", bad, "--data-dir", tmp_path / "d", check=False)
    assert p.returncode != 0
    assert "window_s" in p.stderr
    p = run("run", "--config", tmp_path / "missing.ini", check=False)
    assert p.returncode != 0


def test_wall_mode_serves(tmp_path):
    proc = subprocess.Popen([CLI, "run", "--config", str(ROOT / "configs/single.ini"), "--wall",
                             "--duration", "3", "--serve", "127.0.0.1:0", "--data-dir", str(tmp_path)],
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stdout.readline()
        m = re.search(r"http://([\d.]+:\d+)/api/", line)
        assert m, line
        time.sleep(1.5)
        with urllib.request.urlopen(f"http://{m.group(1)}/api/volume", timeout=5) as r:
            body = json.loads(r.read())
        assert body["schema_version"] == 1
        assert body["total"] > 0
    finally:
        out, err = proc.communicate(timeout=30)
    assert proc.returncode == 0, err
    assert (tmp_path / "report.json").exists()
