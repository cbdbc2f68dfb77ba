import csv
import json
import os
import subprocess
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
BIN = os.environ.get("FLEXOPT_BIN", str(ROOT / "build" / "flexopt"))
DATA = Path(os.environ.get("FLEXOPT_DATA_DIR", ROOT / "data"))
BUNDLE = DATA / "bundle_seed1_168h"


def flexopt(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("FLEXOPT_SOLVER", None)
    if env:
        full_env.update(env)
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, env=full_env, timeout=600)


def write_series(path, values):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "value"])
        for t, v in enumerate(values):
            w.writerow([t, v])


def test_error_is_json_on_stderr(tmp_path):
    r = flexopt("run", "--dataset", tmp_path / "missing")
    assert r.returncode != 0
    err = json.loads(r.stderr.strip().splitlines()[-1])
    assert err["error"]["kind"] == "io"
    assert err["error"]["message"]


def test_usage_error_exit_code():
    r = flexopt("run", "--mip-gap", "abc")
    assert r.returncode == 2
    assert json.loads(r.stderr.strip().splitlines()[-1])["error"]["kind"] == "usage"


def test_unknown_solver_from_environment(tmp_path):
    r = flexopt("run", "--synth-seed", 1, "--horizon", 24, "--contexts", "c_base", "--scenarios", "REF",
                "--out", tmp_path / "s.json", env={"FLEXOPT_SOLVER": "nope"})
    assert r.returncode != 0
    assert json.loads(r.stderr.strip().splitlines()[-1])["error"]["kind"] == "solver"


def test_flat_load_metrics(tmp_path):
    prices = [30.0 + 5.0 * (t % 7) for t in range(48)]
    cefs = [0.2 + 0.01 * (t % 5) for t in range(48)]
    write_series(tmp_path / "p.csv", prices)
    write_series(tmp_path / "c.csv", cefs)
    write_series(tmp_path / "l.csv", [100.0] * 48)
    r = flexopt("metrics", "--prices", tmp_path / "p.csv", "--cefs", tmp_path / "c.csv", "--load", tmp_path / "l.csv")
    assert r.returncode == 0, r.stderr
    m = json.loads(r.stdout)
    assert abs(m["pi_rate"] - 1.0) <= 1e-12
    assert abs(m["eps_rate"] - 1.0) <= 1e-12
    assert abs(m["peak_buy"] - 100.0) <= 1e-12

    r = flexopt("metrics", "--prices", tmp_path / "p.csv", "--cefs", tmp_path / "c.csv", "--load",
                tmp_path / "l.csv", "--window", "100:5")
    assert r.returncode != 0
    assert "error" in json.loads(r.stderr.strip().splitlines()[-1])


def test_export_mps_is_readable(tmp_path):
    out = tmp_path / "cell.mps"
    r = flexopt("export_mps", "--dataset", BUNDLE, "--context", "c_base", "--scenario", "someFlex", "--out", out)
    assert r.returncode == 0, r.stderr
    text = out.read_text()
    assert text.startswith("NAME")
    assert "INTORG" in text and "INTEND" in text
    assert text.rstrip().endswith("ENDATA")
    columns = {line.split()[0] for line in text.splitlines()
               if line.startswith("    C") and "MARKER" not in line}
    assert len(columns) > 1000


def test_run_subset_and_config_precedence(tmp_path):
    cfg = tmp_path / "study.json"
    cfg.write_text(json.dumps({"scenarios": ["REF", "noFlex"], "contexts": ["c_base"]}))
    out = tmp_path / "study.json.out"
    r = flexopt("run", "--synth-seed", 1, "--horizon", 24, "--scenarios", "REF", "--config", cfg,
                "--out", out, "--format", "json")
    assert r.returncode == 0, r.stderr
    study = json.loads(out.read_text())
    assert [c["scenario"] for c in study["cells"]] == ["REF", "noFlex"]
    assert all(c["ok"] for c in study["cells"])

    csv_dir = tmp_path / "tables"
    r = flexopt("report", "--study", out, "--format", "csv-dir", "--out", csv_dir)
    assert r.returncode == 0, r.stderr
    for name in ("cells", "annual", "metrics", "flows"):
        assert (csv_dir / f"{name}.csv").exists()


def test_synth_matches_bundle(tmp_path):
    out = tmp_path / "bundle"
    r = flexopt("synth", "--synth-seed", 1, "--horizon", 168, "--synth-params", DATA / "synth_params.json",
                "--out", out)
    assert r.returncode == 0, r.stderr
    for name in ("prices.csv", "cefs.csv", "edem.csv", "pv_profile.csv"):
        assert (out / name).read_text() == (BUNDLE / name).read_text()
