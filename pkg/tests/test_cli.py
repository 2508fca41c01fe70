import json
import subprocess
import sys

import pytest

from minsurf_index import artifacts as art
from minsurf_index.cli import main

SMALL = ["--s_max", "40", "--N", "4000", "--S_sweep", "10,20,40", "--oracle_N", "400",
         "--q_s_max", "20", "--q_N", "4000", "--identity_N", "200"]


def run(tmp_path, *args):
    return main(list(args) + ["--output_dir", str(tmp_path), "--quiet"])


def test_index_subcommand(tmp_path):
    assert run(tmp_path, "index", *SMALL) == 0
    data = json.loads((tmp_path / "index.json").read_text())
    assert data["morse_index"] == 1 and data["nullity_lower_bound"] == 3


def test_report_on_plane(tmp_path):
    assert run(tmp_path, "report", "--kind", "plane") == 0
    rep = json.loads((tmp_path / "verification_report.json").read_text())
    assert rep["summary"]["failed"] == []
    assert all(set(c) == {"check_id", "paper_ref", "measured", "expected", "tol", "pass"} for c in rep["checks"])
    assert json.loads((tmp_path / "index.json").read_text())["morse_index"] == 0
    assert json.loads((tmp_path / "harmonic.json").read_text())["basis"]["dimension"] == 0


def test_identities_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "identities") == 0 and run(b, "identities") == 0
    assert (a / "identities.json").read_bytes() == (b / "identities.json").read_bytes()
    data = json.loads((a / "identities.json").read_text())
    assert data["samples"] >= 100 and len(data["identities"]) == 6


@pytest.mark.parametrize("name,files", [
    ("profile", ["profile.csv", "profile.csv.meta", "profile.json"]),
    ("curvature", ["curvature.csv", "curvature.json"]),
    ("spectrum", ["spectrum.csv", "spectrum.json", "oracle.json"]),
    ("harmonic", ["harmonic.csv", "harmonic.json"]),
    ("testfn", ["testfn.csv", "testfn.json"]),
    ("rigidity", ["rigidity.json"]),
    ("asymptotics", ["asymptotics.json"]),
])
def test_subcommand_artifacts(tmp_path, name, files):
    assert run(tmp_path, name, *SMALL) == 0
    for f in files:
        assert (tmp_path / f).exists(), f


def test_csv_headers(tmp_path):
    run(tmp_path, "spectrum", *SMALL)
    header, rows = art.read_csv(tmp_path / "spectrum.csv")
    assert header == ["S", "l", "lambda1", "lambda2", "neg_count"] and rows


def test_usage_errors(tmp_path, capsys):
    assert run(tmp_path, "index", "--bogus", "1") == 2
    assert run(tmp_path, "index", "--n", "2") == 2
    assert run(tmp_path, "index", "--S_sweep", "40,20") == 2
    assert run(tmp_path, "nonsense") == 2
    assert run(tmp_path, "index", "--config", str(tmp_path / "missing.cfg")) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key=3\n")
    assert run(tmp_path, "index", "--config", str(bad)) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n=5\ns_max=40\nN=4000\nS_sweep=10,20,40\n")
    assert run(tmp_path, "index", "--config", str(cfg), "--n", "6") == 0
    assert json.loads((tmp_path / "index.json").read_text())["surface"]["n"] == 6


def test_check_failure_exit_code(tmp_path, capsys):
    code = main(["testfn", *SMALL, "--q_tol", "1e-30", "--output_dir", str(tmp_path), "--quiet"])
    assert code == 1
    assert "FAIL variational.q_sum" in capsys.readouterr().out


def test_inconclusive_exit_code(tmp_path):
    assert run(tmp_path, "index", *SMALL, "--l_max_cap", "1") == 3


def test_cache_coherence(tmp_path, monkeypatch):
    monkeypatch.delenv(art.CACHE_ENV, raising=False)
    cold, warm, none = tmp_path / "cold", tmp_path / "warm", tmp_path / "none"
    cache = tmp_path / "cache"
    assert run(cold, "curvature", *SMALL, "--cache_dir", str(cache)) == 0
    assert any(cache.iterdir())
    assert run(warm, "curvature", *SMALL, "--cache_dir", str(cache)) == 0
    assert run(none, "curvature", *SMALL) == 0
    vals = [json.loads((d / "curvature.json").read_text())["total_curvature"] for d in (cold, warm, none)]
    assert max(vals) - min(vals) <= 1e-12 * abs(vals[0])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "minsurf_index", "profile", "--N", "100", "--s_max", "5",
                           "--S_sweep", "5", "--output_dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "PASS geometry.profile_invariants" in proc.stdout
