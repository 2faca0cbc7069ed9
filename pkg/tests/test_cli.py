import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from interactionkit.cli import main
from interactionkit.game import SoumGame, TabularGame, soum_load, tabular_dump
from interactionkit.index import read_estimate_csv

SVG = "{http://www.w3.org/2000/svg}"


def run(capsys, *argv):
    assert main([str(a) for a in argv]) == 0
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def fail(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main([str(a) for a in argv])
    assert exc.value.code == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    return json.loads(err[0])


def test_soum_gen(tmp_path, capsys):
    a, b = tmp_path / "a.soum", tmp_path / "b.soum"
    run(capsys, "soum-gen", "--n", 12, "--terms", 50, "--seed", 1, "--out", a)
    run(capsys, "soum-gen", "--n", 12, "--terms", 50, "--seed", 1, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    game = soum_load(a)
    assert game.n == 12 and game.num_terms == 50


def test_soum_gen_player_cap(tmp_path, capsys):
    err = fail(capsys, "soum-gen", "--n", 40, "--out", tmp_path / "g.soum")
    assert "40" in err["message"]


def test_exact_oracles_agree(tmp_path, capsys):
    g = tmp_path / "g.soum"
    run(capsys, "soum-gen", "--n", 12, "--seed", 3, "--out", g)
    a = run(capsys, "exact", "--game", g, "--oracle", "brute", "--out", tmp_path / "brute")
    b = run(capsys, "exact", "--game", g, "--oracle", "soum", "--out", tmp_path / "soum")
    assert a["queries"] == 4096 and b["queries"] == 0
    x = read_estimate_csv(tmp_path / "brute" / "exact_sii_k2.csv")
    y = read_estimate_csv(tmp_path / "soum" / "exact_sii_k2.csv")
    assert np.array_equal(x.keys, y.keys)
    assert np.max(np.abs(x.scores - y.scores)) <= 1e-9


def test_exact_tabular_unanimity(tmp_path, capsys):
    table = SoumGame(4, [0b0011], [1.0]).values(np.arange(16))
    tabular_dump(TabularGame(4, table), tmp_path / "u.tab")
    run(capsys, "exact", "--game", tmp_path / "u.tab", "--out", tmp_path)
    m = read_estimate_csv(tmp_path / "exact_sii_k2.csv")
    assert m[0b0011] == 1.0
    assert np.count_nonzero(m.scores) == 1


def test_exact_order_too_large(tmp_path, capsys):
    err = fail(capsys, "exact", "--n", 4, "--order", 5, "--out", tmp_path)
    assert err["error"] == "ParameterError"


def test_approx_full_budget_matches_exact(tmp_path, capsys):
    run(capsys, "exact", "--n", 12, "--seed", 2, "--out", tmp_path / "e")
    out = run(capsys, "approx", "--n", 12, "--seed", 2, "--budget", 4096, "--out", tmp_path / "a")
    assert out["calls_used"] == 4096
    x = read_estimate_csv(tmp_path / "e" / "exact_sii_k2.csv")
    y = read_estimate_csv(tmp_path / "a" / "estimate_sii_k2.csv")
    assert np.max(np.abs(x.scores - y.scores)) <= 1e-9


def test_approx_perm_sii_deterministic(tmp_path, capsys):
    for d in ("x", "y"):
        run(capsys, "approx", "--method", "perm-sii", "--n", 8, "--seed", 4, "--budget", 300, "--out", tmp_path / d)
    assert (tmp_path / "x" / "estimate_sii_k2.csv").read_bytes() == (tmp_path / "y" / "estimate_sii_k2.csv").read_bytes()


def test_approx_multi_request(tmp_path, capsys):
    out = run(
        capsys, "approx", "--n", 10, "--budget", 400,
        "--order", 2, "--order", 3, "--kind", "sii", "--kind", "bii", "--out", tmp_path,
    )
    assert sorted(p.rsplit("/", 1)[-1] for p in out["files"]) == [
        "estimate_bii_k2.csv", "estimate_bii_k3.csv", "estimate_sii_k2.csv", "estimate_sii_k3.csv",
    ]
    assert out["calls_used"] == 400
    with open(tmp_path / "diagnostics.csv") as fh:
        assert int(next(csv.DictReader(fh))["calls_total"]) == 400


def test_approx_budget_floor(tmp_path, capsys):
    err = fail(capsys, "approx", "--n", 8, "--budget", 10, "--out", tmp_path)
    assert err["error"] == "ParameterError"


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("INTERACTIONKIT_SEED", "17")
    a = run(capsys, "approx", "--n", 8, "--budget", 100, "--out", tmp_path / "a")
    b = run(capsys, "approx", "--n", 8, "--budget", 100, "--seed", 17, "--out", tmp_path / "b")
    assert a["seed"] == b["seed"] == 17
    assert (tmp_path / "a" / "estimate_sii_k2.csv").read_bytes() == (tmp_path / "b" / "estimate_sii_k2.csv").read_bytes()


def test_sweep_counts_and_plot(tmp_path, capsys):
    out = run(
        capsys, "sweep", "--n", 8, "--budgets", "60,80,100,150,200", "--runs", 10,
        "--plot", "--out", tmp_path,
    )
    # perm-sti at order 2 estimates STI, svarm-iq and perm-sii estimate SII: three (method, kind) series
    assert out["records"] == 150
    with open(tmp_path / "sweep.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 150
    with open(tmp_path / "aggregate.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 15
    svg = tmp_path / "mse_sii_k2.svg"
    assert svg.stat().st_size < 1_000_000
    root = ET.parse(svg).getroot()
    paths = [p for p in root.iter(f"{SVG}path") if p.get("class") == "series"]
    assert sorted(p.get("data-method") for p in paths) == ["perm-sii", "svarm-iq"]
    labels = {t.get("class") for t in root.iter(f"{SVG}text")}
    assert {"xlabel", "ylabel"} <= labels
    assert "href" not in svg.read_text()

    # SVG is regenerable from the aggregate CSV alone
    run(capsys, "plot", "--aggregate", tmp_path / "aggregate.csv", "--out", tmp_path / "again")
    assert (tmp_path / "again" / "mse_sii_k2.svg").read_text() == svg.read_text()


def test_sweep_all_methods_one_chart(tmp_path, capsys):
    run(
        capsys, "sweep", "--n", 7, "--budgets", "60,100", "--runs", 2, "--kind", "sti",
        "--method", "svarm-iq", "--method", "perm-sti", "--method", "perm-sii", "--plot", "--out", tmp_path,
    )
    root = ET.parse(tmp_path / "mse_sti_k2.svg").getroot()
    assert len([p for p in root.iter(f"{SVG}path") if p.get("class") == "series"]) == 2


def test_bounds_constant_game(tmp_path, capsys):
    tabular_dump(TabularGame(6, np.full(64, 2.5)), tmp_path / "c.tab")
    run(capsys, "bounds", "--game", tmp_path / "c.tab", "--budget", 300, "--max-border", 1, "--out", tmp_path)
    with open(tmp_path / "bounds.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 15
    assert all(float(v) == 0.0 for r in rows for key, v in r.items() if key != "K")


def test_bounds_empirical(tmp_path, capsys):
    out = run(
        capsys, "bounds", "--n", 6, "--terms", 20, "--budget", 494, "--max-border", 1,
        "--empirical", 300, "--eps", "0.05,0.1,0.02", "--out", tmp_path,
    )
    assert out["variance_bound_holds"] is True
    with open(tmp_path / "bounds.csv") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames
        rows = list(reader)
    assert cols[2:5] == ["chebyshev_0.1", "chebyshev_0.05", "chebyshev_0.02"]
    for r in rows:
        for name in ("chebyshev", "hoeffding"):
            vals = [float(r[f"{name}_{e}"]) for e in ("0.1", "0.05", "0.02")]
            assert vals == sorted(vals)
        assert r["variance_bound_holds"] == "true"


def test_error_is_one_json_line(capsys):
    err = fail(capsys, "approx", "--n", 8)
    assert err["error"] == "UsageError"
    err = fail(capsys, "exact", "--game", "/nonexistent/g.soum")
    assert set(err) == {"error", "message"}


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "interactionkit.cli", "soum-gen", "--n", "5", "--out", str(tmp_path / "g.soum")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["n"] == 5
