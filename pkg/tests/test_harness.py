import csv
import json
import subprocess
import sys

import pytest

from supcore.cli import main
from supcore.errors import SchemaError
from supcore.sweep import CSV_COLUMNS, SweepConfig, acceptance_checks, read_sweep, report, run_sweep, summarize


def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "supcore.cli", *map(str, args)], capture_output=True,
                          text=True, cwd=cwd)


# -- sweep ----------------------------------------------------------------------------

def test_sweep_cardinality(tmp_path):
    cfg = SweepConfig(seeds=(0, 1), players=(5,), cohorts=(100,), deltas=(2,), modes=("weak",),
                      output=str(tmp_path / "s.csv"), threads=1)
    rows = read_sweep(run_sweep(cfg))
    assert len(rows) == 2
    assert tuple(rows[0]) == CSV_COLUMNS
    assert {r["seed"] for r in rows} == {"0", "1"}
    assert all(r["core_status"] == "certified" for r in rows)


def test_sweep_reproducible_bytes(tmp_path):
    kw = dict(seeds=(3,), players=(3,), cohorts=(50,), deltas=(2, 3), modes=("weak", "lex"),
              record_timing=False)
    a = run_sweep(SweepConfig(output=str(tmp_path / "a.csv"), threads=1, **kw))
    b = run_sweep(SweepConfig(output=str(tmp_path / "b.csv"), threads=2, **kw))
    assert a.read_bytes() == b.read_bytes()
    assert all(r["wall_time_ms"] == "0" for r in read_sweep(a))


def test_sweep_thread_env(monkeypatch):
    monkeypatch.setenv("CORE_TOOLKIT_THREADS", "3")
    assert SweepConfig().workers() == 3
    assert SweepConfig(threads=1).workers() == 1


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(modes=("bogus",))
    with pytest.raises(ValueError):
        SweepConfig(cohorts=())


def test_sweep_timeout_recorded_in_row(tmp_path):
    cfg = SweepConfig(seeds=(0,), players=(3,), cohorts=(50,), deltas=(3,), modes=("strong",),
                      timeout=0.0, output=str(tmp_path / "t.csv"), threads=1)
    rows = read_sweep(run_sweep(cfg))
    assert rows[0]["core_status"] == "timeout" and rows[0]["altruists_used"] == ""


def test_sweep_instance_file(tmp_path):
    from supcore.economy import GeneratorConfig, generate_random, save_json
    save_json(generate_random(GeneratorConfig(n_pairs=70, n_altruists=5, seed=1)), tmp_path / "inst.json")
    cfg = SweepConfig(seeds=(), instance_files=(str(tmp_path / "inst.json"),), players=(3,), cohorts=(40,),
                      deltas=(2,), modes=("weak", "tu"), output=str(tmp_path / "f.csv"), threads=1)
    rows = read_sweep(run_sweep(cfg))
    assert [r["instance"] for r in rows] == ["inst", "inst"]


# -- report ---------------------------------------------------------------------------

def test_report_empty_csv(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    res = report(p, tmp_path / "out")
    assert res["summary"] == [] and res["plots"] == []
    assert (tmp_path / "out" / "summary.csv").read_text().count("\n") == 1


def test_report_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError):
        report(p)


def test_report_three_plots(tmp_path):
    cfg = SweepConfig(seeds=(0,), players=(3,), cohorts=(50, 60), deltas=(2,), modes=("weak", "strong"),
                      output=str(tmp_path / "s.csv"), threads=1)
    res = report(run_sweep(cfg), tmp_path / "plots")
    names = sorted(p.split("/")[-1] for p in res["plots"])
    assert names == ["avg_altruists.png", "max_altruists.png", "pct_needing.png"]
    assert all((tmp_path / "plots" / n).stat().st_size > 0 for n in names)
    assert len(res["summary"]) == 4


def test_summarize_and_checks():
    def row(mode, alt):
        return {"mode": mode, "n_orgs": "3", "cohort": "50", "delta": "2", "altruists_used": alt}
    rows = [row("weak", "0"), row("weak", "1"), row("lex", "2"), row("lex", ""), row("strong", "0")]
    summary = summarize(rows)
    by_mode = {s.mode: s for s in summary}
    assert by_mode["weak"].pct_needing == 50.0 and by_mode["lex"].completed == 1
    checks = acceptance_checks(summary)
    assert checks["weak_pct_needing"] == 50.0 and checks["lex_max"] == 2


# -- CLI ------------------------------------------------------------------------------

def test_cli_unknown_flag():
    assert main(["solve", "x.json", "--mode", "weak", "--frobnicate"]) == 1
    assert _cli("generate", "--bogus").returncode == 1


def test_cli_missing_file(tmp_path):
    assert main(["solve", str(tmp_path / "nope.json"), "--mode", "weak"]) == 2


def test_cli_scarf_round_trip(tmp_path):
    inst = tmp_path / "fig1.json"
    sol = tmp_path / "sol.json"
    assert _cli("fixtures", "fig1", "-o", inst).returncode == 0
    r = _cli("solve", inst, "--mode", "scarf", "-o", sol)
    assert r.returncode == 0, r.stderr
    doc = json.loads(sol.read_text())
    assert doc["kind"] == "rounding" and doc["verified"] is True
    v = _cli("verify", sol, "--mode", "weak")
    assert v.returncode == 0 and v.stdout.strip() == "certified"
    v = _cli("verify", sol, "--mode", "weak", "--brute")
    assert v.returncode == 0 and v.stdout.strip() == "certified"


def test_cli_stabilize_round_trip(tmp_path):
    inst = tmp_path / "g.json"
    sol = tmp_path / "sol.json"
    assert _cli("generate", "--pairs", "40", "--altruists", "3", "--orgs", "3", "--seed", "2",
                "-o", inst).returncode == 0
    for mode in ("weak", "strong", "tu", "lex"):
        r = _cli("solve", inst, "--mode", mode, "--cap", "3", "-o", sol)
        assert r.returncode == 0, r.stderr
        check = "weak" if mode == "lex" else mode
        v = _cli("verify", sol, "--mode", check)
        assert v.returncode == 0 and v.stdout.strip() == "certified"


def test_cli_verify_blocked(tmp_path):
    inst = tmp_path / "fig1.json"
    sol = tmp_path / "sol.json"
    main(["fixtures", "fig1", "-o", str(inst)])
    assert main(["solve", str(inst), "--mode", "weak", "--cap", "3", "-o", str(sol)]) == 2
    r = _cli("verify", sol, "--mode", "weak")
    assert r.returncode == 2 and r.stdout.startswith("blocked by coalition")
    assert main(["solve", str(inst), "--mode", "weak", "--cap", "3", "--add-altruists", "1",
                 "-o", str(sol)]) == 0


def test_cli_cycles_sweep_report(tmp_path):
    inst = tmp_path / "t.json"
    main(["fixtures", "lb_triangle", "1", "-o", str(inst)])
    r = _cli("cycles", inst, "-o", tmp_path / "c.csv")
    assert r.returncode == 0 and "5 cycles" in r.stderr
    out = tmp_path / "s.csv"
    assert main(["sweep", "--seeds", "1", "--players", "3", "--cohorts", "50", "--deltas", "2",
                 "--modes", "weak", "--threads", "1", "--no-timing", "-o", str(out)]) == 0
    with open(out) as fh:
        assert len(list(csv.DictReader(fh))) == 1
    r = _cli("report", out, "--out-dir", tmp_path / "rep")
    assert r.returncode == 0 and r.stdout.startswith("mode,n_orgs")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["report", str(empty)]) == 0


def test_cli_bad_fixture_params():
    assert main(["fixtures", "lb_triangle", "0"]) == 1
