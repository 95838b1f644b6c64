from __future__ import annotations

import json
import subprocess
import sys

import pytest

from splitprimes import cli
from splitprimes.cli import dispatch


def run(argv, capsys):
    code = dispatch(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


def test_group_structure_row(capsys):
    code, out, _ = run(["group-structure", "--p", "196561", "--a", "6", "--b", "-2"], capsys)
    assert code == 0
    head, body = rows(out)
    rec = dict(zip(head, body[0]))
    assert rec["d1"] == "140" and rec["a_p"] == "562"
    assert out.startswith("# command: group-structure\n# version: ")
    assert "# seed: 0" in out


def test_buchstab_eval(capsys):
    code, out, _ = run(["buchstab-eval", "--u", "1.5", "3.5"], capsys)
    assert code == 0
    _, body = rows(out)
    assert float(body[0][1]) == pytest.approx(2 / 3, abs=1e-12)
    assert body[0][1].startswith("0.666666")


def test_sieve_plan(capsys):
    code, out, _ = run(["sieve-plan", "--theta", "0.5388", "--eta", "1e-4"], capsys)
    assert code == 0
    _, body = rows(out)
    plan = {r[0]: r[1] for r in body}
    assert plan["gamma"] == "1141/10000"
    assert plan["type1_cap"] == "6917/10000"
    assert plan["type2_lo"] == "1347/5000"
    assert plan["type2_hi"] == "767/2000"
    assert float(plan["c0"]) < 1 and float(plan["deficit"]) > 0


def test_json_output(capsys):
    code, out, _ = run(["trace", "--p", "196561", "--d", "140", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "trace"
    assert doc["rows"][0][2] == 562


@pytest.mark.parametrize(
    "argv",
    [
        ["group-structure", "--p", "196561", "--a", "6"],
        ["trace", "--p", "196561", "--d", "140", "--bogus"],
        ["no-such-command"],
        ["group-structure", "--p", "100", "--a", "1", "--b", "1"],
        ["buchstab-eval", "--u", "0.5"],
        ["ds-sum", "--x", str(10**10)],
        ["sieve-plan", "--theta", "4/7", "--eta", "0"],
    ],
)
def test_validation_errors_exit_1(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert err


def test_unknown_flag_prints_usage(capsys):
    code, _, err = run(["trace", "--p", "7", "--d", "1", "--bogus"], capsys)
    assert code == 1 and "usage:" in err


def test_internal_failure_exit_2(monkeypatch, capsys):
    def broken(args):
        raise AssertionError("invariant broken")

    monkeypatch.setattr(cli, "cmd_trace", broken)
    code, _, err = run(["trace", "--p", "7", "--d", "1"], capsys)
    assert code == 2 and "invariant broken" in err


def test_selftest_failure_exit_2(monkeypatch, capsys):
    monkeypatch.setattr(cli, "_selftest_checks", lambda: [("always_fails", lambda: False)])
    code, out, _ = run(["selftest"], capsys)
    assert code == 2 and "FAIL" in out


def test_selftest_passes(capsys):
    code, out, _ = run(["selftest"], capsys)
    assert code == 0, out
    assert "FAIL" not in out


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# curve\np = 196561\na=6\nb=-2\n")
    code, out, _ = run(["group-structure", "--config", str(cfg)], capsys)
    assert code == 0 and ",140," in out
    # a flag overrides the file
    code, out, _ = run(["group-structure", "--config", str(cfg), "--p", "13", "--a", "1", "--b", "1"], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("13,")
    cfg.write_text("nonsense = 1\n")
    assert run(["group-structure", "--config", str(cfg)], capsys)[0] == 1


def test_region_file(tmp_path, capsys):
    reg = tmp_path / "r.txt"
    reg.write_text("dim 1\n1 >= 1/4\n1 <= 1/3\n")
    code, out, _ = run(["buchstab-integral", "--region", str(reg), "--method", "solver"], capsys)
    assert code == 0
    _, body = rows(out)
    assert 0 < float(body[0][1]) < 1


@pytest.mark.parametrize(
    "argv",
    [
        ["scan-outside", "--a", "6", "--b", "-2", "--p-max", "200000"],
        ["discrepancy", "--x", "100000", "--theta", "0.51"],
        ["main-term", "--x", "1000000", "--theta", "0.51", "--format", "json"],
    ],
)
def test_byte_identical_across_runs_and_threads(argv, tmp_path, capsys):
    outs = []
    for i, threads in enumerate((1, 1, 3)):
        path = tmp_path / f"out{i}"
        assert dispatch([*argv, "--seed", "7", "--threads", str(threads), "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_scan_outside_command(capsys):
    code, out, _ = run(["scan-outside", "--a", "6", "--b", "-2", "--p-max", "200000"], capsys)
    assert code == 0
    head, body = rows(out)
    assert body[0][:3] == ["196561", "140", "562"]
    assert "# outside_primes: 1" in out


def test_console_script_entry():
    r = subprocess.run(
        [sys.executable, "-m", "splitprimes", "trace", "--p", "13", "--d", "1"], capture_output=True, text=True
    )
    assert r.returncode == 0, r.stderr
    assert r.stdout.splitlines()[-1].startswith("13,1,2,")
