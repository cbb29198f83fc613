import csv
import json
import math
import subprocess
import sys

import pytest

from sineq import cli
from sineq.errors import DomainError

EXP = '{"family": "nu_p", "p": 1.0}'
SQUARE = json.dumps({"type": "step2d", "breakpoints": [math.log(2)], "heights": [math.log(2), 0.0]})
STRIP = '{"type": "step2d", "breakpoints": [0.7], "heights": ["inf", 0.0]}'


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest: ")
    manifest = json.loads(lines[0][len("# manifest: "):])
    return manifest, list(csv.DictReader(lines[1:]))


def test_parse_grid():
    assert cli.parse_grid("1:2:0.25") == [1.0, 1.25, 1.5, 1.75, 2.0]
    assert cli.parse_grid("1,1.5, 4") == [1.0, 1.5, 4.0]
    with pytest.raises(DomainError):
        cli.parse_grid("2:1:0.5")
    with pytest.raises(DomainError):
        cli.parse_grid("a,b")


def test_parse_norm():
    assert cli.parse_norm("ls:inf").s == math.inf
    assert cli.parse_norm("coordinate:2").index == 2
    assert cli.parse_norm("wmax:1,2").weights == (1.0, 2.0)
    with pytest.raises(DomainError):
        cli.parse_norm("frobenius")


def test_threads_env_override(monkeypatch):
    monkeypatch.delenv(cli.THREADS_ENV, raising=False)
    assert cli.resolve_threads(3) == 3
    assert cli.resolve_threads(0) >= 1
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    assert cli.resolve_threads(5) == 2


def test_verify_square_fixture(tmp_path):
    out = tmp_path / "sq.json"
    assert cli.main(["verify", "--measure", EXP, "--ideal", SQUARE, "--t", "1,2", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["manifest"]["command"] == "verify"
    assert report["report"]["pass"] is True
    manifest, rows = read_csv(tmp_path / "sq.csv")
    assert manifest == report["manifest"]
    assert list(rows[0]) == list(cli.VERIFY_COLUMNS)
    t2 = [r for r in rows if float(r["t"]) == 2.0][0]
    assert float(t2["lhs"]) == pytest.approx(0.5625, abs=1e-12)
    assert float(t2["rhs"]) == pytest.approx(0.4375, abs=1e-12)
    assert float(t2["margin"]) == pytest.approx(0.125, abs=1e-12)
    assert (tmp_path / "sq.json.timing.json").exists()


def test_verify_strip_fixture_from_files(tmp_path):
    (tmp_path / "m.json").write_text(EXP)
    (tmp_path / "k.json").write_text(STRIP)
    out = tmp_path / "strip.json"
    args = ["verify", "--measure", str(tmp_path / "m.json"), "--ideal", str(tmp_path / "k.json"), "--out", str(out)]
    assert cli.main(args) == 0
    _, rows = read_csv(tmp_path / "strip.csv")
    assert len(rows) == 8
    assert all(float(r["margin"]) == 0.0 for r in rows)


def test_verify_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "x.json")
    base = ["verify", "--ideal", SQUARE, "--out", out]
    assert cli.main(base + ["--measure", '{"family": "nu_p", "p": 1.5}']) == 2
    assert "UNSUPPORTED_ASSERTION" in capsys.readouterr().err
    assert cli.main(base + ["--measure", '{"family": "nu_p", "p": 1.5}', "--mode", "explore"]) == 0
    assert cli.main(base + ["--measure", '{"family": "nu_p", "p": 1.0'] ) == 2
    assert cli.main(base + ["--measure", '{"family": "cauchy"}']) == 2
    assert cli.main(base + ["--measure", EXP, "--t", "0.5,1"]) == 2
    assert cli.main(base + ["--measure", EXP, "--dim", "3"]) == 2
    assert cli.main(["verify", "--measure", EXP, "--ideal", str(tmp_path / "missing.json"), "--out", out]) == 2
    bad_ideal = '{"type": "step2d", "breakpoints": [1.0], "heights": [0.5, 2.0]}'
    assert cli.main(["verify", "--measure", EXP, "--ideal", bad_ideal, "--out", out]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--measure", EXP])
    assert exc.value.code == 2


def test_verify_violation_exit_code(tmp_path):
    # a tolerance below zero turns exact ties into reported violations
    out = str(tmp_path / "v.json")
    assert cli.main(["verify", "--measure", EXP, "--ideal", STRIP, "--tol=-1e-3", "--out", out]) == 1
    assert cli.main(["verify", "--measure", EXP, "--ideal", STRIP, "--tol=-1e-3", "--out", out, "--mode", "explore"]) == 0


def test_reruns_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        args = ["verify", "--measure", EXP, "--ideal", SQUARE, "--seed", "3", "--out", str(tmp_path / f"{name}.json")]
        assert cli.main(args) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_bounds_command(tmp_path):
    out = tmp_path / "b.csv"
    assert cli.main(["bounds", "--measure", EXP, "--mass", "0.25,0.5", "--t", "1:4:0.5", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    hit = [r for r in rows if float(r["mass"]) == 0.25 and float(r["t"]) == 2.0]
    assert float(hit[0]["bound"]) == pytest.approx(0.4375, abs=1e-15)
    assert all(float(r["bound"]) == float(r["mass"]) for r in rows if float(r["t"]) == 1.0)

    out = tmp_path / "w.csv"
    assert cli.main(["bounds", "--measure", '{"family": "weibull", "alpha": 2}', "--mass", "0.3", "--t", "1:8:0.5", "--out", str(out)]) == 0
    bounds = [float(r["bound"]) for r in read_csv(out)[1]]
    assert all(b > a for a, b in zip(bounds, bounds[1:]))

    assert cli.main(["bounds", "--measure", EXP, "--mass", "1.5", "--t", "2", "--out", str(out)]) == 2
    assert cli.main(["bounds", "--measure", EXP, "--mass", "0.5", "--t", "0.5", "--out", str(out)]) == 2


def test_phi_and_lemma1_commands(tmp_path):
    assert cli.main(["phi", "--p", "1", "--v", "0.5", "--out", str(tmp_path / "phi.csv")]) == 0
    (row,) = read_csv(tmp_path / "phi.csv")[1]
    assert float(row["value"]) == pytest.approx(0.1534264097200273, abs=1e-12)
    assert float(row["d2"]) == pytest.approx(2.0, abs=1e-12)

    assert cli.main(["lemma1", "--p", "0.5", "--count", "100", "--out", str(tmp_path / "l.csv")]) == 0
    _, rows = read_csv(tmp_path / "l.csv")
    assert len(rows) == 100 and max(float(r["gap"]) for r in rows) <= 1e-10
    # above p = 1 this is exploration: data only, exit 0
    assert cli.main(["lemma1", "--p", "1.5", "--count", "100", "--out", str(tmp_path / "l2.csv")]) == 0


def test_moments_command(tmp_path):
    out = tmp_path / "m.csv"
    args = ["moments", "--measure", EXP, "--n", "2", "--norm", "coordinate:0", "--p", "2", "--q", "1", "--out", str(out)]
    assert cli.main(args) == 0
    (row,) = read_csv(out)[1]
    assert float(row["constant"]) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert cli.main(args[:-6] + ["--p", "1", "--q", "2", "--out", str(out)]) == 2


def test_search_command(tmp_path):
    out = tmp_path / "s.json"
    args = ["search", "--measure", EXP, "--mass", "0.25", "--t", "2", "--k", "3", "--restarts", "3", "--budget", "100"]
    assert cli.main(args + ["--out", str(out)]) == 0
    res = json.loads(out.read_text())["result"]
    assert res["gap"] >= -1e-7
    assert res["best_ideal"]["type"] == "step2d"
    _, trace = read_csv(tmp_path / "s.trace.csv")
    assert list(trace[0]) == list(cli.TRACE_COLUMNS)
    assert cli.main(["search", "--measure", '{"family": "nu_p", "p": 1.5}', "--mass", "0.5", "--t", "2", "--out", str(out)]) == 2


def test_suite_summary_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["suite", "core", "--seed", "1", "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "a" / "suite_core.json").read_bytes()
    assert a == (tmp_path / "b" / "suite_core.json").read_bytes()
    summary = json.loads(a)
    assert summary["pass"] and [c["name"] for c in summary["checks"]] == [
        "closed_form_fixture",
        "derivative_criterion",
        "s_inequality_sweep",
        "transport_consistency",
        "oracle_agreement",
    ]
    timing = json.loads((tmp_path / "a" / "suite_core.json.timing.json").read_text())
    assert set(timing["checks_s"]) and timing["wall_clock_s"] > 0


def test_unknown_suite(tmp_path):
    assert cli.main(["suite", "nonsense", "--out", str(tmp_path)]) == 2


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sineq.cli", "bounds", "--measure", EXP, "--mass", "0.25", "--t", "2", "--out", str(tmp_path / "b.csv")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
