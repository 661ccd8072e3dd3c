import csv
import io
import json
import math
import subprocess
import sys

import pytest

from betapoly import cli
from betapoly.cli import RunConfig, UsageError, format_value, main, parse_betas, parse_number


def run_cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "betapoly", *args], capture_output=True, text=True, env=env, timeout=300
    )


def run_json(capsys, *args):
    assert main(list(args)) == 0
    return json.loads(capsys.readouterr().out)


class TestParsing:
    def test_numbers(self):
        assert parse_number("-1/2") == -0.5
        assert parse_number(" 0.25 ") == 0.25
        with pytest.raises(UsageError):
            parse_number("half")

    def test_betas(self):
        assert parse_betas("0,1/2,-0.3") == (0.0, 0.5, -0.3)
        assert parse_betas("equal:-1/2:4") == (-0.5,) * 4
        for bad in ("equal:0", "equal:0:x", "equal:0:0", "0,-1", "0,abc"):
            with pytest.raises(UsageError):
                parse_betas(bad)

    def test_run_config_validation(self):
        with pytest.raises(UsageError):
            RunConfig("explode")
        with pytest.raises(UsageError):
            RunConfig("volume", samples=-1)
        with pytest.raises(UsageError):
            RunConfig("volume", rel_tol=0)


class TestCommands:
    def test_volume(self, capsys):
        out = run_json(capsys, "volume", "--d", "1", "--betas", "0,0")
        assert out["closed_form"] == pytest.approx(2 / 3, rel=1e-12)
        assert out["command"] == "volume" and out["d"] == 1 and out["n"] == 2
        assert out["mc_mean"] is None and out["z_score"] is None
        assert "wall_time" not in out

    def test_wieacker_triangle(self, capsys):
        out = run_json(capsys, "wieacker", "--d", "2", "--betas", "0,0,0", "--a", "0", "--b", "0")
        assert out["closed_form"] == pytest.approx(3, abs=1e-10)
        assert out["extrapolated"] is False

    def test_wieacker_extrapolated_flag(self, capsys):
        out = run_json(capsys, "wieacker", "--d", "2", "--betas", "0,0,0", "--b", "1/2")
        assert out["extrapolated"] is True

    def test_moment(self, capsys):
        out = run_json(capsys, "moment", "--betas", "0,0,0", "--k", "1")
        assert out["closed_form"] == pytest.approx(35 / (48 * math.pi), rel=1e-13)

    def test_verify(self, capsys):
        out = run_json(capsys, "verify", "--d", "2", "--betas", "0,0,0,0", "--samples", "100000", "--seed", "42")
        assert abs(out["z_score"]) < 4
        assert out["z_score"] == pytest.approx((out["mc_mean"] - out["closed_form"]) / out["mc_se"], rel=1e-12)
        assert out["seed"] == 42

    def test_verify_wieacker(self, capsys):
        out = run_json(
            capsys, "verify", "--d", "2", "--betas", "0,1/2,1,0", "--functional", "wieacker",
            "--a", "1", "--b", "1", "--samples", "20000", "--seed", "3",
        )
        assert abs(out["z_score"]) < 4

    def test_timing_flag(self, capsys):
        out = run_json(capsys, "volume", "--d", "1", "--betas", "0,0", "--timing")
        assert out["wall_time"] >= 0

    def test_csv_format(self, capsys):
        assert main(["volume", "--d", "2", "--betas", "0,0,0", "--format", "csv"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 1
        assert float(rows[0]["closed_form"]) == pytest.approx(35 / (48 * math.pi), rel=1e-10)

    def test_schema_is_fixed(self, capsys):
        a = run_json(capsys, "volume", "--d", "2", "--betas", "0,0,0")
        b = run_json(capsys, "volume", "--d", "3", "--betas", "equal:1:6")
        assert list(a) == list(b)


class TestSweep:
    def test_over_n(self, capsys):
        assert main(["sweep", "--d", "2", "--betas", "equal:0:3", "--param", "n", "--values", "3,4,5"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [r["n"] for r in rows] == ["3", "4", "5"]
        vals = [float(r["closed_form"]) for r in rows]
        assert vals[0] == pytest.approx(35 / (48 * math.pi), rel=1e-10)
        assert vals == sorted(vals)

    def test_over_beta_with_mc(self, capsys):
        args = ["sweep", "--d", "2", "--betas", "0,0,0", "--param", "beta:1", "--values", "0,1",
                "--samples", "5000", "--seed", "1"]
        assert main(args) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 2
        assert {"mc_mean", "mc_se", "z_score"} <= set(rows[0])

    def test_over_b_json(self, capsys):
        args = ["sweep", "--d", "1", "--betas", "0,0,0", "--functional", "wieacker", "--param", "b",
                "--values", "0,1,2.5", "--format", "json"]
        rows = run_json(capsys, *args)
        assert [r["closed_form"] for r in rows] == pytest.approx([2, 2, 2], abs=1e-10)

    def test_missing_values(self, capsys):
        assert main(["sweep", "--d", "1", "--betas", "0,0", "--param", "n"]) == 1


class TestRoundTrip:
    def test_seventeen_digits(self):
        for x in (2 / 3, math.pi, 1e-300, 123456.789e10, -0.1):
            assert float(format_value(x)) == x

    def test_json_round_trip(self, capsys):
        assert main(["volume", "--d", "3", "--betas", "0,1/2,-1/3,2,0.7"]) == 0
        text = capsys.readouterr().out
        parsed = json.loads(text)
        assert format_value(parsed) + "\n" == text


class TestReproducibility:
    ARGS = ("verify", "--d", "2", "--betas", "0,1/2,-1/2,1", "--samples", "20000", "--seed", "7")

    def test_byte_identical_runs(self):
        first = run_cli(*self.ARGS)
        second = run_cli(*self.ARGS)
        assert first.returncode == 0
        assert first.stdout == second.stdout

    def test_thread_count(self):
        one = run_cli(*self.ARGS, "--threads", "1")
        eight = run_cli(*self.ARGS, "--threads", "8")
        assert one.stdout == eight.stdout

    def test_seed_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "1234")
        out = run_json(capsys, "verify", "--d", "1", "--betas", "0,0", "--samples", "1000")
        assert out["seed"] == 1234
        out = run_json(capsys, "verify", "--d", "1", "--betas", "0,0", "--samples", "1000", "--seed", "5")
        assert out["seed"] == 5
        monkeypatch.setenv(cli.SEED_ENV, "abc")
        assert main(["verify", "--d", "1", "--betas", "0,0", "--samples", "1000"]) == 1


class TestExitCodes:
    def test_usage(self):
        res = run_cli("volume", "--d", "2")
        assert res.returncode == 1
        assert "cli.parse_args" in res.stderr

    def test_unknown_flag(self):
        assert run_cli("volume", "--bogus").returncode == 1

    def test_domain(self, capsys):
        assert main(["volume", "--d", "3", "--betas", "0,0,0"]) == 1
        assert "closedform.expected_volume" in capsys.readouterr().err

    def test_budget(self, capsys):
        args = ["volume", "--d", "2", "--betas", ",".join(str(i / 10) for i in range(12)), "--budget", "10"]
        assert main(args) == 2
        assert "closedform.enumerate_subsets_grouped" in capsys.readouterr().err

    def test_convergence(self, capsys, monkeypatch):
        import functools

        import betapoly.closedform as cf

        # A rule-size cap of 16 leaves no room for a second, confirming rule.
        monkeypatch.setattr(cf, "integrate_weighted", functools.partial(cf.integrate_weighted, m_max=16))
        assert main(["volume", "--d", "2", "--betas", "0,0,0,0.3"]) == 2
        assert "quadrature.integrate_weighted" in capsys.readouterr().err

    def test_selftest_failure(self, capsys, monkeypatch):
        import betapoly.selftest as st

        monkeypatch.setattr(st, "CHECKS", st.CHECKS + [("broken", lambda rng: (False, "forced"))])
        assert main(["selftest"]) == 3
        out = json.loads(capsys.readouterr().out)
        assert any(r["check"] == "broken" and not r["passed"] for r in out)


def test_selftest_passes():
    res = run_cli("selftest", "--seed", "0")
    assert res.returncode == 0, res.stdout + res.stderr
    assert all(r["passed"] for r in json.loads(res.stdout))
