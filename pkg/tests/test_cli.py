"""The qbh command line, driven in-process through main()."""

import json
import sys

import pytest

from qbh import __version__
from qbh.cli import main
from qbh.families import family_names


@pytest.fixture
def run(monkeypatch, tmp_path, capsys):
    """Run `qbh <args>` in tmp_path; returns (exit code, stdout, stderr)."""
    monkeypatch.chdir(tmp_path)

    def _run(*args: str) -> tuple[int, str, str]:
        monkeypatch.setattr(sys, "argv", ["qbh", *args])
        code = 0
        try:
            main()
        except SystemExit as e:
            code = e.code if isinstance(e.code, int) else 1
        out, err = capsys.readouterr()
        return code, out, err

    return _run


class TestHelp:
    def test_main_help(self, run) -> None:
        code, out, _ = run()
        assert code == 0
        assert "qbh <command>" in out
        assert run("--help")[1] == out

    def test_command_help(self, run) -> None:
        code, out, _ = run("verify", "--help")
        assert code == 0
        assert "--family" in out

    def test_version(self, run) -> None:
        assert run("--version")[1].strip() == f"qbh {__version__}"

    def test_unknown_command(self, run) -> None:
        assert run("prove")[0] == 2


def test_families_lists_every_family(run) -> None:
    code, out, _ = run("families")
    assert code == 0
    for name in family_names():
        assert name in out


class TestVerify:
    def test_writes_the_report(self, run, tmp_path) -> None:
        code, _, err = run("verify", "--family", "thm9-i", "--grid", "3x3", "--out", "r.json")
        assert code == 0, err
        data = json.loads((tmp_path / "r.json").read_text())
        assert data["schema"] == "qbh-report/1"
        assert data["family"] == "thm9-i"
        assert data["status"] == "pass"
        assert data["grid"]["points"] == 9

    def test_default_output_name(self, run, tmp_path) -> None:
        code, _, _ = run("verify", "--family", "plane-minimal", "--grid", "2x2")
        assert code == 0
        assert (tmp_path / "plane-minimal.json").exists()

    def test_report_to_stdout_and_csv(self, run, tmp_path) -> None:
        code, out, _ = run("verify", "--family", "plane-minimal", "--grid", "2x2",
                           "--out", "-", "--csv", "grid.csv")
        assert code == 0
        assert json.loads(out)["status"] == "pass"
        assert (tmp_path / "grid.csv").read_text().startswith("x,y,lift-norm")

    def test_failing_check_exits_1(self, run) -> None:
        tight = ["route-agreement", "gauss-eq", "codazzi"]
        overrides = [arg for name in tight for arg in ("--tol-check", f"{name}=1e-300")]
        code, out, _ = run("verify", "--family", "thm9-i", "--grid", "2x2", *overrides, "--out", "-")
        assert code == 1
        data = json.loads(out)
        assert data["status"] == "fail"
        assert any(data["checks"][name]["pass"] is False for name in tight)

    @pytest.mark.parametrize("args", [
        ["--family", "thm9-i", "--bogus", "1"],
        ["--family", "thm9-i", "--grid", "3by3"],
        ["--family", "thm9-i", "--tol-check", "eq99=1e-3"],
        ["--family", "thm9-i", "--tol-check", "lift-norm=-1"],
        ["--family", "thm9-i", "--backend", "symbolic"],
        ["--family", "thm9-i", "--gauge", "0"],
        ["--family", "thm9-i", "--tol", "0"],
        ["--family", "thm9-i", "--tol", "-1e-3"],
        ["--family", "thm9-i", "--step", "-1", "--backend", "fd"],
        ["--family", "thm9-i", "--step", "0", "--backend", "fd"],
        ["--family", "thm9-i", "--threads", "0"],
        ["--family", "thm9-i", "--param", "q=1"],
        ["--family", "plane-minimal", "--param", "a=1"],
        ["--grid", "3x3"],
    ])
    def test_usage_errors_exit_2(self, run, args) -> None:
        assert run("verify", "--grid", "2x2", *args)[0] == 2

    def test_report_is_identical_apart_from_timings(self, run, tmp_path) -> None:
        for name in ("a.json", "b.json"):
            assert run("verify", "--family", "thm10-i", "--grid", "3x3", "--out", name)[0] == 0
        a, b = ((tmp_path / name).read_text() for name in ("a.json", "b.json"))
        head_a, sep, _ = a.partition('  "timings"')
        assert sep
        assert b.partition('  "timings"')[0] == head_a

    def test_unknown_family_exits_3(self, run) -> None:
        code, _, err = run("verify", "--family", "thm11", "--grid", "2x2")
        assert code == 3
        assert "thm11" in err

    def test_bad_window_exits_3(self, run) -> None:
        assert run("verify", "--family", "thm10-i", "--window", "0:1,0:1")[0] == 3

    def test_bad_parameter_exits_3(self, run) -> None:
        assert run("verify", "--family", "thm9-i", "--param", "a=0", "--grid", "2x2")[0] == 3

    @pytest.mark.slow
    def test_full_grid(self, run) -> None:
        code, _, err = run("verify", "--family", "thm9-i", "--out", "full.json")
        assert code == 0, err

    @pytest.mark.slow
    @pytest.mark.parametrize("family", ["thm6-flat-biharmonic", "thm7-flat-qbh", "thm9-i", "thm10-i"])
    def test_routes_agree_on_the_full_grid(self, run, tmp_path, family: str) -> None:
        code, _, err = run("verify", "--family", family, "--grid", "21x21", "--out", "r.json")
        assert code in (0, 1), err
        data = json.loads((tmp_path / "r.json").read_text())
        assert data["grid"]["points"] == 441
        route = data["checks"]["route-agreement"]
        assert route["asserted"] and route["pass"]
        assert route["max_abs_residual"] <= 1e-7


def test_convergence(run, tmp_path) -> None:
    code, _, _ = run("convergence", "--family", "thm9-i", "--probes", "2x2", "--out", "conv.json")
    assert code == 0
    data = json.loads((tmp_path / "conv.json").read_text())
    assert data["command"] == "convergence"
    assert data["family"] == "thm9-i"
    assert list(data["levels"]) == ["1", "2", "3", "4"]
    assert len(data["probes"]) == 4


@pytest.mark.parametrize("args", [
    ["--family", "thm9-i", "--step", "0"],
    ["--family", "thm9-i", "--step", "-0.1"],
    ["--family", "thm9-i", "--param", "mu=1"],
])
def test_convergence_usage_errors_exit_2(run, args) -> None:
    assert run("convergence", "--probes", "2x2", *args)[0] == 2


class TestCurve:
    def test_flat_null(self, run) -> None:
        code, out, _ = run("curve", "--flat-null", "mu=1", "--samples", "5", "--out", "-")
        assert code == 0
        data = json.loads(out)
        assert data["command"] == "curve"
        assert data["mode"] == "flat-null"
        assert data["params"] == {"mu": 1.0}
        assert data["summary"]["pairing"] == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_ode(self, run, tmp_path) -> None:
        code, out, _ = run("curve", "--remark12", "f=1", "delta=0", "--range", "0:0.5",
                           "--step", "1e-3", "--samples", "5", "--out", "-", "--csv", "samples.csv")
        assert code == 0
        data = json.loads(out)
        assert data["mode"] == "ode"
        assert data["summary"]["kappa_sq"] == pytest.approx([6.0, 6.0], abs=1e-6)
        assert data["drift"]["max"] <= 1e-8
        assert not data["drift"]["exceeded"]
        header = (tmp_path / "samples.csv").read_text().splitlines()[0]
        assert header.startswith("t,residual_cone")

    def test_trivial_ode(self, run) -> None:
        code, out, _ = run("curve", "--ode", "f=0", "delta=0", "--range", "0:0.5", "--out", "-")
        assert code == 0
        assert json.loads(out)["summary"]["kappa_sq"] == pytest.approx([0.0, 0.0], abs=1e-10)

    def test_needs_a_mode(self, run) -> None:
        assert run("curve", "--samples", "5")[0] == 2

    def test_one_mode_only(self, run) -> None:
        assert run("curve", "--flat-null", "mu=1", "--ode", "f=1")[0] == 2

    def test_zero_mu_exits_3(self, run) -> None:
        assert run("curve", "--flat-null", "mu=0")[0] == 3

    @pytest.mark.parametrize("args", [
        ["--flat-null", "nu=1"],
        ["--ode", "f=1", "mu=1"],
        ["--ode", "f=1", "--step", "-1e-3"],
        ["--ode", "f=1", "--drift-bound", "0"],
        ["--ode", "f=1", "--samples", "0"],
    ])
    def test_usage_errors_exit_2(self, run, args) -> None:
        assert run("curve", *args)[0] == 2
