"""Verify, convergence and curve sessions end to end."""

import csv
import json
import math

import pytest

from qbh.config import save_config
from qbh.errors import UnknownFamilyError
from qbh.families.lifts import make_cp_family
from qbh.geometry import AmbientSpec, ImmersionPatch
from qbh.sessions import ConvergenceSession, CurveSession, VerifySession, run_convergence


class TestVerifySession:
    def test_lifted_family_passes(self) -> None:
        stages = []
        result = VerifySession("thm9-i", grid=(3, 3), threads=2,
                               on_progress=lambda stage, _: stages.append(stage)).run()
        report = result["report"]
        assert result["status"] == "pass", result["failed"]
        assert result["failed"] == []
        assert stages[0] == "building"
        assert "evaluating" in stages
        assert stages[-1] == "done"
        assert report.classification["points"] == 9
        assert report.classification["frame_points"] == 9
        assert report.expected["matches"]
        assert report.checks["a2bc-zero"].asserted
        assert result["duration_seconds"] >= 0

    @pytest.mark.parametrize("backend", ["jet", "fd"])
    def test_real_plane(self, backend: str) -> None:
        result = VerifySession("plane-minimal", grid=(3, 3), backend=backend, threads=1).run()
        report = result["report"]
        assert result["status"] == "pass", result["failed"]
        assert report.classification["all"]["minimal"]
        assert report.checks["trace-identities"].points == 0
        assert report.grid["fd_step"] == (1e-2 if backend == "fd" else None)

    def test_gauge_pair(self) -> None:
        assert VerifySession("thm9-i").gauges == (1.0, 2.0)
        assert VerifySession("thm9-i", gauge=2.0).gauges == (2.0, 1.0)
        assert VerifySession("thm9-i", gauge=0.5).gauges == (0.5, 2.0)

    def test_configured_tolerance(self) -> None:
        assert VerifySession("thm9-i").tol == 1e-8
        assert VerifySession("thm9-i", backend="fd").tol == 1e-4
        save_config({"tolerances": {"jet": 1e-9}})
        assert VerifySession("thm9-i").tol == 1e-9
        assert VerifySession("thm9-i", tol=1e-6).tol == 1e-6

    def test_report_is_deterministic(self) -> None:
        def report_text(threads: int) -> str:
            data = VerifySession("thm9-i", grid=(3, 3), threads=threads).run()["report"].to_dict()
            assert data.pop("timings")["total_seconds"] >= 0
            return json.dumps(data, indent=2)

        first = report_text(3)
        assert report_text(3) == first
        assert report_text(1) == first

    def test_unknown_family(self) -> None:
        with pytest.raises(UnknownFamilyError):
            VerifySession("thm11", grid=(1, 1)).run()


class TestConvergence:
    def test_fd_converges_to_the_jets(self) -> None:
        result = run_convergence("thm9-i", {"a": 1.0}, step=0.1)
        assert result["family"] == "thm9-i"
        assert result["steps"] == [0.1, 0.05, 0.025]
        assert len(result["probes"]) == 9
        assert result["ill_conditioned"] == []
        second = result["levels"]["2"]
        errors = second["errors"]
        assert errors[0] > errors[2]
        assert second["observed_order"] is not None
        assert second["observed_order"] >= 2.0

    def test_constant_map_is_exact(self) -> None:
        flat = AmbientSpec.from_name("flat")
        patch = ImmersionPatch("const", flat, lambda x, y: [1.0 + 0j, 2j], ((0.0, 1.0), (0.0, 1.0)))
        result = ConvergenceSession(patch, step=0.1, probes=(2, 2)).run()
        for level in result["levels"].values():
            assert level["errors"] == [0.0, 0.0, 0.0]
            assert level["observed_order"] is None

    def test_probes_near_the_singular_locus(self) -> None:
        patch = make_cp_family("thm9-i", {"a": 1.0}, window=((0.01, 0.03), (0.01, 0.03)),
                               validate=False)
        result = ConvergenceSession(patch, step=0.1).run()
        assert len(result["ill_conditioned"]) == 9
        assert all(level["observed_order"] is None for level in result["levels"].values())


class TestCurveSession:
    def test_flat_null_curve(self) -> None:
        result = CurveSession("flat-null", {"mu": 1.0}, samples=20).run()
        assert result["curve"]
        assert len(result["samples"]) == 20
        low, high = result["summary"]["pairing"]
        assert low == pytest.approx(1.0, abs=1e-12)
        assert high == pytest.approx(1.0, abs=1e-12)
        assert result["drift"] is None
        assert result["step_order"] is None

    def test_ode_curve(self) -> None:
        result = CurveSession("ode", {"f": 1.0, "delta": 0.0}, samples=10, t_range=(0.0, 0.5)).run()
        low, high = result["summary"]["kappa_sq"]
        assert low == pytest.approx(6.0, abs=1e-6)
        assert high == pytest.approx(6.0, abs=1e-6)
        assert result["drift"]["max"] <= 1e-8
        json.dumps(result)

    def test_ode_defaults(self) -> None:
        result = CurveSession("ode", samples=2, t_range=(0.0, 0.1)).run()
        assert result["params"] == {"f": 1.0, "delta": 0.0}

    def test_step_order(self) -> None:
        result = CurveSession("ode", {"f": 1.0}, samples=2, t_range=(0.0, 0.5),
                              step=1e-2, order_check=True).run()
        order = result["step_order"]
        coarse, fine = order["differences"]
        assert coarse > fine > 0
        assert order["ratio"] == pytest.approx(coarse / fine)
        assert order["ratio"] >= 14.0
        assert order["observed_order"] >= math.log2(14.0)

    def test_step_order_on_a_quadratic(self) -> None:
        # f ≡ 0 gives z''' = 0, which RK4 integrates exactly at every step
        result = CurveSession("ode", {"f": 0.0, "delta": 0.0}, samples=2, t_range=(0.0, 0.5),
                              step=1e-2, order_check=True).run()
        coarse, fine = result["step_order"]["differences"]
        assert coarse <= 1e-12
        assert fine <= 1e-12

    def test_nodes_csv(self, tmp_path) -> None:
        path = tmp_path / "nodes.csv"
        CurveSession("ode", samples=2, t_range=(0.0, 0.2), nodes_csv=str(path)).run()
        with path.open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "t"
        assert len(rows[0]) == 19
        assert float(rows[1][0]) == 0.0
        assert float(rows[-1][0]) == pytest.approx(0.2)

    def test_unknown_mode(self) -> None:
        with pytest.raises(ValueError):
            CurveSession("helix")
