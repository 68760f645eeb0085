"""Verify, convergence and curve sessions.

Each session is built from resolved settings, reports progress through
on_progress(stage, message) and returns a plain dict from run(), always with
duration_seconds.

Usage:
    from qbh.sessions import VerifySession
    result = VerifySession("thm9-i", grid=(5, 5)).run()
    result["report"].status      # "pass"
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable

import numpy as np

from qbh.checks import DEFAULT_GAUGES, PointRecord, assemble_report, evaluate_point
from qbh.config import get_default_tolerance, get_fd_step, get_threads
from qbh.curves import (
    CurveSpec,
    DriftReport,
    integrate_legendre_ode,
    legendre_report,
    make_flat_null_legendre,
    write_curve_csv,
)
from qbh.families.probes import grid_points
from qbh.families.registry import build_family, expected_profile
from qbh.frames import Gauge
from qbh.geometry import ImmersionPatch, Window
from qbh.jets import fd_jet, jet_eval

logger = logging.getLogger(__name__)

Progress = Callable[[str, str], None]

# A probe closer than this many steps to the singular locus is ill-conditioned.
CONDITION_STEPS = 3.0

# FD errors below this (relative to the derivative size) are at the rounding floor.
NOISE_FLOOR = 1e-11

# Curve parameters per mode, with their defaults.
CURVE_PARAMS: dict[str, dict[str, float]] = {
    "flat-null": {"mu": 1.0},
    "ode": {"f": 1.0, "delta": 0.0},
}


def _noop(stage: str, message: str) -> None:
    pass


class VerifySession:
    """Sweep a family over a grid and assemble the verification report.

    Args:
        family: Registered family name.
        params: Family parameters overriding the defaults.
        grid: (nx, ny) points.
        window: Window override; None uses the family default.
        backend: "jet" or "fd".
        tol: Base tolerance; None uses the configured default for the backend.
        overrides: Per-check tolerances.
        gauge: Frame gauge; the gauge-invariance check pairs it with a second one.
        step: FD step (fd backend only); None uses the configured default.
        threads: Worker cap; None uses QBH_THREADS / config.
        on_progress: Callback for progress updates (stage, message).
    """

    def __init__(
        self,
        family: str,
        params: dict[str, Any] | None = None,
        grid: tuple[int, int] = (21, 21),
        window: Window | None = None,
        backend: str = "jet",
        tol: float | None = None,
        overrides: dict[str, float] | None = None,
        gauge: Gauge = 1.0,
        step: float | None = None,
        threads: int | None = None,
        on_progress: Progress | None = None,
    ) -> None:
        self.family = family
        self.params = dict(params or {})
        self.grid = grid
        self.window = window
        self.backend = backend
        self.tol = tol if tol is not None else get_default_tolerance(backend)
        self.overrides = dict(overrides or {})
        second = DEFAULT_GAUGES[1] if gauge != DEFAULT_GAUGES[1] else DEFAULT_GAUGES[0]
        self.gauges: tuple[Gauge, Gauge] = (gauge, second)
        self.step = step if step is not None else get_fd_step()
        self.threads = max(1, threads or get_threads())
        self.on_progress = on_progress or _noop

    def _progress(self, stage: str, message: str) -> None:
        self.on_progress(stage, message)

    def _sweep(self, patch: ImmersionPatch, points: list[tuple[float, float]]) -> list[PointRecord]:
        total = len(points)
        report_every = max(1, total // 10)
        records: list[PointRecord] = []

        def work(k: int, p: tuple[float, float]) -> PointRecord:
            start = time.time()
            rec = evaluate_point(patch, p, self.backend, self.step, self.tol, self.gauges, index=k)
            rec.seconds = time.time() - start
            return rec

        with ThreadPoolExecutor(max_workers=min(self.threads, total)) as pool:
            futures = [pool.submit(work, k, p) for k, p in enumerate(points)]
            for done, future in enumerate(as_completed(futures), start=1):
                records.append(future.result())
                if done % report_every == 0 or done == total:
                    self._progress("evaluating", f"{done}/{total} points")
        return sorted(records, key=lambda r: r.index)

    def run(self) -> dict[str, Any]:
        """Build the family, sweep the grid, aggregate.

        Returns:
            {
                "report": VerificationReport,
                "status": "pass" | "fail",
                "failed": [check names],
                "duration_seconds": float,
            }

        Raises:
            FamilyError: the family cannot be built on the window.
        """
        start = time.time()
        self._progress("building", f"Building {self.family}")
        patch = build_family(self.family, self.params, self.window)
        profile = expected_profile(self.family)
        built = time.time()

        nx, ny = self.grid
        points = grid_points(patch.window, nx, ny)
        self._progress(
            "evaluating",
            f"{len(points)} points on {patch.window} with {self.backend} backend, {self.threads} threads",
        )
        records = self._sweep(patch, points)
        swept = time.time()

        grid = {
            "nx": nx,
            "ny": ny,
            "window": [list(patch.window[0]), list(patch.window[1])],
            "points": len(points),
            "fd_step": self.step if self.backend == "fd" else None,
            "gauges": [g if not callable(g) else getattr(g, "__name__", "callable") for g in self.gauges],
        }
        timings = {
            "build_seconds": built - start,
            "sweep_seconds": swept - built,
            "mean_point_seconds": float(np.mean([r.seconds for r in records])) if records else 0.0,
        }
        report = assemble_report(
            patch, profile, records, grid, self.backend, self.tol, self.overrides, timings
        )
        duration = time.time() - start
        report.timings["total_seconds"] = duration

        if report.status == "pass":
            self._progress("done", f"All asserted checks pass ({duration:.1f}s)")
        else:
            self._progress("failed", f"Failed: {', '.join(report.failed)}")

        return {
            "report": report,
            "status": report.status,
            "failed": report.failed,
            "duration_seconds": duration,
        }


class ConvergenceSession:
    """FD backend against the jet backend at steps h, h/2, h/4.

    Errors are per derivative level (max over probes and coefficients, in
    derivative units); observed orders come from successive error ratios.
    Probes within CONDITION_STEPS·h of the singular locus are reported as
    ill-conditioned and left out of the fit.
    """

    def __init__(
        self,
        patch: ImmersionPatch,
        step: float = 0.1,
        probes: tuple[int, int] = (3, 3),
        order: int = 4,
        on_progress: Progress | None = None,
    ) -> None:
        self.patch = patch
        self.step = step
        self.probes = probes
        self.order = order
        self.on_progress = on_progress or _noop

    def _progress(self, stage: str, message: str) -> None:
        self.on_progress(stage, message)

    def _ill_conditioned(self, point: tuple[float, float]) -> bool:
        distance = self.patch.singular_distance
        return distance is not None and distance(*point) < CONDITION_STEPS * self.step

    def run(self) -> dict[str, Any]:
        """
        Returns:
            {
                "family": str,
                "steps": [h, h/2, h/4],
                "probes": [[x, y], ...],
                "ill_conditioned": [[x, y], ...],
                "levels": {k: {"errors": [...], "orders": [...], "observed_order": float | None}},
                "duration_seconds": float,
            }
        """
        start = time.time()
        steps = [self.step, self.step / 2, self.step / 4]
        points = grid_points(self.patch.window, *self.probes)
        good = [p for p in points if not self._ill_conditioned(p)]
        flagged = [p for p in points if self._ill_conditioned(p)]
        for p in flagged:
            logger.debug("probe %s is ill-conditioned at step %g", p, self.step)
        self._progress("probing", f"{len(good)} probes, {len(flagged)} ill-conditioned")

        levels = range(1, self.order + 1)
        errors = {k: [0.0] * len(steps) for k in levels}
        sizes = {k: 0.0 for k in levels}
        for p in good:
            exact = jet_eval(self.patch.map, p, self.order)
            lay = exact.layout
            degree = np.array([sum(m) for m in lay.indices])
            for s, h in enumerate(steps):
                approx, _ = fd_jet(self.patch.evaluate, p, self.order, h)
                diff = np.abs(approx.coeffs - exact.coeffs).reshape(lay.size, -1).max(axis=1)
                diff = diff * lay.factorials
                for k in levels:
                    errors[k][s] = max(errors[k][s], float(diff[degree == k].max()))
            magnitude = np.abs(exact.coeffs).reshape(lay.size, -1).max(axis=1) * lay.factorials
            for k in levels:
                sizes[k] = max(sizes[k], float(magnitude[degree == k].max()))
            self._progress("probing", f"({p[0]:.3f}, {p[1]:.3f}) done")

        result_levels: dict[str, Any] = {}
        for k in levels:
            floor = NOISE_FLOOR * (1.0 + sizes[k])
            orders: list[float | None] = []
            for coarse, fine in zip(errors[k], errors[k][1:]):
                if fine <= floor or coarse <= floor:
                    orders.append(None)
                else:
                    orders.append(math.log2(coarse / fine))
            valid = [o for o in orders if o is not None]
            result_levels[str(k)] = {
                "errors": errors[k],
                "orders": orders,
                "observed_order": valid[-1] if valid else None,
            }

        duration = time.time() - start
        self._progress("done", f"Convergence study complete in {duration:.1f}s")
        return {
            "family": self.patch.name,
            "steps": steps,
            "probes": [list(p) for p in points],
            "ill_conditioned": [list(p) for p in flagged],
            "levels": result_levels,
            "duration_seconds": duration,
        }


def run_convergence(
    family: str,
    params: dict[str, Any] | None = None,
    step: float = 0.1,
    probes: tuple[int, int] = (3, 3),
    on_progress: Progress | None = None,
) -> dict[str, Any]:
    """Build a registered family and run a convergence study on it."""
    patch = build_family(family, params)
    return ConvergenceSession(patch, step, probes, on_progress=on_progress).run()


class CurveSession:
    """Sample a light-cone curve: the flat null Legendre curve or an ODE solution.

    Args:
        mode: "flat-null" (params mu) or "ode" (params f, delta).
        params: Curve parameters.
        samples: Number of sample parameters over t_range.
        t_range: Sampling range (and integration range for the ODE).
        step: RK4 step for the ODE.
        drift_bound: Drift bound reported against.
        order_check: Also integrate at step/2 and step/4 and report the observed order.
        nodes_csv: Where to dump the ODE nodes (ODE mode only).
    """

    def __init__(
        self,
        mode: str,
        params: dict[str, float] | None = None,
        samples: int = 50,
        t_range: tuple[float, float] = (0.0, 1.0),
        step: float = 1e-3,
        drift_bound: float | None = 1e-8,
        order_check: bool = False,
        nodes_csv: str | None = None,
        on_progress: Progress | None = None,
    ) -> None:
        if mode not in CURVE_PARAMS:
            raise ValueError(f"Unknown curve mode '{mode}' (expected flat-null or ode)")
        self.mode = mode
        self.params = {**CURVE_PARAMS[mode], **(params or {})}
        self.samples = max(1, samples)
        self.t_range = t_range
        self.step = step
        self.drift_bound = drift_bound
        self.order_check = order_check
        self.nodes_csv = nodes_csv
        self.on_progress = on_progress or _noop

    def _progress(self, stage: str, message: str) -> None:
        self.on_progress(stage, message)

    def _integrate(self, step: float) -> tuple[CurveSpec, DriftReport]:
        f = float(self.params["f"])
        delta = float(self.params["delta"])
        return integrate_legendre_ode(f, delta, None, self.t_range, step, self.drift_bound)

    def _step_order(self) -> dict[str, Any]:
        ends = []
        for h in (self.step, self.step / 2, self.step / 4):
            curve, _ = self._integrate(h)
            jet = curve.jet(self.t_range[1], 2)
            ends.append(np.concatenate([jet.derivative(k) for k in range(3)]))
        coarse = float(np.linalg.norm(ends[0] - ends[1]))
        fine = float(np.linalg.norm(ends[1] - ends[2]))
        ratio = coarse / fine if fine > 0 else None
        order = math.log2(ratio) if ratio else None
        return {"differences": [coarse, fine], "ratio": ratio, "observed_order": order}

    def run(self) -> dict[str, Any]:
        """
        Returns:
            {
                "mode": str,
                "params": dict,
                "curve": str,
                "samples": [LegendreReport.as_dict(), ...],
                "summary": {"kappa_sq": [min, max], "tau_hat": [min, max], "pairing": [min, max]},
                "drift": DriftReport.as_dict() | None,
                "step_order": {...} | None,
                "duration_seconds": float,
            }

        Raises:
            CurveError: bad parameters or an unconstructible seed.
        """
        start = time.time()
        drift = None
        if self.mode == "flat-null":
            mu = float(self.params["mu"])
            curve = make_flat_null_legendre(mu)
        else:
            self._progress("integrating", f"RK4 on [{self.t_range[0]}, {self.t_range[1]}], step {self.step:g}")
            curve, drift = self._integrate(self.step)
            if self.nodes_csv and curve.samples is not None:
                write_curve_csv(curve.samples, self.nodes_csv)

        lo, hi = self.t_range
        ts = np.linspace(lo, hi, self.samples) if self.samples > 1 else np.array([lo])
        reports = [legendre_report(curve, float(t)) for t in ts]
        self._progress("sampled", f"{len(reports)} samples of {curve.name}")

        def spread(key: str) -> list[float]:
            values = [getattr(r, key) for r in reports]
            return [min(values), max(values)]

        step_order = None
        if self.order_check and self.mode == "ode":
            self._progress("integrating", "Step-halving order check")
            step_order = self._step_order()

        duration = time.time() - start
        return {
            "mode": self.mode,
            "params": dict(self.params),
            "curve": curve.name,
            "samples": [r.as_dict() for r in reports],
            "summary": {key: spread(key) for key in ("kappa_sq", "tau_hat", "pairing")},
            "drift": drift.as_dict() if drift is not None else None,
            "step_order": step_order,
            "duration_seconds": duration,
        }
