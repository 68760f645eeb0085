"""Check registry, per-point evaluation and the verification report.

Every check reduces a point to one nonnegative residual; a check passes when
its largest residual over the grid is within its tolerance. Checks come in
three kinds:

- internal: consistency of the numerics (always asserted)
- frame: adapted-frame identities, evaluated where the frame exists (always asserted)
- profile: the family's expected classification (asserted only for asserted profiles)

Usage:
    from qbh.checks import evaluate_point, assemble_report

    records = [evaluate_point(patch, p) for p in points]
    report = assemble_report(patch, expected_profile(name), records, grid, "jet", 1e-8)
    report.write_json("r.json")
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from qbh.errors import ExcludedPointError, FrameError, GeometryError, JetError, UsageError
from qbh.families.registry import ExpectedProfile
from qbh.frames import (
    Gauge,
    bitension_closed_form,
    build_adapted_frame,
    frame_identity_residuals,
    lemma_residuals,
)
from qbh.geometry import (
    ClassificationReport,
    ImmersionPatch,
    bitension,
    bitension_direct,
    classify,
    fundamental_forms,
    gauss_curvature,
    metric_scale,
    null_residual,
    point_geometry,
    pseudo_orthonormal_frame,
    second_derivative_scale,
    structural_residuals,
)

logger = logging.getLogger(__name__)

SCHEMA = "qbh-report/1"

# H and τ₂ count as nonzero when their coordinate norm reaches this.
NONZERO_FLOOR = 1e-3

DEFAULT_GAUGES: tuple[float, float] = (1.0, 2.0)

# Second frame for the frame-independence check: start from ∂y, boost by 0.3.
ALT_FRAME = (1, 0.3)


class CheckKind(str, Enum):
    INTERNAL = "internal"
    FRAME = "frame"
    PROFILE = "profile"


@dataclass(frozen=True)
class CheckSpec:
    name: str
    kind: CheckKind
    description: str
    factor: float = 1.0


CHECKS: tuple[CheckSpec, ...] = (
    CheckSpec("lift-norm", CheckKind.INTERNAL, "|⟨L,L⟩ − 1/ε|"),
    CheckSpec("lagrangian", CheckKind.INTERNAL, "|⟨Jφ_x, φ_y⟩| / max(1, |g|)"),
    CheckSpec("horizontal", CheckKind.INTERNAL, "|⟨φ_i, iL⟩| / max(1, |g|)"),
    CheckSpec("normality", CheckKind.INTERNAL, "|⟨h_ij, φ_k⟩|"),
    CheckSpec("H-lightlike", CheckKind.PROFILE, "|⟨H,H⟩| / max(scale², ‖H‖²)"),
    CheckSpec("H-nonzero", CheckKind.PROFILE, "max(0, 1e-3 − ‖H‖)"),
    CheckSpec("tau2-zero", CheckKind.PROFILE, "‖τ₂‖ / scale"),
    CheckSpec("tau2-lightlike", CheckKind.PROFILE, "|⟨τ₂,τ₂⟩| / max(scale², ‖τ₂‖²)"),
    CheckSpec("tau2-nonzero", CheckKind.PROFILE, "max(0, 1e-3 − ‖τ₂‖)"),
    CheckSpec("G-eq-eps", CheckKind.PROFILE, "|G − ε|"),
    CheckSpec("route-agreement", CheckKind.INTERNAL, "pairwise τ₂ route spread / (1 + ‖τ₂‖)", 10.0),
    CheckSpec("frame-independence", CheckKind.INTERNAL, "τ₂ over two frames vs g^{ij}", 10.0),
    CheckSpec("gauss-eq", CheckKind.INTERNAL, "Gauss equation", 10.0),
    CheckSpec("codazzi", CheckKind.INTERNAL, "Codazzi equation", 10.0),
    CheckSpec("trace-identities", CheckKind.FRAME, "2α = a + c = b − d"),
    CheckSpec("gauss-identity", CheckKind.FRAME, "G = (a − 2b − c)(c − b) + ε"),
    CheckSpec("codazzi-frame", CheckKind.FRAME, "Codazzi in frame components"),
    CheckSpec("frame-derivatives", CheckKind.FRAME, "e_k(α), e_k(a..d) relations"),
    CheckSpec("connection-curvature", CheckKind.FRAME, "G from the connection form"),
    CheckSpec("laplacian-normal", CheckKind.FRAME, "(ΔH)^⊥ closed form", 10.0),
    CheckSpec("normal-laplacian", CheckKind.FRAME, "Δ^D H = −GH", 10.0),
    CheckSpec("laplacian-tangential", CheckKind.FRAME, "(ΔH)^T closed form", 10.0),
    CheckSpec("laplacian-decomposition", CheckKind.FRAME, "ΔH from its decomposition", 10.0),
    CheckSpec("bitension-closed-form", CheckKind.FRAME, "τ₂ closed form vs direct", 10.0),
    CheckSpec("gauge-invariance", CheckKind.FRAME, "τ₂ closed form under two gauges", 10.0),
    CheckSpec("b-eq-c", CheckKind.PROFILE, "|b − c|"),
    CheckSpec("a2bc-zero", CheckKind.PROFILE, "|a − 2b − c|"),
    CheckSpec("a2bc-nonzero", CheckKind.PROFILE, "max(0, 1e-3 − |a − 2b − c|)"),
)

CHECK_NAMES: tuple[str, ...] = tuple(spec.name for spec in CHECKS)
_SPECS = {spec.name: spec for spec in CHECKS}


def check_spec(name: str) -> CheckSpec:
    try:
        return _SPECS[name]
    except KeyError:
        raise UsageError(f"Unknown check '{name}'. Known: {', '.join(CHECK_NAMES)}") from None


def resolve_tolerances(base: float, overrides: dict[str, float] | None = None) -> dict[str, float]:
    """Per-check tolerance: override, else base × the check's factor."""
    overrides = overrides or {}
    for name in overrides:
        check_spec(name)
    return {spec.name: float(overrides.get(spec.name, base * spec.factor)) for spec in CHECKS}


def is_asserted(spec: CheckSpec, profile: ExpectedProfile) -> bool:
    if spec.kind is CheckKind.PROFILE:
        return profile.asserted and spec.name in profile.checks
    return True


# ── Per point ──


@dataclass
class PointRecord:
    """Everything measured at one grid point; `error` set when the point was skipped."""

    index: int
    point: tuple[float, float]
    residuals: dict[str, float] = field(default_factory=dict)
    classification: ClassificationReport | None = None
    frame: dict[str, Any] | None = None
    error: str | None = None
    excluded: bool = False
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


def _relative(v: np.ndarray, scale: float) -> float:
    return float(np.linalg.norm(v)) / scale


def evaluate_point(
    patch: ImmersionPatch,
    point: Sequence[float],
    backend: str = "jet",
    step: float = 1e-2,
    tol: float = 1e-8,
    gauges: tuple[Gauge, Gauge] = DEFAULT_GAUGES,
    index: int = 0,
) -> PointRecord:
    """Run the full pipeline at one point and reduce it to check residuals.

    Geometry and jet failures are recorded on the returned record, not raised.
    """
    p = (float(point[0]), float(point[1]))
    record = PointRecord(index=index, point=p)
    try:
        geo = point_geometry(patch, p, backend, step)
        forms = fundamental_forms(geo)
        result = bitension(geo, forms, tol)
        gauss = gauss_curvature(geo)
        structure = structural_residuals(geo, forms)
    except (GeometryError, JetError) as e:
        record.error = f"{type(e).__name__}: {e}"
        record.excluded = isinstance(e, ExcludedPointError)
        logger.debug("point %s skipped: %s", p, record.error)
        return record

    eps = geo.ambient.epsilon
    scale = second_derivative_scale(geo)
    tau2 = result.tau2_direct
    rel = 1.0 + result.tau2_norm
    h_norm = float(np.linalg.norm(forms.H))
    hv = forms.h_values

    r = record.residuals
    r["lift-norm"] = geo.lift_norm_residual
    r["lagrangian"] = geo.lagrangian_residual / metric_scale(geo)
    r["horizontal"] = geo.horizontality_residual / metric_scale(geo)
    r["normality"] = max(
        abs(geo.ip(hv[i][j], t.value)) for i in range(2) for j in range(2) for t in geo.tangents
    )
    r["H-lightlike"] = null_residual(forms.H, geo.index, scale)
    r["H-nonzero"] = max(0.0, NONZERO_FLOOR - h_norm)
    r["tau2-zero"] = result.tau2_norm / scale
    r["tau2-lightlike"] = null_residual(tau2, geo.index, scale)
    r["tau2-nonzero"] = max(0.0, NONZERO_FLOOR - result.tau2_norm)
    r["G-eq-eps"] = abs(gauss - eps)

    alt = pseudo_orthonormal_frame(geo, first=ALT_FRAME[0], boost=ALT_FRAME[1])
    r["frame-independence"] = max(
        _relative(bitension_direct(geo, forms, pseudo_orthonormal_frame(geo)) - tau2, rel),
        _relative(bitension_direct(geo, forms, alt) - tau2, rel),
    )
    r["gauss-eq"] = structure.gauss
    r["codazzi"] = structure.codazzi

    routes = [tau2, result.tau2_laplacian]
    try:
        frame = build_adapted_frame(geo, forms, gauges[0], tol)
        other = build_adapted_frame(geo, forms, gauges[1], tol)
    except FrameError as e:
        logger.debug("no adapted frame at %s: %s", p, e)
        frame = None

    if frame is not None:
        closed = bitension_closed_form(frame, eps)
        closed_other = bitension_closed_form(other, eps)
        routes += [closed, closed_other]
        r.update(frame_identity_residuals(frame, gauss, eps).by_check())
        r.update(lemma_residuals(frame, geo, forms, result.laplacian_H, gauss).by_check())
        r["bitension-closed-form"] = _relative(closed - tau2, rel)
        r["gauge-invariance"] = _relative(closed - closed_other, rel)
        r["b-eq-c"] = abs(frame.b - frame.c)
        r["a2bc-zero"] = abs(frame.a2bc)
        r["a2bc-nonzero"] = max(0.0, NONZERO_FLOOR - abs(frame.a2bc))
        record.frame = frame.as_dict()

    r["route-agreement"] = max(_relative(u - v, rel) for u, v in combinations(routes, 2))
    record.classification = classify(geo, forms, result, gauss, tol)
    return record


# ── Report ──


@dataclass
class CheckRecord:
    name: str
    kind: CheckKind
    asserted: bool
    tolerance: float
    max_abs_residual: float
    worst_point: tuple[float, float] | None
    points: int

    @property
    def passed(self) -> bool:
        return self.max_abs_residual <= self.tolerance

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "asserted": self.asserted,
            "tolerance": self.tolerance,
            "max_abs_residual": self.max_abs_residual,
            "worst_point": list(self.worst_point) if self.worst_point else None,
            "points": self.points,
            "pass": self.passed,
        }


def aggregate_check(
    spec: CheckSpec, records: Sequence[PointRecord], tolerance: float, asserted: bool
) -> CheckRecord:
    """Largest residual over the records that evaluated the check (0 when none did)."""
    worst, where, count = 0.0, None, 0
    for rec in records:
        value = rec.residuals.get(spec.name)
        if value is None:
            continue
        count += 1
        value = float(value)
        if where is None or value > worst or not np.isfinite(value):
            worst, where = value, rec.point
    return CheckRecord(spec.name, spec.kind, asserted, tolerance, worst, where, count)


def summarize_classification(records: Sequence[PointRecord]) -> dict[str, Any]:
    reports = [rec.classification for rec in records if rec.classification is not None]
    counts = {name: sum(1 for c in reports if getattr(c, name)) for name in ClassificationReport.FLAGS}
    gauss = [c.gauss_curvature for c in reports]
    return {
        "points": len(records),
        "evaluated": len(reports),
        "frame_points": sum(1 for rec in records if rec.frame is not None),
        "counts": counts,
        "all": {name: bool(reports) and counts[name] == len(reports) for name in counts},
        "gauss_range": [min(gauss), max(gauss)] if gauss else None,
        "indeterminate": [
            {"point": list(c.point), "flags": list(c.indeterminate)} for c in reports if c.indeterminate
        ],
        "errors": [
            {"point": list(rec.point), "error": rec.error, "excluded": rec.excluded}
            for rec in records if rec.error is not None
        ],
    }


def compare_expected(profile: ExpectedProfile, classification: dict[str, Any]) -> dict[str, Any]:
    """Profile plus whether every evaluated point shows the expected flags and G."""
    out = profile.as_dict()
    flags_match = {name: classification["all"].get(name, False) == want
                   for name, want in profile.flags.items()}
    out["flags_match"] = flags_match
    gauss_range = classification["gauss_range"]
    out["observed_G"] = gauss_range
    out["matches"] = all(flags_match.values())
    return out


def _plain(value: Any) -> Any:
    """JSON-ready copy: numpy scalars to Python floats, tuples to lists."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


@dataclass
class VerificationReport:
    """Aggregated result of one verification sweep."""

    family: str
    params: dict[str, Any]
    ambient: str
    grid: dict[str, Any]
    backend: str
    tolerances: dict[str, float]
    checks: dict[str, CheckRecord]
    classification: dict[str, Any]
    expected: dict[str, Any]
    records: list[PointRecord] = field(default_factory=list, repr=False)
    timings: dict[str, float] = field(default_factory=dict)
    command: str = "verify"

    @property
    def failed(self) -> list[str]:
        """Asserted checks that failed, plus 'point-errors' when a point could not be evaluated."""
        out = [name for name, c in self.checks.items() if c.asserted and not c.passed]
        if any(e for e in self.classification["errors"] if not e["excluded"]):
            out.append("point-errors")
        return out

    @property
    def status(self) -> str:
        return "fail" if self.failed else "pass"

    def to_dict(self) -> dict[str, Any]:
        return _plain({
            "schema": SCHEMA,
            "command": self.command,
            "family": self.family,
            "params": self.params,
            "ambient": self.ambient,
            "grid": self.grid,
            "backend": self.backend,
            "tolerances": self.tolerances,
            "checks": {name: c.as_dict() for name, c in self.checks.items()},
            "classification": self.classification,
            "expected": self.expected,
            "status": self.status,
            "timings": self.timings,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path

    def write_csv(self, path: str | Path) -> Path:
        """One row per grid point: x, y, then residuals in registry order (blank if not evaluated)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", *CHECK_NAMES])
            for rec in sorted(self.records, key=lambda r: r.index):
                row = [repr(rec.point[0]), repr(rec.point[1])]
                row += [repr(float(rec.residuals[n])) if n in rec.residuals else "" for n in CHECK_NAMES]
                writer.writerow(row)
        return path

    def __str__(self) -> str:
        passed = sum(1 for c in self.checks.values() if c.passed)
        return f"{self.family} [{self.backend}]: {passed}/{len(self.checks)} checks pass, status {self.status}"


def assemble_report(
    patch: ImmersionPatch,
    profile: ExpectedProfile,
    records: Sequence[PointRecord],
    grid: dict[str, Any],
    backend: str,
    tol: float,
    overrides: dict[str, float] | None = None,
    timings: dict[str, float] | None = None,
) -> VerificationReport:
    records = sorted(records, key=lambda r: r.index)
    tolerances = resolve_tolerances(tol, overrides)
    checks = {
        spec.name: aggregate_check(spec, records, tolerances[spec.name], is_asserted(spec, profile))
        for spec in CHECKS
    }
    classification = summarize_classification(records)
    return VerificationReport(
        family=patch.name,
        params=dict(patch.params),
        ambient=str(patch.ambient),
        grid=grid,
        backend=backend,
        tolerances={"base": tol, **tolerances},
        checks=checks,
        classification=classification,
        expected=compare_expected(profile, classification),
        records=list(records),
        timings=dict(timings or {}),
    )
