"""Horizontal lifts of Lagrangian surfaces in CP²₁(4) ⊂ S⁵₂(1) and CH²₁(−4) ⊂ H⁵₃(−1).

Closed forms (thm9-i, thm9-iii, thm10-i, thm10-iii) are written with the
jet-aware primitives so one expression gives both point values and jets.
Curve-based families take their curve from the Legendre ODE, integrated
once per (f, δ, range) and cached.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Any, Callable

from qbh.curves import CurveSpec, integrate_legendre_ode, legendre_report
from qbh.errors import CurveConstraintError, FamilyError, WindowError
from qbh.families.probes import check_lift_norm, check_window
from qbh.geometry import AmbientKind, AmbientSpec, ImmersionPatch, Window
from qbh.jets import cosh, exp, reciprocal, sinh

logger = logging.getLogger(__name__)

CP = AmbientSpec.from_name(AmbientKind.CP.value)
CH = AmbientSpec.from_name(AmbientKind.CH.value)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

ODE_STEP = 5e-4
DRIFT_BOUND = 1e-9
CURVE_TOL = 1e-8

SQUARE_WINDOW: Window = ((0.3, 1.3), (0.3, 1.3))
STRIP_WINDOW: Window = ((1.0, 2.0), (0.2, 0.8))

# (z₁, z₂, z₃) ↦ (z₂, z₃, z₁): an anti-isometry C³₁ → C³₂
ANTI_ISOMETRY = (1, 2, 0)


def _sum_distance(x: float, y: float) -> float:
    return abs(x + y) / SQRT2


def _diff_distance(x: float, y: float) -> float:
    return abs(x - y) / SQRT2


def _axis_distance(x: float, y: float) -> float:
    return abs(y)


def _nonzero(params: dict[str, Any], key: str, family: str, positive: bool = False) -> float:
    value = float(params.setdefault(key, 1.0))
    if value == 0 or (positive and value < 0):
        need = "positive" if positive else "nonzero"
        raise FamilyError(f"{family} needs {need} {key}, got {value}")
    return value


# ── Curves ──


@lru_cache(maxsize=32)
def legendre_curve(f0: float, slope: float, delta: float, t_end: float) -> CurveSpec:
    """Unit-speed spacelike Legendre curve in C³₁ for f(t) = f0 + slope·t."""
    f: float | Callable[[Any], Any] = f0 if slope == 0 else (lambda t: f0 + slope * t)
    curve, drift = integrate_legendre_ode(f, delta, None, (0.0, t_end), ODE_STEP, DRIFT_BOUND)
    logger.debug("legendre curve f0=%g slope=%g delta=%g on [0, %g]: drift %.2e",
                 f0, slope, delta, t_end, drift.max_drift)
    return curve


def _curve_end(window: Window, family: str, default: float, speed_up: float = 1.0) -> float:
    y0, y1 = window[1]
    if y0 < 0.05:
        raise WindowError(family, window, y0)
    return max(default, speed_up * (y1 + 0.1))


def _check_curve(family: str, curve: CurveSpec, window: Window, special: bool = False) -> None:
    y0, y1 = window[1]
    for k in range(5):
        t = y0 + (y1 - y0) * k / 4
        report = legendre_report(curve, t)
        for name, residual in (
            ("<z,z> = 0", report.residual_cone),
            ("<z',z'> = speed", report.residual_speed),
            ("<z',iz> = 0", report.residual_legendre),
        ):
            if residual > CURVE_TOL:
                raise CurveConstraintError(family, name, residual)
        if special and report.residual_special > CURVE_TOL:
            raise CurveConstraintError(family, "<iz',z''> = 0", report.residual_special)


# ── Lift formulas ──


def _thm9_i(a: float) -> Callable[[Any, Any], Any]:
    def lift(x: Any, y: Any) -> Any:
        pre = reciprocal(a * (x + y), "a(x+y)")
        phase = exp(SQRT2 * 1j * a * y)
        return [
            pre * phase * (SQRT2 + 1j * a * (x - y)),
            pre * phase * a * (x - y),
            pre * (SQRT2 + 1j * a * (x + y)),
        ]

    return lift


def _thm9_iii(b: float) -> Callable[[Any, Any], Any]:
    def lift(x: Any, y: Any) -> Any:
        u = b * y
        theta = SQRT6 * b * x / 2
        ch, sh = cosh(theta), sinh(theta)
        pre = exp(1j * b * x / SQRT2) * reciprocal(3 * u, "3by")
        return [
            pre * ((SQRT6 + 1j * SQRT3 * u) * ch - 3 * (SQRT2 * 1j + u) * sh),
            pre * (3 * u * ch + SQRT3 * (1j * u - 2 * SQRT2) * sh),
            pre * (SQRT6 + 1j * SQRT3 * u) * exp(-3j * b * x / SQRT2),
        ]

    return lift


def _thm10_i(a: float) -> Callable[[Any, Any], Any]:
    def lift(x: Any, y: Any) -> Any:
        pre = reciprocal(a * (x - y), "a(x-y)")
        phase = exp(SQRT2 * 1j * a * y)
        return [
            pre * a * phase * (x + y),
            pre * (a * (x - y) + 1j * SQRT2),
            pre * phase * (a * (x + y) + SQRT2 * 1j),
        ]

    return lift


def _thm10_iii(b: float) -> Callable[[Any, Any], Any]:
    # sinh coefficient of the first component is √3; with 3 the lift leaves H⁵₃(−1)
    def lift(x: Any, y: Any) -> Any:
        u = b * y
        theta = SQRT6 * b * x / 2
        ch, sh = cosh(theta), sinh(theta)
        pre = exp(-1j * b * x / SQRT2) * reciprocal(3 * u, "3by")
        return [
            pre * (3 * (u + 1j * SQRT2) * ch + SQRT3 * (SQRT2 + 1j * u) * sh),
            pre * exp(3j * b * x / SQRT2) * (SQRT6 + 1j * SQRT3 * u),
            pre * (3 * u * sh - SQRT3 * (1j * u - 2 * SQRT2) * ch),
        ]

    return lift


def _corrected(curve: CurveSpec, f: Callable[[Any], Any], sign: float) -> Callable[[Any, Any], Any]:
    """L = (2/(x ± y) + √2 i f(y)) z(y) ∓ z'(y); sign +1 for CP, −1 for CH."""

    def lift(x: Any, y: Any) -> Any:
        head = 2.0 * reciprocal(x + sign * y, "x±y") + SQRT2 * 1j * f(y)
        return head * curve.at(y) - sign * curve.at(y, 1)

    return lift


def _null_torsion(curve: CurveSpec, sign: float) -> Callable[[Any, Any], Any]:
    """L = z(y)/(x ± y) − z'(y)/2."""

    def lift(x: Any, y: Any) -> Any:
        return reciprocal(x + sign * y, "x±y") * curve.at(y) - 0.5 * curve.at(y, 1)

    return lift


def _linear(f0: float, slope: float) -> Callable[[Any], Any]:
    return lambda t: f0 + slope * t


# ── Builders ──


def _accepted(patch: ImmersionPatch, validate: bool) -> ImmersionPatch:
    if validate:
        check_window(patch)
        check_lift_norm(patch)
    return patch


def make_cp_family(
    name: str,
    params: dict[str, Any] | None = None,
    curve: CurveSpec | None = None,
    window: Window | None = None,
    validate: bool = True,
) -> ImmersionPatch:
    """Lift patch in S⁵₂(1) ⊂ C³₁ for a CP²₁(4) family.

    The patch is accepted only after the window keeps clear of the singular
    locus and ⟨L, L⟩ = 1 holds on a 5×5 probe grid. validate=False skips
    both, for studies that sit on purpose next to the singular locus.

    Raises:
        FamilyError: unknown name or bad parameter.
        CurveConstraintError: a supplied curve breaks the family's constraints.
        WindowError: window too close to the singular locus or the curve start.
        FamilyTranscriptionError: the lift leaves the pseudo-sphere.
    """
    return _accepted(_cp_patch(name, dict(params or {}), curve, window or SQUARE_WINDOW), validate)


def _cp_patch(name: str, params: dict[str, Any], curve: CurveSpec | None, window: Window) -> ImmersionPatch:
    if name == "thm9-i":
        a = _nonzero(params, "a", name)
        return ImmersionPatch(name, CP, _thm9_i(a), window, _sum_distance, params)

    if name == "thm9-iii":
        b = _nonzero(params, "b", name, positive=True)
        return ImmersionPatch(name, CP, _thm9_iii(b), window, _axis_distance, params)

    if name in ("thm9-ii", "thm9-corrected"):
        if name == "thm9-ii":
            slope = float(params.setdefault("slope", 0.5))
            if slope == 0:
                raise FamilyError("thm9-ii needs a nonconstant f (slope != 0)")
            f0, delta = 1.0, 0.0
        else:
            f0 = _nonzero(params, "a", name)
            delta = float(params.setdefault("delta", 0.0))
            slope = 0.0
        if curve is None:
            curve = legendre_curve(f0, slope, delta, _curve_end(window, name, 1.8))
        _check_curve(name, curve, window)
        lift = _corrected(curve, _linear(f0, slope), 1.0)
        return ImmersionPatch(name, CP, lift, window, _sum_distance, params)

    if name == "thm9-iv":
        if curve is None:
            base = legendre_curve(0.0, 0.0, 1.0, _curve_end(window, name, 3.6, speed_up=2.0))
            curve = base.rescaled(2.0)
        _check_curve(name, curve, window, special=True)
        return ImmersionPatch(name, CP, _null_torsion(curve, 1.0), window, _sum_distance, params)

    raise FamilyError(f"'{name}' is not a CP²₁(4) family")


def make_ch_family(
    name: str,
    params: dict[str, Any] | None = None,
    curve: CurveSpec | None = None,
    window: Window | None = None,
    validate: bool = True,
) -> ImmersionPatch:
    """Lift patch in H⁵₃(−1) ⊂ C³₂ for a CH²₁(−4) family.

    Curve-based instances are CP curves carried into C³₂ by the coordinate
    anti-isometry (conjugated first for thm10-ii). Accepted under the same
    window and ⟨L, L⟩ = −1 probes as make_cp_family.
    """
    return _accepted(_ch_patch(name, dict(params or {}), curve, window), validate)


def _ch_patch(
    name: str, params: dict[str, Any], curve: CurveSpec | None, window: Window | None
) -> ImmersionPatch:
    if name == "thm10-i":
        window = window or STRIP_WINDOW
        a = _nonzero(params, "a", name)
        return ImmersionPatch(name, CH, _thm10_i(a), window, _diff_distance, params)

    if name == "thm10-iii":
        window = window or SQUARE_WINDOW
        b = _nonzero(params, "b", name)
        return ImmersionPatch(name, CH, _thm10_iii(b), window, _axis_distance, params)

    if name == "thm10-ii":
        window = window or STRIP_WINDOW
        slope = float(params.setdefault("slope", 0.5))
        if slope == 0:
            raise FamilyError("thm10-ii needs a nonconstant f (slope != 0)")
        if curve is None:
            base = legendre_curve(1.0, slope, 0.0, _curve_end(window, name, 1.2))
            curve = base.conjugated().permuted(ANTI_ISOMETRY, index=2, speed=-1.0)
        _check_curve(name, curve, window)
        # printed with f̃ = −f: (2/(x−y) − √2 i f̃) z + z'
        lift = _corrected(curve, _linear(1.0, slope), -1.0)
        return ImmersionPatch(name, CH, lift, window, _diff_distance, params)

    if name == "thm10-iv":
        window = window or STRIP_WINDOW
        if curve is None:
            base = legendre_curve(0.0, 0.0, 1.0, _curve_end(window, name, 2.4, speed_up=2.0))
            curve = base.rescaled(2.0).permuted(ANTI_ISOMETRY, index=2, speed=-4.0)
        _check_curve(name, curve, window, special=True)
        return ImmersionPatch(name, CH, _null_torsion(curve, -1.0), window, _diff_distance, params)

    raise FamilyError(f"'{name}' is not a CH²₁(−4) family")
