"""Lagrangian surfaces in C²₁.

- thm6-flat-biharmonic: φ = c₁ x e^{iy} + z(y), c₁ = (1, 1)
- thm7-flat-qbh:        φ = e^{iμy} z(x), z a null curve in the light cone with ⟨z, iz'⟩ = 1/μ
- plane-minimal:        φ = (y, x), the totally geodesic real plane
"""

from __future__ import annotations

from typing import Any

import numpy as np

from qbh.curves import CurveSpec, legendre_report, make_flat_null_legendre
from qbh.errors import CurveConstraintError, CurveParameterError, FamilyError
from qbh.geometry import AmbientKind, AmbientSpec, ImmersionPatch, Window
from qbh.jets import Jet, exp

FLAT = AmbientSpec.from_name(AmbientKind.FLAT.value)

CURVE_TOL = 1e-10

THM6_C1 = np.array([1.0, 1.0], dtype=complex)

UNIT_WINDOW: Window = ((0.0, 1.0), (0.0, 1.0))


def _thm6_curve() -> CurveSpec:
    half = np.array([-0.5, 0.5], dtype=complex)

    def evaluator(t: float, order: int) -> Jet:
        u = Jet.variable(0, (t,), order)
        return 1j * exp(1j * u) * half

    return CurveSpec(evaluator, n=2, index=1, declared_speed=0.0, name="i e^{iy}(-1,1)/2")


def _check_thm6_curve(curve: CurveSpec, samples: np.ndarray) -> None:
    for t in samples:
        dz = curve.at(float(t), 1)
        frame = THM6_C1 * np.exp(1j * t)
        twist = abs(FLAT.inner(1j * dz, frame))
        if twist > CURVE_TOL:
            raise CurveConstraintError("thm6-flat-biharmonic", "<iz', c1 e^{iy}> = 0", twist)
        pairing = abs(FLAT.inner(dz, frame) + 1.0)
        if pairing > CURVE_TOL:
            raise CurveConstraintError("thm6-flat-biharmonic", "<z', c1 e^{iy}> = -1", pairing)


def _check_thm7_curve(curve: CurveSpec, mu: float, samples: np.ndarray) -> None:
    for t in samples:
        report = legendre_report(curve, float(t))
        if report.residual_cone > CURVE_TOL:
            raise CurveConstraintError("thm7-flat-qbh", "<z,z> = 0", report.residual_cone)
        dz = curve.at(float(t), 1)
        speed = abs(FLAT.inner(dz, dz))
        if speed > CURVE_TOL:
            raise CurveConstraintError("thm7-flat-qbh", "<z',z'> = 0", speed)
        pairing = abs(report.pairing - 1.0 / mu)
        if pairing > CURVE_TOL:
            raise CurveConstraintError("thm7-flat-qbh", "<z,iz'> = 1/mu", pairing)
        accel = float(np.linalg.norm(curve.at(float(t), 2)))
        if accel <= CURVE_TOL:
            raise CurveConstraintError("thm7-flat-qbh", "z'' != 0", accel)


def make_flat_family(
    name: str,
    params: dict[str, Any] | None = None,
    curve: CurveSpec | None = None,
    window: Window | None = None,
) -> ImmersionPatch:
    """Patch for a C²₁ family.

    Raises:
        CurveConstraintError: a supplied curve breaks the family's constraints.
        FamilyError: unknown name or bad parameter.
    """
    params = dict(params or {})
    window = window or UNIT_WINDOW

    if name == "plane-minimal":
        return ImmersionPatch(name, FLAT, lambda x, y: [y, x], window, params=params)

    if name == "thm6-flat-biharmonic":
        curve = curve or _thm6_curve()
        _check_thm6_curve(curve, np.linspace(window[1][0], window[1][1], 7))

        def thm6(x: Any, y: Any) -> Any:
            return exp(1j * y) * x * THM6_C1 + curve.at(y)

        return ImmersionPatch(name, FLAT, thm6, window, params=params)

    if name == "thm7-flat-qbh":
        mu = float(params.setdefault("mu", 1.0))
        if mu == 0:
            raise FamilyError("thm7-flat-qbh needs mu != 0")
        try:
            curve = curve or make_flat_null_legendre(mu)
        except CurveParameterError as e:
            raise FamilyError(str(e)) from e
        _check_thm7_curve(curve, mu, np.linspace(window[0][0], window[0][1], 7))

        def thm7(x: Any, y: Any) -> Any:
            return exp(1j * mu * y) * curve.at(x)

        return ImmersionPatch(name, FLAT, thm7, window, params=params)

    raise FamilyError(f"'{name}' is not a flat family")
