"""Exception hierarchy for qbh.

Everything raised on purpose by the library derives from QbhError, so the
CLI can map families of failures onto exit codes:

    UsageError              → exit 2
    FamilyError, CurveError → exit 3
"""

from __future__ import annotations

from typing import Any


class QbhError(Exception):
    """Base class for all qbh errors."""

    pass


class UsageError(QbhError):
    """Bad command-line flags or values."""

    pass


class DimensionError(QbhError):
    """Vectors with different (n, s) were combined."""

    def __init__(self, left: tuple[int, int], right: tuple[int, int]) -> None:
        self.left = left
        self.right = right
        super().__init__(
            f"Dimension mismatch: C^{left[0]}_{left[1]} vs C^{right[0]}_{right[1]}"
        )


# ── Jets ──


class JetError(QbhError):
    """Failure inside jet arithmetic or jet construction."""

    pass


class JetSingularityError(JetError):
    """A reciprocal (or root) was taken at a point where its argument vanishes."""

    def __init__(self, factor: str, base: Any, value: complex) -> None:
        self.factor = factor
        self.base = base
        self.value = value
        super().__init__(
            f"Singular factor '{factor}' at {base}: argument is {value!r}"
        )


class JetOrderError(JetError):
    """A computation needed more derivative orders than the jet carries."""

    def __init__(self, needed: int, available: int) -> None:
        self.needed = needed
        self.available = available
        super().__init__(
            f"Jet order too low: need {needed}, have {available}"
        )


class StencilError(JetError):
    """A finite-difference stencil hit a non-finite evaluation."""

    def __init__(self, point: tuple[float, ...], value: Any) -> None:
        self.point = point
        self.value = value
        super().__init__(f"Non-finite map value {value!r} at stencil point {point}")


# ── Geometry ──


class GeometryError(QbhError):
    """Pointwise geometry could not be evaluated."""

    pass


class ExcludedPointError(GeometryError):
    """The point lies on (or too close to) the patch's singular locus."""

    def __init__(self, point: tuple[float, float], reason: str = "singular locus") -> None:
        self.point = point
        super().__init__(f"Point {point} is excluded: {reason}")


class DegenerateMetricError(GeometryError):
    """The induced metric is (numerically) degenerate."""

    def __init__(self, det_g: float, point: tuple[float, float]) -> None:
        self.det_g = det_g
        self.point = point
        super().__init__(f"Degenerate induced metric at {point}: det g = {det_g:.3e}")


class FrameError(GeometryError):
    """No pseudo-orthonormal or adapted frame could be built."""

    pass


class NotMarginallyTrappedError(FrameError):
    """H is zero or not lightlike, so no adapted frame exists."""

    def __init__(self, norm_h: float, self_product: float) -> None:
        self.norm_h = norm_h
        self.self_product = self_product
        super().__init__(
            f"Not marginally trapped: |H| = {norm_h:.3e}, <H,H> = {self_product:.3e}"
        )


class LagrangianViolationError(FrameError):
    """JH has a normal component, so the surface is not Lagrangian here."""

    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(f"JH is not tangent (normal residual {residual:.3e})")


# ── Curves ──


class CurveError(QbhError):
    """Curve construction, seeding or integration failed."""

    pass


class CurveParameterError(CurveError):
    """A curve parameter is outside its admissible range."""

    pass


class ConstraintViolationError(CurveError):
    """Initial data violates a named algebraic constraint."""

    def __init__(self, name: str, residual: float, bound: float) -> None:
        self.name = name
        self.residual = residual
        self.bound = bound
        super().__init__(
            f"Constraint '{name}' violated: residual {residual:.3e} > {bound:.1e}"
        )


class SeedConstructionError(CurveError):
    """The seed solve did not reach the requested residuals."""

    def __init__(self, residuals: dict[str, float], bound: float) -> None:
        self.residuals = residuals
        worst = max(residuals, key=lambda k: residuals[k])
        super().__init__(
            f"Seed solve failed: worst constraint '{worst}' at "
            f"{residuals[worst]:.3e} (bound {bound:.1e})"
        )


# ── Families ──


class FamilyError(QbhError):
    """A surface family could not be constructed."""

    pass


class UnknownFamilyError(FamilyError):
    """No family is registered under this name."""

    def __init__(self, name: str, known: list[str]) -> None:
        self.name = name
        super().__init__(f"Unknown family '{name}'. Known: {', '.join(known)}")


class FamilyTranscriptionError(FamilyError):
    """The lift does not lie on the pseudo-sphere: the formula was mis-entered."""

    def __init__(self, name: str, residual: float, point: tuple[float, float]) -> None:
        self.name = name
        self.residual = residual
        self.point = point
        super().__init__(
            f"Family '{name}' fails the lift-norm probe at {point}: "
            f"|<L,L> - 1/eps| = {residual:.3e}"
        )


class WindowError(FamilyError):
    """The requested window touches the family's singular locus."""

    def __init__(self, name: str, window: Any, margin: float) -> None:
        self.name = name
        self.window = window
        self.margin = margin
        super().__init__(
            f"Window {window} for '{name}' comes within {margin:.3g} of the singular locus"
        )


class CurveConstraintError(FamilyError):
    """A curve handed to a family builder violates the family's constraint."""

    def __init__(self, family: str, name: str, residual: float) -> None:
        self.family = family
        self.name = name
        self.residual = residual
        super().__init__(
            f"Curve for '{family}' violates '{name}': residual {residual:.3e}"
        )
