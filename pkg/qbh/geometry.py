"""Pointwise geometry of Lagrangian surfaces in C²₁, CP²₁(4) and CH²₁(−4).

Surfaces in the curved spaces are handled through horizontal lifts L into
S⁵₂(1) ⊂ C³₁ or H⁵₃(−1) ⊂ C³₂. Every covariant derivative along the
surface is a coordinate derivative followed by the projection

    P(W) = W − ε⟨W, L⟩L − ε⟨W, iL⟩iL

(the identity in C²₁). All quantities are built from one order-4 jet of the
map, so derivatives of the metric, Christoffel symbols, second fundamental
form and mean curvature are exact up to rounding.

    from qbh.geometry import point_geometry, fundamental_forms, bitension

    geo = point_geometry(patch, (0.5, 0.6))
    forms = fundamental_forms(geo)
    result = bitension(geo, forms)
    result.route_discrepancy     # ~1e-13 on analytic patches
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np

from qbh import jets
from qbh.errors import DegenerateMetricError, ExcludedPointError
from qbh.hermitian import Causal, causal_character, inner_array
from qbh.jets import Jet, fd_jet, jet_eval, reciprocal

logger = logging.getLogger(__name__)

Window = tuple[tuple[float, float], tuple[float, float]]

# |det g| below this (times the metric scale) is a degenerate metric.
DEGENERATE_TOL = 1e-10

# A classification value this close to its threshold (either side) is flagged.
_AMBIGUITY_FACTOR = 100.0


# ── Ambient spaces ──


class AmbientKind(str, Enum):
    FLAT = "flat"
    CP = "cp"
    CH = "ch"


@dataclass(frozen=True)
class AmbientSpec:
    """Where the surface lives and where its map takes values.

    epsilon is the sign of the holomorphic sectional curvature 4ε;
    (lift_dim, lift_index) is the (n, s) of the C^n_s the map lands in.
    """

    kind: AmbientKind
    epsilon: float
    lift_dim: int
    lift_index: int

    @classmethod
    def from_name(cls, name: str) -> AmbientSpec:
        try:
            kind = AmbientKind(name.lower())
        except ValueError:
            raise ValueError(f"Unknown ambient '{name}' (expected flat, cp or ch)") from None
        return _AMBIENTS[kind]

    @property
    def is_lift(self) -> bool:
        return self.kind is not AmbientKind.FLAT

    @property
    def lift_norm(self) -> float:
        """⟨L, L⟩ required of a lift (1/ε); 0 for the flat ambient, where nothing is required."""
        return 1.0 / self.epsilon if self.is_lift else 0.0

    def inner(self, u: Any, v: Any) -> Any:
        if isinstance(u, Jet):
            return jets.inner(u, v, self.lift_index)
        return float(inner_array(np.asarray(u), np.asarray(v), self.lift_index))

    def project(self, w: Any, lift: Any) -> Any:
        """Remove the position and vertical components of w at the lift point."""
        if not self.is_lift:
            return w
        eps = self.epsilon
        i_lift = 1j * lift
        return w - eps * self.inner(w, lift) * lift - eps * self.inner(w, i_lift) * i_lift

    def curvature(self, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        """R(X, Y)Z of constant holomorphic sectional curvature 4ε."""
        if not self.is_lift:
            return np.zeros_like(np.asarray(z, dtype=complex))
        ip = self.inner
        jx, jy, jz = 1j * x, 1j * y, 1j * z
        return self.epsilon * (
            ip(y, z) * x
            - ip(x, z) * y
            + ip(z, jy) * jx
            - ip(z, jx) * jy
            + 2.0 * ip(x, jy) * jz
        )

    def __str__(self) -> str:
        names = {AmbientKind.FLAT: "C²₁", AmbientKind.CP: "CP²₁(4)", AmbientKind.CH: "CH²₁(−4)"}
        return f"{names[self.kind]} via C^{self.lift_dim}_{self.lift_index}"


_AMBIENTS = {
    AmbientKind.FLAT: AmbientSpec(AmbientKind.FLAT, 0.0, 2, 1),
    AmbientKind.CP: AmbientSpec(AmbientKind.CP, 1.0, 3, 1),
    AmbientKind.CH: AmbientSpec(AmbientKind.CH, -1.0, 3, 2),
}


# ── Patches ──


@dataclass(frozen=True)
class ImmersionPatch:
    """A surface map (x, y) ↦ φ or its horizontal lift L.

    map takes two arguments that are either floats or Jets and returns a
    vector (Jet, array, or a list of components). singular_distance, when
    given, is the distance of (x, y) to the locus where the formula breaks
    down; points closer than `margin` are excluded.
    """

    name: str
    ambient: AmbientSpec
    map: Callable[..., Any]
    window: Window
    singular_distance: Callable[[float, float], float] | None = None
    params: dict[str, Any] = field(default_factory=dict)
    margin: float = 1e-6

    def is_singular(self, x: float, y: float) -> bool:
        if self.singular_distance is None:
            return False
        return self.singular_distance(x, y) <= self.margin

    def evaluate(self, x: float, y: float) -> np.ndarray:
        value = self.map(float(x), float(y))
        if isinstance(value, Jet):
            value = value.value
        return np.asarray(value, dtype=complex)

    def jet(
        self, point: Sequence[float], order: int = 4, backend: str = "jet", step: float = 1e-2
    ) -> tuple[Jet, np.ndarray | None]:
        """Jet of the map at point, with per-coefficient errors for the fd backend.

        Raises:
            ExcludedPointError: point on the singular locus.
        """
        x, y = float(point[0]), float(point[1])
        if self.is_singular(x, y):
            raise ExcludedPointError((x, y))
        if backend == "fd":
            return fd_jet(self.evaluate, (x, y), order, step)
        if backend != "jet":
            raise ValueError(f"Unknown backend '{backend}' (expected jet or fd)")
        return jet_eval(self.map, (x, y), order), None


# ── Point geometry ──


@dataclass
class PointGeometry:
    """First-order data and the induced connection at one point.

    Jet-valued fields keep enough order for the derivatives the second
    fundamental form, the Laplacian and the frame construction take.
    """

    point: tuple[float, float]
    ambient: AmbientSpec
    lift: Jet
    tangents: tuple[Jet, Jet]
    metric: np.ndarray
    det_g: float
    inverse: np.ndarray
    christoffel: np.ndarray  # [k, i, j] = Γ^k_ij
    lagrangian_residual: float
    horizontality_residual: float
    lift_norm_residual: float
    metric_jets: list[list[Jet]] = field(repr=False)
    inverse_jets: list[list[Jet]] = field(repr=False)
    christoffel_jets: list[list[list[Jet]]] = field(repr=False)
    fd_errors: np.ndarray | None = field(default=None, repr=False)

    @property
    def index(self) -> int:
        return self.ambient.lift_index

    def ip(self, u: Any, v: Any) -> Any:
        return self.ambient.inner(u, v)

    def project(self, w: Any) -> Any:
        """Spaceform projection at this point (jets use the lift jet, arrays its value)."""
        lift = self.lift if isinstance(w, Jet) else self.lift.value
        return self.ambient.project(w, lift)

    def covariant(self, v: Jet, i: int) -> Jet:
        """Ambient covariant derivative of a vector field along ∂_i."""
        return self.project(v.diff(i))

    def tangential(self, w: Any) -> Any:
        """Tangential part Σ g^{kl}⟨w, φ_l⟩φ_k."""
        if isinstance(w, Jet):
            out = None
            for k in range(2):
                coef = sum(self.inverse_jets[k][l] * self.ip(w, self.tangents[l]) for l in range(2))
                term = coef * self.tangents[k]
                out = term if out is None else out + term
            return out
        w = np.asarray(w, dtype=complex)
        phis = [t.value for t in self.tangents]
        coords = self.inverse @ np.array([self.ip(w, p) for p in phis])
        return coords[0] * phis[0] + coords[1] * phis[1]

    def normal(self, w: Any) -> Any:
        return w - self.tangential(w)

    def coordinates(self, w: np.ndarray) -> np.ndarray:
        """Components of a tangent vector in the coordinate basis."""
        return self.inverse @ np.array([self.ip(w, t.value) for t in self.tangents])

    def vector(self, coords: np.ndarray) -> np.ndarray:
        return coords[0] * self.tangents[0].value + coords[1] * self.tangents[1].value


def _metric_scale(metric: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(metric)))) ** 2


def point_geometry(
    patch: ImmersionPatch,
    point: Sequence[float],
    backend: str = "jet",
    step: float = 1e-2,
) -> PointGeometry:
    """Induced metric, inverse, Christoffel symbols and first-order residuals.

    Raises:
        ExcludedPointError: point on the singular locus.
        DegenerateMetricError: |det g| ≤ 1e-10 · scale.
    """
    p = (float(point[0]), float(point[1]))
    lift, errors = patch.jet(p, 4, backend, step)
    ambient = patch.ambient
    ip = ambient.inner

    phi = (lift.diff(0), lift.diff(1))
    g = [[ip(phi[i], phi[j]) for j in range(2)] for i in range(2)]
    metric = np.array([[g[i][j].value.real for j in range(2)] for i in range(2)])

    det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
    det_value = float(det.value.real)
    if abs(det_value) <= DEGENERATE_TOL * _metric_scale(metric):
        raise DegenerateMetricError(det_value, p)
    inv_det = reciprocal(det, "det g")
    ginv = [
        [g[1][1] * inv_det, -g[0][1] * inv_det],
        [-g[1][0] * inv_det, g[0][0] * inv_det],
    ]
    inverse = np.array([[ginv[i][j].value.real for j in range(2)] for i in range(2)])

    # dg[a][b][c] = ∂_a g_bc
    dg = [[[g[b][c].diff(a) for c in range(2)] for b in range(2)] for a in range(2)]
    gamma = [
        [
            [
                0.5 * sum(
                    ginv[k][l].truncate(2) * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
                    for l in range(2)
                )
                for j in range(2)
            ]
            for i in range(2)
        ]
        for k in range(2)
    ]
    christoffel = np.array(
        [[[gamma[k][i][j].value.real for j in range(2)] for i in range(2)] for k in range(2)]
    )

    values = [t.value for t in phi]
    lagrangian = abs(ip(1j * values[0], values[1]))
    if ambient.is_lift:
        i_lift = 1j * lift.value
        horizontal = max(abs(ip(v, i_lift)) for v in values)
        norm_residual = abs(ip(lift.value, lift.value) - ambient.lift_norm)
    else:
        horizontal = 0.0
        norm_residual = 0.0

    return PointGeometry(
        point=p,
        ambient=ambient,
        lift=lift,
        tangents=phi,
        metric=metric,
        det_g=det_value,
        inverse=inverse,
        christoffel=christoffel,
        lagrangian_residual=float(lagrangian),
        horizontality_residual=float(horizontal),
        lift_norm_residual=float(norm_residual),
        metric_jets=g,
        inverse_jets=ginv,
        christoffel_jets=gamma,
        fd_errors=errors,
    )


def spaceform_connection(geo: PointGeometry, v: Jet, order: int = 1) -> np.ndarray:
    """Iterated covariant derivatives of an ambient vector field along the surface.

    order 1 gives an array [i] of ∇_i V, order 2 an array [i, j] of ∇_i ∇_j V
    (coordinate fields, no Christoffel correction).

    Raises:
        JetOrderError: v carries fewer than `order` derivative orders.
    """
    if order == 1:
        return np.array([geo.covariant(v, i).value for i in range(2)])
    first = [geo.covariant(v, j) for j in range(2)]
    return np.array([[geo.covariant(first[j], i).value for j in range(2)] for i in range(2)])


# ── Second fundamental form ──


@dataclass
class FundamentalForms:
    """h(∂_i, ∂_j) and H at one point; jets carry order 2."""

    h: list[list[Jet]]
    mean_curvature: Jet

    @property
    def h_values(self) -> np.ndarray:
        return np.array([[self.h[i][j].value for j in range(2)] for i in range(2)])

    @property
    def H(self) -> np.ndarray:
        return self.mean_curvature.value


def fundamental_forms(geo: PointGeometry) -> FundamentalForms:
    """h_ij = normal part of (∇_i φ_j − Γ^k_ij φ_k); H = ½ g^{ij} h_ij."""
    h: list[list[Jet]] = [[None, None], [None, None]]  # type: ignore[list-item]
    for i in range(2):
        for j in range(i, 2):
            second = geo.covariant(geo.tangents[j], i)
            for k in range(2):
                second = second - geo.christoffel_jets[k][i][j] * geo.tangents[k]
            h[i][j] = h[j][i] = geo.normal(second)
    H = 0.5 * sum(geo.inverse_jets[i][j] * h[i][j] for i in range(2) for j in range(2))
    return FundamentalForms(h=h, mean_curvature=H)


def shape_operator(geo: PointGeometry, forms: FundamentalForms, xi: np.ndarray) -> np.ndarray:
    """A_ξ as a matrix on coordinate components: A[k, j] = g^{kl}⟨h_jl, ξ⟩."""
    hv = forms.h_values
    pairing = np.array([[geo.ip(hv[j][l], xi) for l in range(2)] for j in range(2)])
    return geo.inverse @ pairing.T


def _shape_jets(geo: PointGeometry, forms: FundamentalForms, xi: Jet) -> list[list[Jet]]:
    pairing = [[geo.ip(forms.h[j][l], xi) for l in range(2)] for j in range(2)]
    return [
        [sum(geo.inverse_jets[k][l] * pairing[j][l] for l in range(2)) for j in range(2)]
        for k in range(2)
    ]


def normal_connection(geo: PointGeometry, xi: Jet, i: int) -> Jet:
    """D_i ξ: normal part of the ambient derivative of a normal field."""
    return geo.normal(geo.covariant(xi, i))


def tangential_part(geo: PointGeometry, w: Any) -> Any:
    return geo.tangential(w)


def normal_part(geo: PointGeometry, w: Any) -> Any:
    return geo.normal(w)


# ── Laplacians and bitension ──


def hessian_trace(
    geo: PointGeometry,
    v: Jet,
    coeffs: np.ndarray | None = None,
    connection: Callable[[Jet, int], Jet] | None = None,
) -> np.ndarray:
    """C^{ij}(∇_i∇_j V − Γ^k_ij ∇_k V); C defaults to g^{ij}, ∇ to the ambient connection."""
    c = geo.inverse if coeffs is None else coeffs
    d = connection or geo.covariant
    first = [d(v, k) for k in range(2)]
    first_values = [f.value for f in first]
    total = np.zeros(v.value_shape, dtype=complex)
    for i in range(2):
        for j in range(2):
            if c[i, j] == 0.0:
                continue
            second = d(first[j], i).value
            for k in range(2):
                second = second - geo.christoffel[k, i, j] * first_values[k]
            total = total + c[i, j] * second
    return total


def laplacian(geo: PointGeometry, v: Jet) -> np.ndarray:
    """Δ = −trace ∇² (the geometer's sign)."""
    return -hessian_trace(geo, v)


def normal_laplacian(geo: PointGeometry, xi: Jet) -> np.ndarray:
    """Δ^D ξ built from the normal connection."""
    return -hessian_trace(geo, xi, connection=lambda w, i: normal_connection(geo, w, i))


def laplacian_decomposition(geo: PointGeometry, forms: FundamentalForms) -> np.ndarray:
    """ΔH reassembled from its normal Laplacian and shape-operator terms.

    Δ^D H + Σ g^{ij}{h(∂_i, A_H ∂_j) + A_{D_i H} ∂_j + (∇_i A_H) ∂_j}
    """
    H = forms.mean_curvature
    shape_h = _shape_jets(geo, forms, H)
    shape_values = np.array([[shape_h[k][j].value.real for j in range(2)] for k in range(2)])
    dshape = np.array(
        [[[shape_h[m][j].diff(i).value.real for j in range(2)] for m in range(2)] for i in range(2)]
    )
    gamma = geo.christoffel
    hv = forms.h_values
    phis = [t.value for t in geo.tangents]

    total = normal_laplacian(geo, H)
    for i in range(2):
        dh = normal_connection(geo, H, i).value
        a_dh = shape_operator(geo, forms, dh)
        for j in range(2):
            c = geo.inverse[i, j]
            if c == 0.0:
                continue
            term = sum(shape_values[m, j] * hv[i][m] for m in range(2))
            for m in range(2):
                nabla_a = (
                    dshape[i, m, j]
                    + sum(gamma[m, i, k] * shape_values[k, j] for k in range(2))
                    - sum(gamma[k, i, j] * shape_values[m, k] for k in range(2))
                )
                term = term + (a_dh[m, j] + nabla_a) * phis[m]
            total = total + c * term
    return total


@dataclass(frozen=True)
class PseudoFrame:
    """Pseudo-orthonormal tangent frame in coordinate components (rows are e_a)."""

    vectors: np.ndarray
    signs: tuple[float, float]

    def trace_coefficients(self) -> np.ndarray:
        """C^{ij} = Σ_a ε_a E_a^i E_a^j; equals g^{ij} for any such frame."""
        return sum(s * np.outer(e, e) for s, e in zip(self.signs, self.vectors))


def pseudo_orthonormal_frame(
    geo: PointGeometry, first: int = 0, boost: float = 0.0, tol: float = 1e-10
) -> PseudoFrame:
    """Gram–Schmidt from the coordinate direction `first`, spacelike vector first.

    Null coordinates switch to ∂s = (∂x − ∂y)/√2, ∂t = −(∂x + ∂y)/√2. A
    nonzero boost rotates the Lorentzian pair by rapidity `boost`.
    """
    g = geo.metric
    scale = max(1.0, float(np.max(np.abs(g))))

    def q(u: np.ndarray) -> float:
        return float(u @ g @ u)

    v = np.eye(2)[first]
    if abs(q(v)) <= tol * scale:
        logger.debug("null coordinate direction at %s, using the rotated pair", geo.point)
        v = np.array([1.0, -1.0]) / math.sqrt(2.0)
        if abs(q(v)) <= tol * scale:
            v = -np.array([1.0, 1.0]) / math.sqrt(2.0)
    e1 = v / math.sqrt(abs(q(v)))
    s1 = math.copysign(1.0, q(e1))
    w = np.array([-v[1], v[0]])
    w = w - s1 * float(w @ g @ e1) * e1
    e2 = w / math.sqrt(abs(q(w)))
    s2 = math.copysign(1.0, q(e2))

    if s1 < s2:
        e1, e2, s1, s2 = e2, e1, s2, s1
    if boost and s1 != s2:
        ch, sh = math.cosh(boost), math.sinh(boost)
        e1, e2 = ch * e1 + sh * e2, sh * e1 + ch * e2
    return PseudoFrame(np.array([e1, e2]), (s1, s2))


def bitension_direct(
    geo: PointGeometry, forms: FundamentalForms, frame: PseudoFrame | None = None
) -> np.ndarray:
    """τ₂ = trace(∇²τ) + trace R(τ, dφ·)dφ· with τ = 2H.

    The trace runs over `frame` if given, else over g^{ij}.
    """
    c = geo.inverse if frame is None else frame.trace_coefficients()
    tau = 2.0 * forms.mean_curvature
    rough = hessian_trace(geo, tau, coeffs=c)
    phis = [t.value for t in geo.tangents]
    curv = np.zeros_like(rough)
    if geo.ambient.is_lift:
        for i in range(2):
            for j in range(2):
                if c[i, j] != 0.0:
                    curv = curv + c[i, j] * geo.ambient.curvature(tau.value, phis[i], phis[j])
    return rough + curv


def bitension_via_laplacian(
    geo: PointGeometry, forms: FundamentalForms
) -> tuple[np.ndarray, np.ndarray]:
    """(τ₂, ΔH) with τ₂ = −2ΔH + 10εH."""
    lap = laplacian(geo, forms.mean_curvature)
    return -2.0 * lap + 10.0 * geo.ambient.epsilon * forms.H, lap


@dataclass
class BitensionResult:
    tau: np.ndarray
    tau2_direct: np.ndarray
    tau2_laplacian: np.ndarray
    laplacian_H: np.ndarray
    route_discrepancy: float
    h_causal: Causal
    tau2_causal: Causal

    @property
    def tau2(self) -> np.ndarray:
        return self.tau2_direct

    @property
    def tau2_norm(self) -> float:
        return float(np.linalg.norm(self.tau2_direct))


def bitension(geo: PointGeometry, forms: FundamentalForms, tol: float = 1e-8) -> BitensionResult:
    direct = bitension_direct(geo, forms)
    via_lap, lap = bitension_via_laplacian(geo, forms)
    return BitensionResult(
        tau=2.0 * forms.H,
        tau2_direct=direct,
        tau2_laplacian=via_lap,
        laplacian_H=lap,
        route_discrepancy=float(np.linalg.norm(direct - via_lap)),
        h_causal=causal_character(forms.H, tol, geo.index),
        tau2_causal=causal_character(direct, tol, geo.index),
    )


# ── Intrinsic curvature ──


def riemann_tensor(geo: PointGeometry) -> np.ndarray:
    """R[l, k, i, j] with R(∂_i, ∂_j)∂_k = R^l_{kij} ∂_l."""
    gamma = geo.christoffel
    dgamma = np.array(
        [
            [[[geo.christoffel_jets[l][i][j].diff(m).value.real for j in range(2)] for i in range(2)]
             for l in range(2)]
            for m in range(2)
        ]
    )  # [m, l, i, j] = ∂_m Γ^l_ij
    r = np.zeros((2, 2, 2, 2))
    for l in range(2):
        for k in range(2):
            for i in range(2):
                for j in range(2):
                    r[l, k, i, j] = (
                        dgamma[i, l, j, k]
                        - dgamma[j, l, i, k]
                        + sum(gamma[l, i, m] * gamma[m, j, k] - gamma[l, j, m] * gamma[m, i, k]
                              for m in range(2))
                    )
    return r


def gauss_curvature(geo: PointGeometry) -> float:
    """Sectional curvature ⟨R(∂x, ∂y)∂y, ∂x⟩ / det g of the induced metric."""
    r = riemann_tensor(geo)
    r0101 = float(geo.metric[0] @ r[:, 1, 0, 1])
    return r0101 / geo.det_g


@dataclass(frozen=True)
class StructuralResiduals:
    gauss: float
    codazzi: float

    def as_dict(self) -> dict[str, float]:
        return {"gauss": self.gauss, "codazzi": self.codazzi}


def structural_residuals(geo: PointGeometry, forms: FundamentalForms) -> StructuralResiduals:
    """Gauss and Codazzi equations over all coordinate basis vectors.

    Gauss: ⟨R(X,Y)Z,W⟩ − ε(⟨X,W⟩⟨Y,Z⟩ − ⟨X,Z⟩⟨Y,W⟩) − ⟨[A_JZ, A_JW]X, Y⟩.
    Codazzi: (∇̄_i h)(∂_j, ∂_k) − (∇̄_j h)(∂_i, ∂_k).
    """
    g = geo.metric
    eps = geo.ambient.epsilon
    r = riemann_tensor(geo)
    shapes = [shape_operator(geo, forms, 1j * t.value) for t in geo.tangents]

    gauss = 0.0
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    intrinsic = float(g[d] @ r[:, c, a, b])
                    extrinsic = eps * (g[a, d] * g[b, c] - g[a, c] * g[b, d])
                    comm = shapes[c] @ shapes[d] - shapes[d] @ shapes[c]
                    extrinsic += float(comm[:, a] @ g[:, b])
                    gauss = max(gauss, abs(intrinsic - extrinsic))

    gamma = geo.christoffel
    hv = forms.h_values

    def nabla_h(i: int, j: int, k: int) -> np.ndarray:
        out = normal_connection(geo, forms.h[j][k], i).value
        for m in range(2):
            out = out - gamma[m, i, j] * hv[m][k] - gamma[m, i, k] * hv[j][m]
        return out

    codazzi = 0.0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                codazzi = max(codazzi, float(np.linalg.norm(nabla_h(i, j, k) - nabla_h(j, i, k))))
    return StructuralResiduals(gauss=gauss, codazzi=codazzi)


# ── Classification ──


@dataclass
class ClassificationReport:
    """Verdicts and the raw values they were decided from."""

    point: tuple[float, float]
    lagrangian: bool
    horizontal: bool
    marginally_trapped: bool
    minimal: bool
    biharmonic: bool
    quasi_biharmonic: bool
    gauss_curvature: float
    gauss_minus_eps: float
    residuals: dict[str, float]
    indeterminate: tuple[str, ...] = ()

    FLAGS = ("lagrangian", "horizontal", "marginally_trapped", "minimal", "biharmonic", "quasi_biharmonic")

    def flags(self) -> dict[str, bool]:
        return {name: getattr(self, name) for name in self.FLAGS}

    def as_dict(self) -> dict[str, Any]:
        return {
            "point": list(self.point),
            **self.flags(),
            "gauss_curvature": self.gauss_curvature,
            "gauss_minus_eps": self.gauss_minus_eps,
            "residuals": dict(self.residuals),
            "indeterminate": list(self.indeterminate),
        }

    def __str__(self) -> str:
        on = [name for name, value in self.flags().items() if value]
        text = f"({self.point[0]:.3f}, {self.point[1]:.3f}): {', '.join(on) or 'none'}  G={self.gauss_curvature:.10g}"
        if self.indeterminate:
            text += f"  [indeterminate: {', '.join(self.indeterminate)}]"
        return text


def _near(value: float, threshold: float) -> bool:
    return threshold / _AMBIGUITY_FACTOR < value <= threshold * _AMBIGUITY_FACTOR


def second_derivative_scale(geo: PointGeometry) -> float:
    """max(1, max ‖P∂_iφ_j‖): the size zero and null thresholds are measured against."""
    return max(1.0, max(float(np.linalg.norm(geo.covariant(t, i).value))
                        for t in geo.tangents for i in range(2)))


def metric_scale(geo: PointGeometry) -> float:
    return max(1.0, float(np.max(np.abs(geo.metric))))


def null_residual(v: np.ndarray, index: int, scale: float) -> float:
    """|⟨v, v⟩| relative to max(scale², ‖v‖²)."""
    norm = float(np.linalg.norm(v))
    return abs(float(inner_array(v, v, index))) / max(scale**2, norm**2)


def classify(
    geo: PointGeometry,
    forms: FundamentalForms,
    result: BitensionResult,
    gauss: float,
    tol: float = 1e-8,
) -> ClassificationReport:
    """Decide the flags with thresholds scaled by the local second-derivative size."""
    scale = second_derivative_scale(geo)
    lag_scale = metric_scale(geo)
    s = geo.index
    ambiguous: list[str] = []

    def zero_and_null(name: str, v: np.ndarray) -> tuple[bool, bool, float, float]:
        norm = float(np.linalg.norm(v))
        q = float(inner_array(v, v, s))
        zero_thr = tol * scale
        null_thr = tol * max(scale**2, norm**2)
        if _near(norm, zero_thr):
            ambiguous.append(f"{name}-zero")
        if norm > zero_thr and _near(abs(q), null_thr):
            ambiguous.append(f"{name}-lightlike")
        return norm <= zero_thr, abs(q) <= null_thr, norm, q

    h_zero, h_null, h_norm, h_q = zero_and_null("H", forms.H)
    t_zero, t_null, t_norm, t_q = zero_and_null("tau2", result.tau2_direct)

    lag_thr = tol * lag_scale
    if _near(geo.lagrangian_residual, lag_thr):
        ambiguous.append("lagrangian")

    eps = geo.ambient.epsilon
    return ClassificationReport(
        point=geo.point,
        lagrangian=geo.lagrangian_residual <= lag_thr,
        horizontal=geo.horizontality_residual <= lag_thr,
        marginally_trapped=not h_zero and h_null,
        minimal=h_zero,
        biharmonic=t_zero,
        quasi_biharmonic=not t_zero and t_null,
        gauss_curvature=gauss,
        gauss_minus_eps=abs(gauss - eps),
        residuals={
            "lagrangian": geo.lagrangian_residual,
            "horizontal": geo.horizontality_residual,
            "H_norm": h_norm,
            "H_self": h_q,
            "tau2_norm": t_norm,
            "tau2_self": t_q,
            "route_discrepancy": result.route_discrepancy,
        },
        indeterminate=tuple(ambiguous),
    )


def classify_point(
    patch: ImmersionPatch,
    point: Sequence[float],
    tol: float = 1e-8,
    backend: str = "jet",
    step: float = 1e-2,
) -> ClassificationReport:
    geo = point_geometry(patch, point, backend, step)
    forms = fundamental_forms(geo)
    return classify(geo, forms, bitension(geo, forms, tol), gauss_curvature(geo), tol)


# ── Curvature of the projected connection ──


def projection_curvature_residual(
    ambient: AmbientSpec,
    base: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
) -> float:
    """Compare the projected connection's curvature with the closed-form tensor.

    Builds m(s, t) = v / √(ε⟨v, v⟩) with v = base + sX + tY, transports
    Z₀ as the field P_m(Z₀) and returns the relative difference between
    ∇_s∇_t Z − ∇_t∇_s Z at the origin and R(∂_s m, ∂_t m)Z.
    """
    base = np.asarray(base, dtype=complex)
    x, y, z = (np.asarray(v, dtype=complex) for v in (x, y, z))
    s, eps = ambient.lift_index, ambient.epsilon

    def surface(u: Jet, w: Jet) -> Jet:
        v = u * x + w * y + base
        if not ambient.is_lift:
            return v
        return v * reciprocal(jets.sqrt(eps * jets.inner(v, v, s), "ε⟨v,v⟩"), "|v|")

    m = jet_eval(surface, (0.0, 0.0), 2)
    field_z = ambient.project(Jet.constant(z, 2, 2, m.base), m)
    d_s = ambient.project(field_z.diff(0), m)
    d_t = ambient.project(field_z.diff(1), m)
    numeric = ambient.project(d_t.diff(0), m).value - ambient.project(d_s.diff(1), m).value

    expected = ambient.curvature(m.diff(0).value, m.diff(1).value, field_z.value)
    return float(np.linalg.norm(numeric - expected)) / (1.0 + float(np.linalg.norm(expected)))


def horizontal_probe(
    ambient: AmbientSpec, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Random (L, X, Y, Z): L on the pseudo-sphere, X, Y, Z horizontal with ⟨X, JY⟩ = 0."""
    n, s, eps = ambient.lift_dim, ambient.lift_index, ambient.epsilon

    def draw() -> np.ndarray:
        return rng.normal(size=n) + 1j * rng.normal(size=n)

    lift = draw()
    if ambient.is_lift:
        while eps * inner_array(lift, lift, s) < 0.25:
            lift = draw()
        lift = lift / math.sqrt(eps * inner_array(lift, lift, s))

    def horizontal() -> np.ndarray:
        return ambient.project(draw(), lift)

    x = horizontal()
    while abs(inner_array(x, x, s)) < 0.1:
        x = horizontal()
    jx = 1j * x
    y = horizontal()
    y = y - inner_array(y, jx, s) / inner_array(jx, jx, s) * jx
    return lift, x, y, horizontal()
