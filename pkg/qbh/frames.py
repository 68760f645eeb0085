"""Adapted frames of marginally trapped Lagrangian surfaces.

At a point where H is lightlike and nonzero, v = −JH is a tangent null
vector. Pairing it with the other tangent null direction n (normalised by
⟨v, n⟩ = −2α) gives a pseudo-orthonormal frame

    e₁ = v/(2α) − n/2,   e₂ = v/(2α) + n/2,   H = α(Je₁ + Je₂).

α is a free boost gauge. The construction runs in jet arithmetic, so the
connection form ω(e_k) = −⟨∇_{e_k} e₁, e₂⟩ and the directional derivatives
e_k(α), e_k(a), ... come out of the same jets that define the frame.

The invariants follow h(e₁,e₁) = aJe₁ + bJe₂, h(e₁,e₂) = bJe₁ + cJe₂,
h(e₂,e₂) = cJe₁ + dJe₂.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Union

import numpy as np

from qbh.errors import LagrangianViolationError, NotMarginallyTrappedError
from qbh.geometry import FundamentalForms, PointGeometry, laplacian_decomposition, normal_laplacian
from qbh.jets import Jet, jet_eval, reciprocal

logger = logging.getLogger(__name__)

Gauge = Union[float, Callable[[Any, Any], Any]]

# ‖N(JH)‖ / (1 + ‖H‖) above this means JH is not tangent.
LAGRANGIAN_TOL = 1e-6


@dataclass
class AdaptedFrame:
    """Frame and second-fundamental-form invariants at one point.

    `jets` keeps α, a, b, c, d and ω as jets one order above the values;
    the identity residuals differentiate them.
    """

    point: tuple[float, float]
    gauge: float
    e1: np.ndarray
    e2: np.ndarray
    coords: np.ndarray  # [k, i]: e_k = coords[k, i] ∂_i
    alpha: float
    a: float
    b: float
    c: float
    d: float
    omega: tuple[float, float]
    derivs: dict[str, tuple[float, float]]
    reconstruction: float
    jets: dict[str, Jet]

    def along(self, k: int, jet: Jet) -> float:
        """e_k(f) at the point."""
        return float(sum(self.coords[k, i] * jet.diff(i).value.real for i in range(2)))

    @property
    def a2bc(self) -> float:
        return self.a - 2.0 * self.b - self.c

    def as_dict(self) -> dict[str, Any]:
        return {
            "gauge": self.gauge,
            "alpha": self.alpha,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d": self.d,
            "omega": list(self.omega),
            "reconstruction": self.reconstruction,
        }

    def __str__(self) -> str:
        return (
            f"α={self.alpha:.6g} a={self.a:.6g} b={self.b:.6g} c={self.c:.6g} d={self.d:.6g} "
            f"ω=({self.omega[0]:.6g}, {self.omega[1]:.6g})"
        )


def _gauge_jet(gauge: Gauge, geo: PointGeometry) -> Jet:
    if callable(gauge):
        out = jet_eval(gauge, geo.point, 2)
        if out.value_shape:
            raise ValueError("gauge must be scalar-valued")
        return out
    return Jet.constant(float(gauge), 2, 2, geo.point)


def build_adapted_frame(
    geo: PointGeometry, forms: FundamentalForms, gauge: Gauge = 1.0, tol: float = 1e-8
) -> AdaptedFrame:
    """Adapted frame with α equal to the gauge (a constant or a function of (x, y)).

    Raises:
        NotMarginallyTrappedError: H zero or not lightlike at the point.
        LagrangianViolationError: JH has a normal component.
    """
    ip = geo.ip
    H = forms.mean_curvature
    h_value = H.value
    norm = float(np.linalg.norm(h_value))
    q = float(ip(h_value, h_value))
    scale = max(1.0, max(float(np.linalg.norm(t.value)) for t in geo.tangents))
    if norm <= tol * scale or abs(q) > tol * max(scale**2, norm**2):
        raise NotMarginallyTrappedError(norm, q)

    v = -1j * H
    normal_res = float(np.linalg.norm(geo.normal(v.value))) / (1.0 + norm)
    if normal_res > LAGRANGIAN_TOL:
        raise LagrangianViolationError(normal_res)

    # complement built from the tangent least orthogonal to v
    pairings = [abs(ip(t.value, v.value)) for t in geo.tangents]
    w = geo.tangents[int(np.argmax(pairings))]
    wv = ip(w, v)
    n0 = w - (ip(w, w) * reciprocal(2.0 * wv, "⟨w,v⟩")) * v

    alpha = _gauge_jet(gauge, geo)
    n = n0 * (-2.0 * alpha * reciprocal(wv, "⟨w,v⟩"))
    half = reciprocal(2.0 * alpha, "α")
    e1 = v * half - 0.5 * n
    e2 = v * half + 0.5 * n

    ginv = geo.inverse_jets
    coords_jet = [
        [sum(ginv[i][j] * ip(e, geo.tangents[j]) for j in range(2)) for i in range(2)]
        for e in (e1, e2)
    ]
    coords = np.array([[coords_jet[k][i].value.real for i in range(2)] for k in range(2)])

    def h_of(p: int, r: int) -> Jet:
        return sum(
            coords_jet[p][i] * coords_jet[r][j] * forms.h[i][j] for i in range(2) for j in range(2)
        )

    h11, h12, h22 = h_of(0, 0), h_of(0, 1), h_of(1, 1)
    je1, je2 = 1j * e1, 1j * e2
    a = ip(h11, je1)
    b = -ip(h11, je2)
    c = -ip(h12, je2)
    d = -ip(h22, je2)

    omega = [
        -sum(coords_jet[k][i].truncate(1) * ip(e1.diff(i), e2) for i in range(2)) for k in range(2)
    ]

    values = {name: float(j.value.real) for name, j in zip("abcd", (a, b, c, d))}
    je1v, je2v = je1.value, je2.value
    reconstruction = max(
        float(np.linalg.norm(h11.value - (values["a"] * je1v + values["b"] * je2v))),
        float(np.linalg.norm(h12.value - (values["b"] * je1v + values["c"] * je2v))),
        float(np.linalg.norm(h22.value - (values["c"] * je1v + values["d"] * je2v))),
    )

    jets_by_name = {"alpha": alpha, "a": a, "b": b, "c": c, "d": d, "omega1": omega[0], "omega2": omega[1]}
    frame = AdaptedFrame(
        point=geo.point,
        gauge=float(alpha.value.real),
        e1=e1.value,
        e2=e2.value,
        coords=coords,
        alpha=float(alpha.value.real),
        a=values["a"],
        b=values["b"],
        c=values["c"],
        d=values["d"],
        omega=(float(omega[0].value.real), float(omega[1].value.real)),
        derivs={},
        reconstruction=reconstruction,
        jets=jets_by_name,
    )
    for name in ("alpha", "a", "b", "c", "d"):
        frame.derivs[name] = (frame.along(0, jets_by_name[name]), frame.along(1, jets_by_name[name]))
    logger.debug("adapted frame at %s: %s", geo.point, frame)
    return frame


# ── Identities ──


@dataclass(frozen=True)
class FrameIdentityResiduals:
    """Raw residuals of the frame identities, grouped by check."""

    trace: tuple[float, float]
    gauss: float
    codazzi: tuple[float, float, float]
    derivatives: tuple[float, float, float]
    connection: float

    def by_check(self) -> dict[str, float]:
        return {
            "trace-identities": max(self.trace),
            "gauss-identity": self.gauss,
            "codazzi-frame": max(self.codazzi),
            "frame-derivatives": max(self.derivatives),
            "connection-curvature": self.connection,
        }


def frame_identity_residuals(frame: AdaptedFrame, gauss: float, eps: float) -> FrameIdentityResiduals:
    """Trace, Gauss, Codazzi, frame-derivative and connection-curvature identities."""
    al, a, b, c, d = frame.alpha, frame.a, frame.b, frame.c, frame.d
    w1, w2 = frame.omega
    e1 = {k: v[0] for k, v in frame.derivs.items()}
    e2 = {k: v[1] for k, v in frame.derivs.items()}

    trace = (abs(2 * al - (a + c)), abs(2 * al - (b - d)))
    gauss_res = abs(gauss - ((a - 2 * b - c) * (c - b) + eps))

    codazzi = (
        abs(e2["a"] + 3 * b * w2 + e1["b"] + (a - 2 * c) * w1),
        abs(e2["b"] + (a - 2 * c) * w2 - e1["c"] + (2 * b + d) * w1),
        abs(e1["d"] - 3 * c * w1 - e2["c"] + (2 * b + d) * w2),
    )
    derivatives = (
        abs(e1["alpha"] + e2["alpha"] + al * (w1 + w2)),
        abs(e1["a"] - e1["b"] + e2["b"] + e2["c"]
            - ((a - 3 * b - 2 * c) * w1 + (-2 * a + 3 * b + c) * w2)),
        abs(e2["a"] + e1["b"] - e2["b"] + e1["c"]
            - ((-2 * a + 3 * b + c) * w1 + (a - 3 * b - 2 * c) * w2)),
    )
    e1_w2 = frame.along(0, frame.jets["omega2"])
    e2_w1 = frame.along(1, frame.jets["omega1"])
    connection = abs(gauss - (-e1_w2 + e2_w1 + w1**2 - w2**2))
    return FrameIdentityResiduals(trace, gauss_res, codazzi, derivatives, connection)


def _je(frame: AdaptedFrame) -> tuple[np.ndarray, np.ndarray]:
    return 1j * frame.e1, 1j * frame.e2


def laplacian_normal_closed_form(frame: AdaptedFrame, eps: float) -> np.ndarray:
    """(ΔH)^⊥ in terms of the frame invariants."""
    a, b, c, al = frame.a, frame.b, frame.c, frame.alpha
    k = a - 2 * b - c
    je1, je2 = _je(frame)
    return al * (k * (a + 2 * b - c) - eps) * je1 + al * (k * (-a + 2 * b - 3 * c) - eps) * je2


def laplacian_tangential_closed_form(frame: AdaptedFrame) -> np.ndarray:
    """(ΔH)^T = 2(a − 2b − c){e₁α + αω(e₁)}(e₁ − e₂)."""
    e1_alpha = frame.derivs["alpha"][0]
    return 2 * frame.a2bc * (e1_alpha + frame.alpha * frame.omega[0]) * (frame.e1 - frame.e2)


def bitension_closed_form(frame: AdaptedFrame, eps: float) -> np.ndarray:
    """τ₂ from the frame invariants alone."""
    a, b, c, al = frame.a, frame.b, frame.c, frame.alpha
    k = a - 2 * b - c
    e1_alpha = frame.derivs["alpha"][0]
    je1, je2 = _je(frame)
    return (
        -4 * k * (e1_alpha + al * frame.omega[0]) * (frame.e1 - frame.e2)
        - 2 * al * (k * (a + 2 * b - c) - 6 * eps) * je1
        - 2 * al * (k * (-a + 2 * b - 3 * c) - 6 * eps) * je2
    )


@dataclass(frozen=True)
class LemmaResiduals:
    """Closed forms for ΔH versus the numeric Laplacian, relative to 1 + ‖ΔH‖."""

    normal: float
    normal_laplacian: float
    tangential: float
    decomposition: float

    def by_check(self) -> dict[str, float]:
        return {
            "laplacian-normal": self.normal,
            "normal-laplacian": self.normal_laplacian,
            "laplacian-tangential": self.tangential,
            "laplacian-decomposition": self.decomposition,
        }


def lemma_residuals(
    frame: AdaptedFrame,
    geo: PointGeometry,
    forms: FundamentalForms,
    laplacian_h: np.ndarray,
    gauss: float,
) -> LemmaResiduals:
    eps = geo.ambient.epsilon
    scale = 1.0 + float(np.linalg.norm(laplacian_h))

    def rel(v: np.ndarray) -> float:
        return float(np.linalg.norm(v)) / scale

    return LemmaResiduals(
        normal=rel(geo.normal(laplacian_h) - laplacian_normal_closed_form(frame, eps)),
        normal_laplacian=rel(normal_laplacian(geo, forms.mean_curvature) + gauss * forms.H),
        tangential=rel(geo.tangential(laplacian_h) - laplacian_tangential_closed_form(frame)),
        decomposition=rel(laplacian_decomposition(geo, forms) - laplacian_h),
    )
