"""Truncated Taylor jets in one or two real variables, order ≤ 4.

A Jet stores the Taylor coefficients of a (complex scalar or vector valued)
map at a base point: coefficient (i, j) is the mixed partial ∂x^i ∂y^j
divided by i!·j!. Arithmetic on jets is arithmetic on truncated power
series, so composing elementary functions gives exact derivatives.

    from qbh import jets

    J = jets.jet_eval(lambda x, y: jets.exp(1j * x) * y, base=(0.0, 1.0), order=2)
    J.coefficient(1, 0)      # 1j
    J.derivative(1, 1)       # 1j

Elementary functions (exp, cosh, sinh, cos, sin, sqrt, reciprocal) accept
either a Jet or a plain number/array, so one expression serves the jet
backend and point evaluation alike.

fd_jet() builds the same object from a black-box point evaluator with
central differences and Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Sequence

import numpy as np

from qbh.errors import JetOrderError, JetSingularityError, StencilError
from qbh.hermitian import metric_signs

MAX_ORDER = 4

# |u0| below this (relative to the jet's scale) counts as a pole.
_POLE_TOL = 1e-14


# ── Coefficient layout ──


@dataclass(frozen=True)
class _Layout:
    """Flat ordering of multi-indices: by total degree, x-power first."""

    nvars: int
    order: int
    indices: tuple[tuple[int, ...], ...]
    pos: dict
    gather_a: np.ndarray
    gather_b: np.ndarray
    scatter: np.ndarray  # (N, P) 0/1 matrix summing products into outputs
    factorials: np.ndarray

    @property
    def size(self) -> int:
        return len(self.indices)


def _multi_indices(nvars: int, order: int) -> list[tuple[int, ...]]:
    if nvars == 1:
        return [(d,) for d in range(order + 1)]
    out = []
    for d in range(order + 1):
        for i in range(d, -1, -1):
            out.append((i, d - i))
    return out


@lru_cache(maxsize=None)
def layout(nvars: int, order: int) -> _Layout:
    if nvars not in (1, 2):
        raise ValueError(f"Jets support 1 or 2 variables, got {nvars}")
    if not 0 <= order <= MAX_ORDER + 1:
        raise JetOrderError(order, MAX_ORDER)
    indices = _multi_indices(nvars, order)
    pos = {m: k for k, m in enumerate(indices)}

    ga, gb, out = [], [], []
    for p, mp in enumerate(indices):
        for q, mq in enumerate(indices):
            total = tuple(a + b for a, b in zip(mp, mq))
            if sum(total) <= order:
                ga.append(p)
                gb.append(q)
                out.append(pos[total])
    scatter = np.zeros((len(indices), len(out)))
    scatter[out, np.arange(len(out))] = 1.0

    factorials = np.array(
        [math.prod(math.factorial(i) for i in m) for m in indices], dtype=float
    )
    return _Layout(
        nvars=nvars,
        order=order,
        indices=tuple(indices),
        pos=pos,
        gather_a=np.array(ga, dtype=int),
        gather_b=np.array(gb, dtype=int),
        scatter=scatter,
        factorials=factorials,
    )


@lru_cache(maxsize=None)
def _derivative_map(nvars: int, order: int, var: int) -> tuple[np.ndarray, np.ndarray]:
    """Source positions and factors taking a jet of `order` to its var-derivative."""
    src_layout = layout(nvars, order)
    dst_layout = layout(nvars, order - 1)
    src, fac = [], []
    for m in dst_layout.indices:
        shifted = list(m)
        shifted[var] += 1
        src.append(src_layout.pos[tuple(shifted)])
        fac.append(float(shifted[var]))
    return np.array(src, dtype=int), np.array(fac)


# ── Jet ──


class Jet:
    """Truncated Taylor expansion at a base point.

    coeffs has shape (N,) + value_shape where N is the number of
    multi-indices of total degree ≤ order (value_shape is () for scalars
    and (n,) for C^n-valued maps).
    """

    __slots__ = ("coeffs", "nvars", "order", "base")
    __array_ufunc__ = None  # numpy defers to the reflected Jet operators

    def __init__(self, coeffs: np.ndarray, nvars: int, order: int, base: tuple[float, ...]) -> None:
        self.coeffs = coeffs
        self.nvars = nvars
        self.order = order
        self.base = base

    # ── Construction ──

    @classmethod
    def constant(cls, value: Any, nvars: int, order: int, base: tuple[float, ...]) -> Jet:
        value = np.asarray(value, dtype=complex)
        coeffs = np.zeros((layout(nvars, order).size,) + value.shape, dtype=complex)
        coeffs[0] = value
        return cls(coeffs, nvars, order, base)

    @classmethod
    def variable(cls, var: int, base: tuple[float, ...], order: int) -> Jet:
        nvars = len(base)
        jet = cls.constant(base[var], nvars, order, base)
        if order >= 1:
            unit = [0] * nvars
            unit[var] = 1
            jet.coeffs[layout(nvars, order).pos[tuple(unit)]] = 1.0
        return jet

    @staticmethod
    def stack(components: Sequence[Any]) -> Jet:
        """Build a vector jet from scalar jets (or constants)."""
        template = next((c for c in components if isinstance(c, Jet)), None)
        if template is None:
            raise ValueError("stack() needs at least one Jet component")
        order = min(c.order for c in components if isinstance(c, Jet))
        n = layout(template.nvars, order).size
        cols = []
        for c in components:
            if isinstance(c, Jet):
                if c.coeffs.ndim != 1:
                    raise ValueError("stack() takes scalar jets")
                cols.append(c.coeffs[:n])
            else:
                col = np.zeros(n, dtype=complex)
                col[0] = complex(c)
                cols.append(col)
        return Jet(np.stack(cols, axis=-1), template.nvars, order, template.base)

    # ── Introspection ──

    @property
    def value(self) -> Any:
        """Value at the base point (the (0,0) coefficient)."""
        return self.coeffs[0]

    @property
    def value_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @property
    def layout(self) -> _Layout:
        return layout(self.nvars, self.order)

    def index(self, *multi: int) -> int:
        key = tuple(multi) + (0,) * (self.nvars - len(multi))
        try:
            return self.layout.pos[key]
        except KeyError:
            raise JetOrderError(sum(key), self.order) from None

    def coefficient(self, *multi: int) -> Any:
        """Taylor coefficient: derivative divided by the factorials."""
        return self.coeffs[self.index(*multi)]

    def derivative(self, *multi: int) -> Any:
        """Mixed partial derivative at the base point."""
        k = self.index(*multi)
        return self.coeffs[k] * self.layout.factorials[k]

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, base={self.base}, shape={self.value_shape})"

    # ── Structural operations ──

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise JetOrderError(order, self.order)
        if order == self.order:
            return self
        n = layout(self.nvars, order).size
        return Jet(self.coeffs[:n], self.nvars, order, self.base)

    def diff(self, var: int = 0) -> Jet:
        """Partial derivative in variable `var`, as a jet one order lower."""
        if self.order < 1:
            raise JetOrderError(1, self.order)
        src, fac = _derivative_map(self.nvars, self.order, var)
        fac = fac.reshape((-1,) + (1,) * len(self.value_shape))
        return Jet(self.coeffs[src] * fac, self.nvars, self.order - 1, self.base)

    def rebase(self, base: tuple[float, ...]) -> Jet:
        return Jet(self.coeffs, self.nvars, self.order, base)

    def __getitem__(self, k: Any) -> Jet:
        return Jet(self.coeffs[(slice(None), k)], self.nvars, self.order, self.base)

    def conj(self) -> Jet:
        return Jet(np.conj(self.coeffs), self.nvars, self.order, self.base)

    @property
    def real(self) -> Jet:
        return Jet(self.coeffs.real.astype(complex), self.nvars, self.order, self.base)

    @property
    def imag(self) -> Jet:
        return Jet(self.coeffs.imag.astype(complex), self.nvars, self.order, self.base)

    def sum(self) -> Jet:
        """Sum over the value components (vector → scalar)."""
        return Jet(self.coeffs.sum(axis=-1), self.nvars, self.order, self.base)

    def scale_components(self, weights: np.ndarray) -> Jet:
        return Jet(self.coeffs * weights, self.nvars, self.order, self.base)

    # ── Arithmetic ──

    def _coerce(self, other: Any) -> Jet:
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError(f"Cannot combine {self.nvars}- and {other.nvars}-variable jets")
            return other
        return Jet.constant(other, self.nvars, self.order, self.base)

    @staticmethod
    def _align(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # value axes are trailing; pad the lower-rank side so scalar*vector broadcasts
        da, db = a.ndim, b.ndim
        if da < db:
            a = a.reshape(a.shape + (1,) * (db - da))
        elif db < da:
            b = b.reshape(b.shape + (1,) * (da - db))
        return a, b

    def __add__(self, other: Any) -> Jet:
        o = self._coerce(other)
        order = min(self.order, o.order)
        n = layout(self.nvars, order).size
        a, b = self._align(self.coeffs[:n], o.coeffs[:n])
        return Jet(a + b, self.nvars, order, self.base)

    __radd__ = __add__

    def __neg__(self) -> Jet:
        return Jet(-self.coeffs, self.nvars, self.order, self.base)

    def __sub__(self, other: Any) -> Jet:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> Jet:
        return self._coerce(other) + (-self)

    def __mul__(self, other: Any) -> Jet:
        if not isinstance(other, Jet):
            value = np.asarray(other)
            if value.ndim == 0:
                return Jet(self.coeffs * value, self.nvars, self.order, self.base)
            other = self._coerce(other)
        order = min(self.order, other.order)
        lay = layout(self.nvars, order)
        a, b = self._align(self.coeffs[: lay.size], other.coeffs[: lay.size])
        products = a[lay.gather_a] * b[lay.gather_b]
        coeffs = np.tensordot(lay.scatter, products, axes=(1, 0))
        return Jet(coeffs, self.nvars, order, self.base)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> Jet:
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other: Any) -> Jet:
        return reciprocal(self) * other

    def __pow__(self, power: int) -> Jet:
        if not isinstance(power, (int, np.integer)) or power < 0:
            return _compose_power(self, float(power))
        result = Jet.constant(np.ones(self.value_shape), self.nvars, self.order, self.base)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result


# ── Elementary functions ──


def compose_taylor(u: Jet, taylor: np.ndarray) -> Jet:
    """f(u) from the Taylor coefficients f^(k)(u0)/k! of f at u0 (Horner in u - u0).

    taylor may carry trailing value axes, so a univariate vector series (a
    curve) composes with a bivariate scalar jet (its parameter).
    """
    if u.value_shape:
        raise ValueError("Composition needs a scalar argument jet")
    taylor = np.asarray(taylor, dtype=complex)
    delta = Jet(u.coeffs.copy(), u.nvars, u.order, u.base)
    delta.coeffs[0] = 0.0
    top = min(len(taylor), u.order + 1) - 1
    result = Jet.constant(taylor[top], u.nvars, u.order, u.base)
    for k in range(top - 1, -1, -1):
        result = result * delta + taylor[k]
    return result


def _factorials(order: int) -> np.ndarray:
    return np.array([math.factorial(k) for k in range(order + 1)], dtype=float)


def _scale(u: Jet) -> float:
    return 1.0 + float(np.max(np.abs(u.coeffs[1:]))) if u.coeffs.shape[0] > 1 else 1.0


def exp(u: Any) -> Any:
    if not isinstance(u, Jet):
        return np.exp(u)
    e = np.exp(u.value)
    return compose_taylor(u, np.full(u.order + 1, e, dtype=complex) / _factorials(u.order))


def cosh(u: Any) -> Any:
    if not isinstance(u, Jet):
        return np.cosh(u)
    c, s = np.cosh(u.value), np.sinh(u.value)
    derivs = np.array([c if k % 2 == 0 else s for k in range(u.order + 1)], dtype=complex)
    return compose_taylor(u, derivs / _factorials(u.order))


def sinh(u: Any) -> Any:
    if not isinstance(u, Jet):
        return np.sinh(u)
    c, s = np.cosh(u.value), np.sinh(u.value)
    derivs = np.array([s if k % 2 == 0 else c for k in range(u.order + 1)], dtype=complex)
    return compose_taylor(u, derivs / _factorials(u.order))


def cos(u: Any) -> Any:
    if not isinstance(u, Jet):
        return np.cos(u)
    c, s = np.cos(u.value), np.sin(u.value)
    cycle = (c, -s, -c, s)
    derivs = np.array([cycle[k % 4] for k in range(u.order + 1)], dtype=complex)
    return compose_taylor(u, derivs / _factorials(u.order))


def sin(u: Any) -> Any:
    if not isinstance(u, Jet):
        return np.sin(u)
    c, s = np.cos(u.value), np.sin(u.value)
    cycle = (s, c, -s, -c)
    derivs = np.array([cycle[k % 4] for k in range(u.order + 1)], dtype=complex)
    return compose_taylor(u, derivs / _factorials(u.order))


def _check_pole(u: Jet, factor: str) -> None:
    if abs(u.value) <= _POLE_TOL * _scale(u):
        raise JetSingularityError(factor, u.base, complex(u.value))


def reciprocal(u: Any, name: str = "1/u") -> Any:
    """1/u; a vanishing argument raises JetSingularityError naming the factor."""
    if not isinstance(u, Jet):
        if np.any(np.asarray(u) == 0):
            raise JetSingularityError(name, None, complex(np.asarray(u).ravel()[0]))
        return 1.0 / u
    _check_pole(u, name)
    u0 = complex(u.value)
    taylor = np.array([(-1) ** k / u0 ** (k + 1) for k in range(u.order + 1)], dtype=complex)
    return compose_taylor(u, taylor)


def _compose_power(u: Jet, p: float, name: str = "u**p") -> Jet:
    _check_pole(u, name)
    u0 = complex(u.value)
    taylor = np.empty(u.order + 1, dtype=complex)
    binom = 1.0
    for k in range(u.order + 1):
        taylor[k] = binom * u0 ** (p - k)
        binom *= (p - k) / (k + 1)
    return compose_taylor(u, taylor)


def sqrt(u: Any, name: str = "sqrt(u)") -> Any:
    """Principal square root; the argument must stay away from zero."""
    if not isinstance(u, Jet):
        return np.sqrt(u)
    return _compose_power(u, 0.5, name)


def inner(a: Jet, b: Jet, index: int) -> Jet:
    """Real pseudo-Euclidean metric of two vector jets, as a scalar jet."""
    signs = metric_signs(a.value_shape[0], index)
    return (a.scale_components(signs) * b.conj()).sum().real


# ── Jet evaluation ──


def jet_eval(expr: Callable[..., Any], base: float | Sequence[float], order: int) -> Jet:
    """Evaluate `expr` on variable jets at `base` and return its jet.

    expr takes one jet per variable and returns a Jet, a constant, or a
    sequence of those (stacked into a vector jet).

    Raises:
        JetOrderError: order above MAX_ORDER.
        JetSingularityError: a reciprocal hits a pole at base.
    """
    if order > MAX_ORDER or order < 0:
        raise JetOrderError(order, MAX_ORDER)
    base_t = (float(base),) if np.isscalar(base) else tuple(float(b) for b in base)
    variables = [Jet.variable(k, base_t, order) for k in range(len(base_t))]
    result = expr(*variables)
    nvars = len(base_t)
    if isinstance(result, Jet):
        return result
    if isinstance(result, (list, tuple)):
        parts = [
            r if isinstance(r, Jet) else Jet.constant(r, nvars, order, base_t)
            for r in result
        ]
        return Jet.stack(parts)
    return Jet.constant(result, nvars, order, base_t)


# ── Finite-difference fallback ──

# Second-order central stencils: derivative count → (offsets, weights).
_STENCILS: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}

_EPS = np.finfo(float).eps


def _stencil_derivatives(
    sample: Callable[[tuple[int, ...], float], np.ndarray],
    indices: Sequence[tuple[int, ...]],
    h: float,
) -> tuple[list[np.ndarray], list[float]]:
    values, roundoff = [], []
    for m in indices:
        per_axis = [_STENCILS[k] for k in m]
        total = 0.0
        weight_mass = 0.0
        grids = np.meshgrid(*[np.arange(len(o)) for o, _ in per_axis], indexing="ij")
        for pick in zip(*(g.ravel() for g in grids)):
            offsets = tuple(per_axis[a][0][k] for a, k in enumerate(pick))
            w = math.prod(per_axis[a][1][k] for a, k in enumerate(pick))
            total = total + w * sample(offsets, h)
            weight_mass += abs(w)
        scale = h ** sum(m)
        values.append(total / scale)
        roundoff.append(weight_mass / scale)
    return values, roundoff


def fd_jet(
    fn: Callable[..., Any],
    base: float | Sequence[float],
    order: int,
    step: float = 1e-2,
) -> tuple[Jet, np.ndarray]:
    """Jet of a black-box map by central differences + Richardson extrapolation.

    Returns (jet, error_estimate) where error_estimate[k] bounds the error of
    the k-th flat coefficient: the step-halving difference of the raw
    differences (a conservative bound for the extrapolated value) plus a
    roundoff floor.

    Raises:
        StencilError: the map returned a non-finite value inside the stencil.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if order > MAX_ORDER or order < 0:
        raise JetOrderError(order, MAX_ORDER)
    base_t = (float(base),) if np.isscalar(base) else tuple(float(b) for b in base)
    nvars = len(base_t)
    lay = layout(nvars, order)

    f0 = np.asarray(fn(*base_t), dtype=complex)
    if not np.all(np.isfinite(f0)):
        raise StencilError(base_t, f0)
    cache: dict[tuple[tuple[int, ...], float], np.ndarray] = {}

    def sample(offsets: tuple[int, ...], h: float) -> np.ndarray:
        key = (offsets, h)
        if key not in cache:
            point = tuple(b + o * h for b, o in zip(base_t, offsets))
            value = np.asarray(fn(*point), dtype=complex)
            if not np.all(np.isfinite(value)):
                raise StencilError(point, value)
            # differences against f0 keep constants exactly zero
            cache[key] = value - f0
        return cache[key]

    higher = lay.indices[1:]
    coarse, _ = _stencil_derivatives(sample, higher, step)
    fine, round_fine = _stencil_derivatives(sample, higher, step / 2)

    magnitude = float(np.max(np.abs(f0))) + max(
        (float(np.max(np.abs(v))) for v in cache.values()), default=0.0
    )
    coeffs = np.zeros((lay.size,) + f0.shape, dtype=complex)
    errors = np.zeros(lay.size)
    coeffs[0] = f0
    for k, (m, dc, df, rf) in enumerate(zip(higher, coarse, fine, round_fine), start=1):
        extrapolated = (4.0 * df - dc) / 3.0
        fact = lay.factorials[k]
        coeffs[k] = extrapolated / fact
        spread = float(np.max(np.abs(df - dc))) / 3.0
        errors[k] = (spread + 8.0 * _EPS * magnitude * rf) / fact
    return Jet(coeffs, nvars, order, base_t), errors
