"""Complex pseudo-Euclidean arithmetic on C^n_s.

The first s complex coordinates are negative definite:

    <u, v> = Re( -sum_{j<=s} u_j conj(v_j) + sum_{i>s} u_i conj(v_i) )

J is multiplication by the imaginary unit.

    from qbh.hermitian import ComplexVec, inner, causal_character

    u = ComplexVec.of([1, 1], index=1)
    inner(u, u)                   # 0.0 (lightlike)
    causal_character(u, 1e-12)    # Causal.LIGHTLIKE
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable

import numpy as np

from qbh.errors import DimensionError


class Causal(str, Enum):
    """Causal character of a vector."""

    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"
    ZERO = "zero"


@lru_cache(maxsize=None)
def metric_signs(n: int, s: int) -> np.ndarray:
    """Diagonal of the real metric: -1 on the first s coordinates, +1 after."""
    if n < 1 or not 0 <= s <= n:
        raise ValueError(f"Invalid signature: n={n}, s={s}")
    signs = np.ones(n)
    signs[:s] = -1.0
    signs.setflags(write=False)
    return signs


def hermitian_array(a: np.ndarray, b: np.ndarray, s: int) -> np.ndarray:
    """Signed Hermitian product over the last axis (complex result)."""
    signs = metric_signs(a.shape[-1], s)
    return np.sum(signs * a * np.conj(b), axis=-1)


def inner_array(a: np.ndarray, b: np.ndarray, s: int) -> np.ndarray:
    """Real metric over the last axis; broadcasts leading axes."""
    return hermitian_array(a, b, s).real


@dataclass(frozen=True, eq=False)
class ComplexVec:
    """A point or vector of C^n_s."""

    coords: np.ndarray
    index: int

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=complex)
        if coords.ndim != 1 or coords.size < 1:
            raise ValueError(f"ComplexVec needs a flat, non-empty coordinate list, got shape {coords.shape}")
        if not 0 <= self.index <= coords.size:
            raise ValueError(f"Index {self.index} outside 0..{coords.size}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, values: Iterable[complex], index: int) -> ComplexVec:
        return cls(np.array(list(values), dtype=complex), index)

    @property
    def n(self) -> int:
        return self.coords.size

    @property
    def signature(self) -> tuple[int, int]:
        return (self.n, self.index)

    def J(self) -> ComplexVec:
        """Complex structure: multiply every coordinate by i."""
        return ComplexVec(1j * self.coords, self.index)

    def norm(self) -> float:
        """Coordinate (Euclidean) norm, used for scale-aware tolerances."""
        return float(np.linalg.norm(self.coords))

    def _check(self, other: ComplexVec) -> None:
        if self.signature != other.signature:
            raise DimensionError(self.signature, other.signature)

    def __add__(self, other: ComplexVec) -> ComplexVec:
        self._check(other)
        return ComplexVec(self.coords + other.coords, self.index)

    def __sub__(self, other: ComplexVec) -> ComplexVec:
        self._check(other)
        return ComplexVec(self.coords - other.coords, self.index)

    def __neg__(self) -> ComplexVec:
        return ComplexVec(-self.coords, self.index)

    def __mul__(self, scalar: complex) -> ComplexVec:
        return ComplexVec(scalar * self.coords, self.index)

    __rmul__ = __mul__

    def __str__(self) -> str:
        parts = ", ".join(f"{z.real:.6g}{z.imag:+.6g}i" for z in self.coords)
        return f"C^{self.n}_{self.index}({parts})"


def inner(u: ComplexVec, v: ComplexVec) -> float:
    """Real pseudo-Euclidean metric <u, v>."""
    if u.signature != v.signature:
        raise DimensionError(u.signature, v.signature)
    return float(inner_array(u.coords, v.coords, u.index))


def hermitian(u: ComplexVec, v: ComplexVec) -> complex:
    """Signed Hermitian product; its real part is inner(), its imaginary part <u, Jv>."""
    if u.signature != v.signature:
        raise DimensionError(u.signature, v.signature)
    return complex(hermitian_array(u.coords, v.coords, u.index))


def causal_character(v: ComplexVec | np.ndarray, tol: float, index: int | None = None) -> Causal:
    """Classify v by the sign of <v, v> with absolute threshold tol.

    Accepts a ComplexVec or a raw coordinate array together with its index.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if isinstance(v, ComplexVec):
        coords, s = v.coords, v.index
    else:
        if index is None:
            raise ValueError("index is required for raw coordinate arrays")
        coords, s = np.asarray(v, dtype=complex), index

    if np.all(np.abs(coords) <= tol):
        return Causal.ZERO
    q = float(inner_array(coords, coords, s))
    if abs(q) <= tol:
        return Causal.LIGHTLIKE
    return Causal.SPACELIKE if q > 0 else Causal.TIMELIKE
