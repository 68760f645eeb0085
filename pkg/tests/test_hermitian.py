"""Pseudo-Hermitian arithmetic on C^n_s."""

import numpy as np
import pytest

from qbh.errors import DimensionError
from qbh.hermitian import (
    Causal,
    ComplexVec,
    causal_character,
    hermitian,
    inner,
    metric_signs,
)


def _random_vec(rng: np.random.Generator, n: int, s: int) -> ComplexVec:
    return ComplexVec(rng.normal(size=n) + 1j * rng.normal(size=n), s)


def test_metric_signs() -> None:
    assert list(metric_signs(3, 1)) == [-1.0, 1.0, 1.0]
    assert list(metric_signs(3, 2)) == [-1.0, -1.0, 1.0]
    assert list(metric_signs(2, 0)) == [1.0, 1.0]
    with pytest.raises(ValueError):
        metric_signs(2, 3)


def test_inner_of_basis_vectors() -> None:
    e1 = ComplexVec.of([1, 0], index=1)
    e2 = ComplexVec.of([0, 1], index=1)
    assert inner(e1, e1) == -1.0
    assert inner(e2, e2) == 1.0
    assert inner(e1, e2) == 0.0
    assert inner(ComplexVec.of([1, 2], 1), ComplexVec.of([1, 2], 1)) == 3.0


def test_hermitian_splits_into_metric_and_symplectic_parts() -> None:
    rng = np.random.default_rng(7)
    for n, s in ((2, 1), (3, 1), (3, 2)):
        for _ in range(20):
            u, v = _random_vec(rng, n, s), _random_vec(rng, n, s)
            h = hermitian(u, v)
            assert h.real == pytest.approx(inner(u, v), abs=1e-12)
            assert h.imag == pytest.approx(inner(u, v.J()), abs=1e-12)


def test_complex_structure_is_isometric_and_skew() -> None:
    rng = np.random.default_rng(11)
    for _ in range(20):
        u, v = _random_vec(rng, 3, 1), _random_vec(rng, 3, 1)
        assert inner(u.J(), v.J()) == pytest.approx(inner(u, v), abs=1e-12)
        assert inner(u, u.J()) == pytest.approx(0.0, abs=1e-12)
        assert inner(u.J(), v) == pytest.approx(-inner(u, v.J()), abs=1e-12)


def test_mismatched_signatures_raise() -> None:
    with pytest.raises(DimensionError):
        inner(ComplexVec.of([1, 0], 1), ComplexVec.of([1, 0, 0], 1))
    with pytest.raises(DimensionError):
        ComplexVec.of([1, 0, 0], 1) + ComplexVec.of([1, 0, 0], 2)


class TestCausalCharacter:
    def test_classifies_each_character(self) -> None:
        assert causal_character(ComplexVec.of([1, 1], 1), 1e-12) is Causal.LIGHTLIKE
        assert causal_character(ComplexVec.of([0, 1], 1), 1e-12) is Causal.SPACELIKE
        assert causal_character(ComplexVec.of([1, 0], 1), 1e-12) is Causal.TIMELIKE
        assert causal_character(ComplexVec.of([0, 0], 1), 1e-12) is Causal.ZERO

    def test_threshold_is_absolute(self) -> None:
        nearly_null = ComplexVec.of([1.0, 1.0 + 1e-10], 1)
        assert causal_character(nearly_null, 1e-8) is Causal.LIGHTLIKE
        assert causal_character(nearly_null, 1e-12) is Causal.SPACELIKE

    def test_raw_arrays_need_an_index(self) -> None:
        assert causal_character(np.array([1j, 1]), 1e-12, index=1) is Causal.LIGHTLIKE
        with pytest.raises(ValueError):
            causal_character(np.array([1, 1]), 1e-12)

    def test_rejects_non_positive_tolerance(self) -> None:
        with pytest.raises(ValueError):
            causal_character(ComplexVec.of([1, 0], 1), 0.0)
