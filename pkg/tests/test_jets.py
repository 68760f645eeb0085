"""Truncated Taylor jets and the finite-difference fallback."""

import math

import numpy as np
import pytest

from qbh.errors import JetOrderError, JetSingularityError, StencilError
from qbh.jets import (
    Jet,
    cos,
    cosh,
    exp,
    fd_jet,
    inner,
    jet_eval,
    reciprocal,
    sin,
    sinh,
    sqrt,
)


class TestJetArithmetic:
    def test_product_of_variables(self) -> None:
        jet = jet_eval(lambda x, y: x * y, (0.3, -0.2), 4)
        assert jet.value == pytest.approx(-0.06)
        assert jet.derivative(1, 0) == pytest.approx(-0.2)
        assert jet.derivative(0, 1) == pytest.approx(0.3)
        assert jet.derivative(1, 1) == pytest.approx(1.0)
        assert jet.derivative(2, 0) == 0

    def test_exp_derivatives(self) -> None:
        jet = jet_eval(lambda x, y: exp(x + 2 * y), (0.1, 0.2), 4)
        base = math.exp(0.5)
        for i in range(5):
            for j in range(5 - i):
                assert jet.derivative(i, j) == pytest.approx(base * 2**j, rel=1e-13)

    def test_trigonometric_mixed_partial(self) -> None:
        jet = jet_eval(lambda x, y: sin(x) * cos(y), (0.3, 0.4), 4)
        assert jet.derivative(2, 1).real == pytest.approx(math.sin(0.3) * math.sin(0.4), rel=1e-13)
        assert jet.derivative(1, 3).real == pytest.approx(math.cos(0.3) * math.sin(0.4), rel=1e-13)

    def test_hyperbolic_identity(self) -> None:
        jet = jet_eval(lambda x, y: cosh(x * y) ** 2 - (exp(x * y) - exp(-x * y)) ** 2 / 4, (0.7, 1.1), 4)
        assert np.allclose(jet.coeffs, np.eye(jet.coeffs.shape[0])[0], atol=1e-12)

    def test_sqrt_and_power(self) -> None:
        root = jet_eval(lambda t: sqrt(t), 4.0, 2)
        assert root.derivative(1) == pytest.approx(0.25)
        assert root.derivative(2) == pytest.approx(-1.0 / 32.0)
        cube = jet_eval(lambda t: t**3, 2.0, 3)
        assert cube.derivative(2) == pytest.approx(12.0)
        assert cube.derivative(3) == pytest.approx(6.0)

    def test_numpy_arrays_defer_to_jets(self) -> None:
        t = Jet.variable(0, (0.5,), 2)
        scaled = np.array([1.0, 2.0]) * t
        assert isinstance(scaled, Jet)
        assert scaled.value_shape == (2,)
        assert np.allclose(scaled.derivative(1), [1.0, 2.0])

    def test_diff_lowers_order(self) -> None:
        jet = jet_eval(lambda x, y: x**3 * y, (1.0, 2.0), 4)
        dx = jet.diff(0)
        assert dx.order == 3
        assert dx.value == pytest.approx(6.0)
        assert dx.derivative(1, 1) == pytest.approx(6.0)


class TestJetEval:
    def test_list_results_are_stacked(self) -> None:
        jet = jet_eval(lambda x, y: [x, 2.0, x * y], (1.0, 3.0), 2)
        assert jet.value_shape == (3,)
        assert np.allclose(jet.value, [1.0, 2.0, 3.0])
        assert np.allclose(jet.derivative(0, 1), [0.0, 0.0, 1.0])

    def test_constant_result(self) -> None:
        jet = jet_eval(lambda x, y: 5.0, (0.0, 0.0), 3)
        assert jet.value == 5.0
        assert np.all(jet.coeffs[1:] == 0)

    def test_order_cap(self) -> None:
        with pytest.raises(JetOrderError):
            jet_eval(lambda x, y: x, (0.0, 0.0), 5)
        with pytest.raises(JetOrderError):
            jet_eval(lambda x, y: x, (0.0, 0.0), 2).derivative(3, 0)

    def test_reciprocal_pole_names_the_factor(self) -> None:
        with pytest.raises(JetSingularityError) as info:
            jet_eval(lambda x, y: reciprocal(x - y, "x-y"), (0.5, 0.5), 2)
        assert info.value.factor == "x-y"

    def test_reciprocal_away_from_pole(self) -> None:
        jet = jet_eval(lambda t: reciprocal(t), 2.0, 3)
        assert jet.derivative(1) == pytest.approx(-0.25)
        assert jet.derivative(3) == pytest.approx(-6.0 / 16.0)

    def test_vector_inner_product(self) -> None:
        jet = jet_eval(lambda x, y: [x, y], (0.4, 0.9), 2)
        q = inner(jet, jet, 1)
        assert q.value == pytest.approx(0.9**2 - 0.4**2)
        assert q.derivative(1, 0) == pytest.approx(-0.8)
        assert q.derivative(0, 2) == pytest.approx(2.0)


class TestFiniteDifferences:
    @staticmethod
    def _map(x: float, y: float) -> np.ndarray:
        return np.array([np.exp(x) * np.sin(y), x**2 * y + 1j * x])

    def test_matches_exact_jet(self) -> None:
        exact = jet_eval(lambda x, y: [exp(x) * sin(y), x**2 * y + 1j * x], (0.2, 0.7), 4)
        approx, errors = fd_jet(self._map, (0.2, 0.7), 4, step=1e-2)
        low = np.array([sum(m) <= 2 for m in exact.layout.indices])
        assert np.allclose(approx.coeffs[low], exact.coeffs[low], atol=1e-7)
        assert np.allclose(approx.coeffs, exact.coeffs, atol=1e-4)
        assert errors.shape == (exact.layout.size,)
        assert errors[0] == 0.0

    def test_constant_map_is_exact(self) -> None:
        jet, errors = fd_jet(lambda x, y: np.array([2.0, 1j]), (0.1, 0.2), 4)
        assert np.all(jet.coeffs[1:] == 0)
        assert np.allclose(jet.value, [2.0, 1j])
        assert np.all(errors >= 0)

    def test_non_finite_sample_raises(self) -> None:
        def blows_up(x: float, y: float) -> np.ndarray:
            return np.array([np.inf if x <= 0 else 1.0 / x])

        with pytest.raises(StencilError):
            fd_jet(blows_up, (0.01, 0.0), 1, step=1e-2)

    def test_rejects_bad_arguments(self) -> None:
        with pytest.raises(ValueError):
            fd_jet(self._map, (0.0, 0.0), 2, step=0.0)
        with pytest.raises(JetOrderError):
            fd_jet(self._map, (0.0, 0.0), 5)


class TestChainRule:
    """Random compositions of the primitives against exact derivatives."""

    CHAINS = 100

    @staticmethod
    def _primitives(sympy):
        # (jet form, exact form) acting on one inner argument
        return [
            (exp, sympy.exp),
            (sin, sympy.sin),
            (cos, sympy.cos),
            (sinh, sympy.sinh),
            (cosh, sympy.cosh),
            (lambda w: sqrt(2 + w * w), lambda w: sympy.sqrt(2 + w * w)),
            (lambda w: reciprocal(2 + w * w), lambda w: 1 / (2 + w * w)),
            (lambda w: w**3, lambda w: w**3),
        ]

    @staticmethod
    def _compose(chain, x, y, pick):
        (a, b), links = chain
        u = a * x + b * y
        for fns, c, d in links:
            u = fns[pick](c * u + d)
        return u

    def test_random_composites_match_exact_partials(self) -> None:
        sympy = pytest.importorskip("sympy")
        X, Y = sympy.symbols("x y")
        primitives = self._primitives(sympy)
        rng = np.random.default_rng(20240117)
        orders = [(i, n - i) for n in range(1, 5) for i in range(n, -1, -1)]

        for _ in range(self.CHAINS):
            a, b = (float(v) for v in rng.uniform(-1.0, 1.0, size=2))
            links = []
            for _ in range(int(rng.integers(1, 4))):
                fns = primitives[int(rng.integers(len(primitives)))]
                links.append((fns, float(rng.uniform(-0.8, 0.8)), float(rng.uniform(-0.5, 0.5))))
            chain = ((a, b), links)
            x0, y0 = (float(v) for v in rng.uniform(-0.5, 0.5, size=2))

            jet = jet_eval(lambda x, y, chain=chain: self._compose(chain, x, y, 0), (x0, y0), 4)
            partials = {(0, 0): self._compose(chain, X, Y, 1)}
            for i, j in orders:
                partials[(i, j)] = (
                    sympy.diff(partials[(i - 1, j)], X) if i else sympy.diff(partials[(i, j - 1)], Y)
                )
            exact = {key: complex(e.evalf(30, subs={X: x0, Y: y0})) for key, e in partials.items()}
            scale = max(abs(v) for v in exact.values())
            for (i, j), value in exact.items():
                assert abs(jet.derivative(i, j) - value) <= 1e-12 * scale, (chain, (i, j))
