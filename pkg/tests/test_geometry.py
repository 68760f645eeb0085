"""Point geometry, fundamental forms, bitension and classification."""

import numpy as np
import pytest

from qbh.errors import DegenerateMetricError, ExcludedPointError
from qbh.families import build_family
from qbh.families.probes import grid_points
from qbh.geometry import (
    AmbientSpec,
    ImmersionPatch,
    bitension,
    classify_point,
    fundamental_forms,
    gauss_curvature,
    horizontal_probe,
    point_geometry,
    projection_curvature_residual,
    spaceform_connection,
    structural_residuals,
)
from qbh.hermitian import Causal
from qbh.jets import Jet

FLAT = AmbientSpec.from_name("flat")


class TestAmbient:
    def test_known_ambients(self) -> None:
        assert FLAT.epsilon == 0.0
        assert not FLAT.is_lift
        cp, ch = AmbientSpec.from_name("cp"), AmbientSpec.from_name("CH")
        assert (cp.lift_dim, cp.lift_index, cp.lift_norm) == (3, 1, 1.0)
        assert (ch.lift_dim, ch.lift_index, ch.lift_norm) == (3, 2, -1.0)

    def test_unknown_ambient(self) -> None:
        with pytest.raises(ValueError):
            AmbientSpec.from_name("sphere")

    @pytest.mark.parametrize("name", ["cp", "ch"])
    def test_projected_connection_has_the_space_form_curvature(self, name: str) -> None:
        ambient = AmbientSpec.from_name(name)
        rng = np.random.default_rng(2024)
        for _ in range(5):
            lift, x, y, z = horizontal_probe(ambient, rng)
            assert projection_curvature_residual(ambient, lift, x, y, z) <= 1e-7


class TestRealPlane:
    def test_first_order_data(self, plane_patch) -> None:
        geo = point_geometry(plane_patch, (0.3, 0.4))
        assert np.allclose(geo.metric, [[1.0, 0.0], [0.0, -1.0]])
        assert geo.det_g == pytest.approx(-1.0)
        assert geo.lagrangian_residual == 0.0
        assert np.all(geo.christoffel == 0)

    def test_totally_geodesic(self, plane_patch) -> None:
        geo = point_geometry(plane_patch, (0.3, 0.4))
        forms = fundamental_forms(geo)
        assert np.all(np.abs(forms.h_values) == 0)
        result = bitension(geo, forms)
        assert np.linalg.norm(result.tau2) == 0.0
        assert result.h_causal is Causal.ZERO
        assert gauss_curvature(geo) == 0.0

    def test_classified_minimal_and_biharmonic(self, plane_patch) -> None:
        report = classify_point(plane_patch, (0.5, 0.5))
        assert report.minimal and report.biharmonic and report.lagrangian
        assert not report.marginally_trapped
        assert not report.quasi_biharmonic

    def test_fd_backend_is_exact_on_linear_maps(self, plane_patch) -> None:
        geo = point_geometry(plane_patch, (0.3, 0.4), backend="fd")
        assert np.allclose(geo.metric, [[1.0, 0.0], [0.0, -1.0]], atol=1e-12)
        assert geo.fd_errors is not None


class TestFlatQuasiBiharmonic:
    def test_null_coordinates(self, thm7_patch) -> None:
        geo = point_geometry(thm7_patch, (0.3, 0.7))
        assert np.allclose(geo.metric, [[0.0, -1.0], [-1.0, 0.0]], atol=1e-12)
        assert geo.lagrangian_residual <= 1e-12

    def test_marginally_trapped_and_flat(self, thm7_patch) -> None:
        for point in ((0.2, 0.3), (0.5, 0.5), (0.8, 0.1)):
            geo = point_geometry(thm7_patch, point)
            H = fundamental_forms(geo).H
            assert abs(geo.ip(H, H)) <= 1e-12
            assert np.linalg.norm(H) > 0.1
            assert gauss_curvature(geo) == pytest.approx(0.0, abs=1e-9)

    def test_classification(self, thm7_patch) -> None:
        report = classify_point(thm7_patch, (0.4, 0.6))
        assert report.marginally_trapped and report.quasi_biharmonic
        assert not report.biharmonic


class TestLiftedSurface:
    def test_lift_stays_horizontal_on_the_sphere(self, thm9_point) -> None:
        geo, _ = thm9_point
        assert geo.lift_norm_residual <= 1e-12
        assert geo.horizontality_residual <= 1e-10
        assert geo.lagrangian_residual <= 1e-10

    def test_second_fundamental_form_is_normal(self, thm9_point) -> None:
        geo, forms = thm9_point
        for i in range(2):
            for j in range(2):
                for t in geo.tangents:
                    assert abs(geo.ip(forms.h_values[i][j], t.value)) <= 1e-10

    def test_quasi_biharmonic_with_unit_gauss_curvature(self, thm9_point) -> None:
        geo, forms = thm9_point
        result = bitension(geo, forms)
        assert result.h_causal is Causal.LIGHTLIKE
        assert result.tau2_causal is Causal.LIGHTLIKE
        assert result.tau2_norm > 1e-3
        assert result.route_discrepancy <= 1e-7 * (1.0 + result.tau2_norm)
        assert gauss_curvature(geo) == pytest.approx(1.0, abs=1e-8)

    def test_structure_equations(self, thm9_point) -> None:
        geo, forms = thm9_point
        residuals = structural_residuals(geo, forms)
        assert residuals.gauss <= 1e-7
        assert residuals.codazzi <= 1e-7

    def test_classification(self, thm9_patch) -> None:
        report = classify_point(thm9_patch, (0.5, 0.6))
        assert report.marginally_trapped and report.quasi_biharmonic and report.horizontal
        assert not report.biharmonic and not report.minimal
        assert report.gauss_minus_eps <= 1e-8
        assert report.as_dict()["point"] == [0.5, 0.6]

    def test_connection_removes_position_and_vertical_parts(self, thm9_point) -> None:
        geo, _ = thm9_point
        lift = geo.lift.value
        for w in spaceform_connection(geo, geo.lift):
            assert abs(geo.ip(w, lift)) <= 1e-12
            assert abs(geo.ip(w, 1j * lift)) <= 1e-12

    def test_hyperbolic_lift(self) -> None:
        patch = build_family("thm10-i", {"a": 1.0})
        geo = point_geometry(patch, (1.5, 0.5))
        assert geo.lift_norm_residual <= 1e-12
        forms = fundamental_forms(geo)
        result = bitension(geo, forms)
        assert result.tau2_causal is Causal.LIGHTLIKE
        assert gauss_curvature(geo) == pytest.approx(-1.0, abs=1e-8)


class TestBiharmonicFamily:
    def test_bitension_vanishes(self) -> None:
        patch = build_family("thm6-flat-biharmonic")
        report = classify_point(patch, (0.5, 0.5))
        assert report.marginally_trapped and report.biharmonic
        assert report.residuals["tau2_norm"] <= 1e-8


class TestFailures:
    def test_singular_point_is_excluded(self) -> None:
        patch = build_family("thm10-i")
        with pytest.raises(ExcludedPointError):
            point_geometry(patch, (0.5, 0.5))

    def test_degenerate_metric(self) -> None:
        patch = ImmersionPatch("fold", FLAT, lambda x, y: [x, x], ((0.0, 1.0), (0.0, 1.0)))
        with pytest.raises(DegenerateMetricError) as info:
            point_geometry(patch, (0.5, 0.5))
        assert info.value.det_g == 0.0

    def test_constant_field_has_no_derivative(self, plane_patch) -> None:
        geo = point_geometry(plane_patch, (0.1, 0.2))
        field = Jet.constant([1.0, 2.0j], 2, 2, geo.lift.base)
        assert np.all(spaceform_connection(geo, field) == 0)
        assert np.all(spaceform_connection(geo, field, order=2) == 0)

    def test_unknown_backend(self, plane_patch) -> None:
        with pytest.raises(ValueError):
            point_geometry(plane_patch, (0.1, 0.2), backend="symbolic")


@pytest.mark.parametrize("name", ["thm9-i", "thm10-i"])
def test_lightlike_bitension_iff_gauss_equals_epsilon(name: str) -> None:
    patch = build_family(name)
    reports = [classify_point(patch, p) for p in grid_points(patch.window, 3, 3)]
    assert all(r.marginally_trapped for r in reports)
    for report in reports:
        assert report.quasi_biharmonic == (report.gauss_minus_eps <= 1e-7), str(report)
