"""Family registry, builders and acceptance probes."""

import pytest

from qbh.curves import CurveSpec
from qbh.errors import (
    CurveConstraintError,
    FamilyError,
    FamilyTranscriptionError,
    UnknownFamilyError,
    WindowError,
)
from qbh.families import (
    Provenance,
    build_family,
    describe_family,
    expected_profile,
    family_names,
    make_ch_family,
    make_cp_family,
    make_flat_family,
)
from qbh.families import lifts
from qbh.families.probes import grid_points, lift_norm_probe
from qbh.geometry import classify_point
from qbh.jets import Jet

EXPECTED_NAMES = [
    "thm6-flat-biharmonic",
    "thm7-flat-qbh",
    "thm9-i",
    "thm9-ii",
    "thm9-iii",
    "thm9-iv",
    "thm9-corrected",
    "thm10-i",
    "thm10-ii",
    "thm10-iii",
    "thm10-iv",
    "plane-minimal",
]


def test_registry_order() -> None:
    assert family_names() == EXPECTED_NAMES


def test_unknown_family() -> None:
    with pytest.raises(UnknownFamilyError) as info:
        build_family("thm11")
    assert "thm9-i" in str(info.value)
    with pytest.raises(UnknownFamilyError):
        expected_profile("thm11")


@pytest.mark.parametrize("name", EXPECTED_NAMES)
def test_every_family_builds_on_its_default_window(name: str) -> None:
    patch = build_family(name)
    assert patch.name == name
    residual, _ = lift_norm_probe(patch)
    assert residual <= 1e-10


class TestParameters:
    def test_defaults_are_merged(self) -> None:
        assert build_family("thm9-i").params == {"a": 1.0}
        assert build_family("thm9-i", {"a": 2.0}).params == {"a": 2.0}
        assert build_family("thm9-corrected").params == {"a": 1.0, "delta": 0.0}

    @pytest.mark.parametrize("name, params", [
        ("thm9-i", {"a": 0.0}),
        ("thm9-iii", {"b": -1.0}),
        ("thm7-flat-qbh", {"mu": 0.0}),
        ("thm9-ii", {"slope": 0.0}),
        ("thm10-ii", {"slope": 0.0}),
    ])
    def test_degenerate_parameters(self, name: str, params: dict) -> None:
        with pytest.raises(FamilyError):
            build_family(name, params)


class TestWindows:
    def test_window_touching_the_singular_locus(self) -> None:
        with pytest.raises(WindowError):
            build_family("thm10-i", window=((0.0, 1.0), (0.0, 1.0)))
        with pytest.raises(WindowError):
            build_family("thm9-i", window=((-1.0, 1.0), (-1.0, 1.0)))

    def test_builders_check_the_window_themselves(self) -> None:
        with pytest.raises(WindowError):
            make_cp_family("thm9-i", window=((-1.0, 1.0), (-1.0, 1.0)))
        with pytest.raises(WindowError):
            make_ch_family("thm10-i", window=((0.0, 1.0), (0.0, 1.0)))

    def test_unvalidated_builder_accepts_any_window(self) -> None:
        patch = make_cp_family("thm9-i", window=((0.01, 0.03), (0.01, 0.03)), validate=False)
        assert patch.window == ((0.01, 0.03), (0.01, 0.03))

    def test_singular_predicate(self) -> None:
        patch = build_family("thm10-i")
        assert patch.is_singular(0.7, 0.7)
        assert not patch.is_singular(1.5, 0.5)

    def test_grid_points_are_row_major(self) -> None:
        points = grid_points(((0.0, 1.0), (0.0, 2.0)), 3, 2)
        assert points[:3] == [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]
        assert points[-1] == (1.0, 2.0)
        assert grid_points(((0.0, 1.0), (0.0, 1.0)), 1, 1) == [(0.5, 0.5)]


class TestTranscription:
    """A lift that is off the pseudo-sphere by a constant factor is refused."""

    @staticmethod
    def _scaled(formula):
        def build(coefficient):
            lift = formula(coefficient)
            return lambda x, y: [1.01 * c for c in lift(x, y)]

        return build

    def test_cp_builder(self, monkeypatch) -> None:
        monkeypatch.setattr(lifts, "_thm9_i", self._scaled(lifts._thm9_i))
        with pytest.raises(FamilyTranscriptionError) as info:
            make_cp_family("thm9-i")
        assert info.value.residual == pytest.approx(0.0201, rel=1e-6)

    def test_ch_builder(self, monkeypatch) -> None:
        monkeypatch.setattr(lifts, "_thm10_i", self._scaled(lifts._thm10_i))
        with pytest.raises(FamilyTranscriptionError):
            make_ch_family("thm10-i")
        with pytest.raises(FamilyTranscriptionError):
            build_family("thm10-i")

    def test_skipped_when_not_validating(self, monkeypatch) -> None:
        monkeypatch.setattr(lifts, "_thm9_i", self._scaled(lifts._thm9_i))
        assert make_cp_family("thm9-i", validate=False).name == "thm9-i"


class TestCurves:
    def test_thm7_rejects_a_straight_curve(self) -> None:
        def evaluator(t: float, order: int) -> Jet:
            u = Jet.variable(0, (t,), order)
            return Jet.stack([u, u])

        line = CurveSpec(evaluator, n=2, index=1)
        with pytest.raises(CurveConstraintError):
            make_flat_family("thm7-flat-qbh", {"mu": 1.0}, curve=line)

    def test_thm7_accepts_another_mu(self) -> None:
        patch = build_family("thm7-flat-qbh", {"mu": -2.0})
        assert patch.params["mu"] == -2.0


class TestProfiles:
    def test_asserted_profiles(self) -> None:
        profile = expected_profile("thm9-i")
        assert profile.provenance is Provenance.PAPER_ASSERTED
        assert profile.asserted
        assert profile.flags == {"marginally_trapped": True, "quasi_biharmonic": True}
        assert profile.gauss == 1.0
        assert "a2bc-zero" in profile.checks
        assert expected_profile("thm7-flat-qbh").gauss == 0.0
        assert expected_profile("thm10-i").gauss == -1.0

    def test_corrected_profiles_are_not_asserted(self) -> None:
        for name in ("thm9-ii", "thm9-iii", "thm9-iv", "thm10-ii", "thm10-iii", "thm10-iv"):
            profile = expected_profile(name)
            assert profile.provenance is Provenance.PAPER_CORRECTED
            assert not profile.asserted
            assert profile.note

    def test_trivial_profile(self) -> None:
        profile = expected_profile("plane-minimal")
        assert profile.provenance is Provenance.TRIVIAL
        assert profile.asserted
        assert profile.flags["minimal"]
        assert profile.as_dict()["provenance"] == "trivial"

    def test_describe(self) -> None:
        info = describe_family("thm10-i")
        assert info["name"] == "thm10-i"
        assert info["window"] == [[1.0, 2.0], [0.2, 0.8]]
        assert info["params"] == {"a": 1.0}
        assert info["provenance"] == "paper-asserted"
        assert "CH" in info["ambient"]


def test_corrected_family_reduces_to_thm9_i() -> None:
    plain = build_family("thm9-i", {"a": 1.0})
    corrected = build_family("thm9-corrected", {"a": 1.0, "delta": 0.0})
    for point in grid_points(plain.window, 3, 3):
        expected = classify_point(plain, point)
        report = classify_point(corrected, point)
        assert report.flags() == expected.flags(), point
        assert report.indeterminate == expected.indeterminate
        assert report.gauss_curvature == pytest.approx(expected.gauss_curvature, abs=1e-6)
