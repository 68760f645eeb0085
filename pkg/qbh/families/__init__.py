"""Explicit Lagrangian surface families, built by name."""

from qbh.families.flat import make_flat_family
from qbh.families.lifts import legendre_curve, make_ch_family, make_cp_family
from qbh.families.registry import (
    ExpectedProfile,
    Provenance,
    build_family,
    describe_family,
    expected_profile,
    family_names,
)

__all__ = [
    "ExpectedProfile",
    "Provenance",
    "build_family",
    "describe_family",
    "expected_profile",
    "family_names",
    "legendre_curve",
    "make_ch_family",
    "make_cp_family",
    "make_flat_family",
]
