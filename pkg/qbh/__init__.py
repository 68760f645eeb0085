"""qbh — numerical verification of quasi-biharmonic Lagrangian surfaces.

Lagrangian surfaces in C²₁, CP²₁(4) and CH²₁(−4) are evaluated with exact
Taylor jets; every geometric identity is checked as a residual.

Quick start:
    from qbh import build_family, point_geometry, fundamental_forms, bitension

    patch = build_family("thm9-i", {"a": 1.0})
    geo = point_geometry(patch, (0.5, 0.6))
    result = bitension(geo, fundamental_forms(geo))
    result.tau2_causal               # Causal.LIGHTLIKE
"""

from qbh.families import build_family, expected_profile, family_names
from qbh.frames import build_adapted_frame
from qbh.geometry import (
    AmbientSpec,
    ImmersionPatch,
    bitension,
    classify_point,
    fundamental_forms,
    gauss_curvature,
    point_geometry,
)
from qbh.jets import Jet, fd_jet, jet_eval

__version__ = "0.1.0"
__all__ = [
    "AmbientSpec",
    "ImmersionPatch",
    "Jet",
    "bitension",
    "build_adapted_frame",
    "build_family",
    "classify_point",
    "expected_profile",
    "family_names",
    "fd_jet",
    "fundamental_forms",
    "gauss_curvature",
    "jet_eval",
    "point_geometry",
]
