"""Acceptance probes run on every family before it is handed out."""

from __future__ import annotations

import numpy as np

from qbh.errors import FamilyTranscriptionError, WindowError
from qbh.geometry import ImmersionPatch, Window

WINDOW_MARGIN = 0.1
LIFT_NORM_TOL = 1e-10


def grid_points(window: Window, nx: int, ny: int) -> list[tuple[float, float]]:
    """Row-major grid over the window, corners included."""
    (x0, x1), (y0, y1) = window
    xs = np.linspace(x0, x1, nx) if nx > 1 else np.array([(x0 + x1) / 2])
    ys = np.linspace(y0, y1, ny) if ny > 1 else np.array([(y0 + y1) / 2])
    return [(float(x), float(y)) for y in ys for x in xs]


def window_margin(patch: ImmersionPatch, samples: int = 21) -> float:
    if patch.singular_distance is None:
        return float("inf")
    return min(patch.singular_distance(x, y) for x, y in grid_points(patch.window, samples, samples))


def check_window(patch: ImmersionPatch, margin: float = WINDOW_MARGIN) -> None:
    closest = window_margin(patch)
    if closest < margin:
        raise WindowError(patch.name, patch.window, closest)


def lift_norm_probe(patch: ImmersionPatch, n: int = 5) -> tuple[float, tuple[float, float]]:
    """Largest |⟨L, L⟩ − 1/ε| over an n×n probe grid, with the point where it occurs."""
    if not patch.ambient.is_lift:
        return 0.0, (float("nan"), float("nan"))
    ambient = patch.ambient
    worst, where = -1.0, (0.0, 0.0)
    for x, y in grid_points(patch.window, n, n):
        value = patch.evaluate(x, y)
        residual = abs(ambient.inner(value, value) - ambient.lift_norm)
        if residual > worst:
            worst, where = residual, (x, y)
    return worst, where


def check_lift_norm(patch: ImmersionPatch, tol: float = LIFT_NORM_TOL) -> None:
    residual, where = lift_norm_probe(patch)
    if residual > tol:
        raise FamilyTranscriptionError(patch.name, residual, where)
