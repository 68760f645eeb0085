import pytest

from qbh.families import build_family
from qbh.geometry import fundamental_forms, point_geometry


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep ~/.qbh and QBH_THREADS out of every test."""
    home = tmp_path / "qbh-home"
    monkeypatch.setenv("QBH_HOME", str(home))
    monkeypatch.delenv("QBH_THREADS", raising=False)
    return home


@pytest.fixture(scope="session")
def thm9_patch():
    return build_family("thm9-i", {"a": 1.0})


@pytest.fixture(scope="session")
def thm7_patch():
    return build_family("thm7-flat-qbh", {"mu": 1.0})


@pytest.fixture(scope="session")
def plane_patch():
    return build_family("plane-minimal")


@pytest.fixture(scope="session")
def thm9_point(thm9_patch):
    geo = point_geometry(thm9_patch, (0.5, 0.6))
    return geo, fundamental_forms(geo)
