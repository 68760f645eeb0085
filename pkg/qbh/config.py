"""Configuration: thread cap, tolerances, FD step, output directory.

Config lives in ~/.qbh/config.json (QBH_HOME moves the directory). Getters
resolve the config value, then the built-in default; QBH_THREADS caps the
thread count on top of either.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

DEFAULT_TOLERANCES = {"jet": 1e-8, "fd": 1e-4}
DEFAULT_FD_STEP = 1e-2
MAX_DEFAULT_THREADS = 8


def config_dir() -> Path:
    home = os.environ.get("QBH_HOME")
    if home:
        return Path(home).expanduser()
    return Path.home() / ".qbh"


def config_file() -> Path:
    return config_dir() / "config.json"


def load_config() -> dict[str, Any]:
    """Load the config file; missing or malformed files give an empty config."""
    path = config_file()
    if path.exists():
        try:
            data = json.loads(path.read_text())
            if isinstance(data, dict):
                return data
        except (json.JSONDecodeError, OSError):
            pass
    return {}


def save_config(config: dict[str, Any]) -> None:
    config_dir().mkdir(parents=True, exist_ok=True)
    config_file().write_text(json.dumps(config, indent=2) + "\n")


def _positive_int(value: Any) -> int | None:
    try:
        n = int(value)
    except (TypeError, ValueError):
        return None
    return n if n >= 1 else None


def get_threads() -> int:
    """Grid concurrency: config `threads` (default min(8, cpus)), capped by QBH_THREADS."""
    threads = _positive_int(load_config().get("threads"))
    if threads is None:
        threads = max(1, min(MAX_DEFAULT_THREADS, os.cpu_count() or 1))
    cap = _positive_int(os.environ.get("QBH_THREADS"))
    return min(threads, cap) if cap else threads


def get_default_tolerance(backend: str = "jet") -> float:
    tolerances = load_config().get("tolerances", {})
    if backend in tolerances:
        return float(tolerances[backend])
    return DEFAULT_TOLERANCES.get(backend, DEFAULT_TOLERANCES["jet"])


def get_fd_step() -> float:
    return float(load_config().get("fd_step", DEFAULT_FD_STEP))


def get_output_dir() -> Path:
    """Directory bare report file names resolve against (default: cwd)."""
    out = load_config().get("output_dir")
    if out:
        return Path(out).expanduser().resolve()
    return Path.cwd()
