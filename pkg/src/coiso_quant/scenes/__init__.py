"""Bundled example scenes, shipped as JSON under ``data/``."""

from __future__ import annotations

from pathlib import Path
from typing import List

from ..scene import Scene, load_scene

DATA = Path(__file__).with_name("data")


def bundled_names() -> List[str]:
    return sorted(p.stem for p in DATA.glob("*.json"))


def bundled_path(name: str) -> Path:
    p = DATA / f"{name}.json"
    if not p.exists():
        raise KeyError(f"no bundled scene named {name!r}")
    return p


def load_bundled(name: str) -> Scene:
    return load_scene(bundled_path(name))
