"""Bundled example networks."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .graph import Graph, load_edge_list

BUNDLED = {
    "karate": "karate.edges",
    "lesmis": "lesmis.edges",
}


def path(name: str) -> Path:
    try:
        fname = BUNDLED[name]
    except KeyError:
        raise KeyError(f"no bundled network {name!r}; choose from {sorted(BUNDLED)}") from None
    return Path(str(resources.files("hiercent") / "data" / fname))


def load(name: str) -> Graph:
    return load_edge_list(path(name), name=name)


def karate() -> Graph:
    return load("karate")


def les_miserables() -> Graph:
    return load("lesmis")
