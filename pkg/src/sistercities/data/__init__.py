"""Shipped configuration and snapshot data."""

from importlib import resources
from pathlib import Path


def snapshot_path(name: str = "edges.csv") -> Path:
    """Path of a file in the shipped synthetic snapshot."""
    p = resources.files("sistercities.data").joinpath("snapshot", name)
    if not p.is_file():
        raise FileNotFoundError(f"no snapshot file {name!r}")
    return Path(str(p))
