"""Bundled example systems."""

from __future__ import annotations

from importlib import resources

from .demandset import DemandHistory
from .grid import Grid, load_grid


def data_path(name: str):
    return resources.files("ucscreen") / "data" / name


def five_node() -> Grid:
    """Three-unit, five-line ring used for the worked screening example."""
    return load_grid(data_path("five_node.json"))


def two_node() -> Grid:
    return load_grid(data_path("two_node.json"))


def five_node_history() -> DemandHistory:
    """Periods t1..t3 (costs 275, 575, 772.5 under the full UC)."""
    return DemandHistory.from_csv(data_path("five_node_history.csv"))


def five_node_test() -> DemandHistory:
    """Period t4, d4 = 58 MW and d5 = 13.8 MW."""
    return DemandHistory.from_csv(data_path("five_node_test.csv"))


def two_node_history() -> DemandHistory:
    return DemandHistory.from_csv(data_path("two_node_history.csv"))
