"""Network and fleet data, PTDF construction and DC line flows."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, DisconnectedGraph, SingularSusceptanceMatrix


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    susceptance: float
    capacity: float

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise ValueError(f"line {self.id}: from_bus equals to_bus")
        if not self.susceptance > 0:
            raise ValueError(f"line {self.id}: susceptance must be positive")
        if not self.capacity > 0:
            raise ValueError(f"line {self.id}: capacity must be positive")


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    marginal_cost: float
    p_min: float
    p_max: float

    def __post_init__(self):
        if not (0 <= self.p_min <= self.p_max):
            raise ValueError(f"generator {self.id}: need 0 <= p_min <= p_max")
        if self.marginal_cost < 0:
            raise ValueError(f"generator {self.id}: negative marginal cost")


@dataclass(frozen=True)
class Grid:
    """Buses, oriented lines, generators and the angle reference bus.

    Line orientation (``from_bus`` to ``to_bus``) fixes the sign of flows and
    of the corresponding PTDF row.
    """

    buses: tuple[str, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    slack_bus: str
    name: str = field(default="grid", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(str(b) for b in self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "generators", tuple(self.generators))
        if len(set(self.buses)) != len(self.buses):
            raise ValueError("duplicate bus ids")
        if self.slack_bus not in self.buses:
            raise ValueError(f"slack bus {self.slack_bus!r} is not a bus")
        known = set(self.buses)
        for ln in self.lines:
            if ln.from_bus not in known or ln.to_bus not in known:
                raise ValueError(f"line {ln.id} references an unknown bus")
        for g in self.generators:
            if g.bus not in known:
                raise ValueError(f"generator {g.id} references an unknown bus")
        if len({ln.id for ln in self.lines}) != len(self.lines):
            raise ValueError("duplicate line ids")

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    @cached_property
    def bus_index(self) -> dict[str, int]:
        return {b: k for k, b in enumerate(self.buses)}

    @cached_property
    def line_ids(self) -> tuple[str, ...]:
        return tuple(ln.id for ln in self.lines)

    @cached_property
    def capacities(self) -> np.ndarray:
        return np.array([ln.capacity for ln in self.lines], dtype=float)

    @cached_property
    def costs(self) -> np.ndarray:
        return np.array([g.marginal_cost for g in self.generators], dtype=float)

    @cached_property
    def p_min(self) -> np.ndarray:
        return np.array([g.p_min for g in self.generators], dtype=float)

    @cached_property
    def p_max(self) -> np.ndarray:
        return np.array([g.p_max for g in self.generators], dtype=float)

    @cached_property
    def gen_bus(self) -> np.ndarray:
        """Bus position of each generator."""
        return np.array([self.bus_index[g.bus] for g in self.generators], dtype=np.int64)

    @cached_property
    def gen_incidence(self) -> np.ndarray:
        """|N| x |G| matrix mapping dispatch to nodal generation."""
        M = np.zeros((self.n_buses, self.n_generators))
        M[self.gen_bus, np.arange(self.n_generators)] = 1.0
        return M

    @cached_property
    def incidence(self) -> np.ndarray:
        """|L| x |N| branch-bus incidence, +1 at from_bus and -1 at to_bus."""
        C = np.zeros((self.n_lines, self.n_buses))
        for k, ln in enumerate(self.lines):
            C[k, self.bus_index[ln.from_bus]] = 1.0
            C[k, self.bus_index[ln.to_bus]] = -1.0
        return C

    def is_connected(self) -> bool:
        if self.n_buses <= 1:
            return True
        adj: dict[str, list[str]] = {b: [] for b in self.buses}
        for ln in self.lines:
            adj[ln.from_bus].append(ln.to_bus)
            adj[ln.to_bus].append(ln.from_bus)
        seen = {self.buses[0]}
        stack = [self.buses[0]]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.n_buses

    def without_line(self, line_id: str) -> Grid:
        if line_id not in self.line_ids:
            raise KeyError(line_id)
        return replace(self, lines=tuple(ln for ln in self.lines if ln.id != line_id),
                       name=f"{self.name}-{line_id}")

    def with_slack(self, bus: str) -> Grid:
        return replace(self, slack_bus=bus)

    def scaled_capacities(self, factor: float) -> Grid:
        return replace(self, lines=tuple(replace(ln, capacity=ln.capacity * factor) for ln in self.lines))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "buses": list(self.buses),
            "slack": self.slack_bus,
            "lines": [{"id": ln.id, "from": ln.from_bus, "to": ln.to_bus,
                       "susceptance": ln.susceptance, "capacity": ln.capacity} for ln in self.lines],
            "generators": [{"id": g.id, "bus": g.bus, "cost": g.marginal_cost,
                            "pmin": g.p_min, "pmax": g.p_max} for g in self.generators],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Grid:
        lines = tuple(Line(str(r["id"]), str(r["from"]), str(r["to"]),
                           float(r["susceptance"]), float(r["capacity"])) for r in data["lines"])
        gens = tuple(Generator(str(r["id"]), str(r["bus"]), float(r["cost"]),
                               float(r.get("pmin", 0.0)), float(r["pmax"])) for r in data["generators"])
        return cls(tuple(str(b) for b in data["buses"]), lines, gens, str(data["slack"]),
                   name=str(data.get("name", "grid")))


def load_grid(path) -> Grid:
    with open(path) as fh:
        return Grid.from_dict(json.load(fh))


def save_grid(grid: Grid, path) -> None:
    Path(path).write_text(json.dumps(grid.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class PtdfMatrix:
    """|L| x |N| sensitivities of line flows to nodal injections."""

    values: np.ndarray
    slack_bus: str
    buses: tuple[str, ...]
    line_ids: tuple[str, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def row(self, line_id: str) -> np.ndarray:
        return self.values[self.line_ids.index(line_id)]


def build_ptdf(grid: Grid, slack_bus: str | None = None) -> PtdfMatrix:
    """PTDF from the reduced bus susceptance matrix.

    ``a = diag(b) C[:, r] inv(B_rr)`` where ``r`` drops the slack bus; the
    slack column is zero.
    """
    slack = grid.slack_bus if slack_bus is None else slack_bus
    if slack not in grid.bus_index:
        raise ValueError(f"unknown slack bus {slack!r}")
    if not grid.is_connected():
        raise DisconnectedGraph(f"{grid.name}: network has more than one island")
    C = grid.incidence
    b = np.array([ln.susceptance for ln in grid.lines], dtype=float)
    Bbus = C.T @ (b[:, None] * C)
    keep = np.arange(grid.n_buses) != grid.bus_index[slack]
    Bred = Bbus[np.ix_(keep, keep)]
    if Bred.size and np.linalg.cond(Bred) > 1e12:
        raise SingularSusceptanceMatrix(f"{grid.name}: reduced susceptance matrix is singular")
    A = np.zeros((grid.n_lines, grid.n_buses))
    if Bred.size:
        # solve B_rr^T X^T = (diag(b) C_r)^T, B is symmetric
        A[:, keep] = np.linalg.solve(Bred, (b[:, None] * C[:, keep]).T).T
    A[np.abs(A) < 1e-14] = 0.0
    return PtdfMatrix(A, slack, grid.buses, grid.line_ids)


def line_flows(ptdf: PtdfMatrix, q) -> np.ndarray:
    """Flow on every line for nodal injections ``q`` (MW)."""
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != ptdf.values.shape[1]:
        raise DimensionMismatch(f"injection length {q.shape[-1]} != {ptdf.values.shape[1]} buses")
    return q @ ptdf.values.T
