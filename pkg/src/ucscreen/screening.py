"""Per-line bounding problems and removability verdicts.

For each line and each side the bounding model maximizes (upper) or
minimizes (lower) the line flow over a relaxation of the UC feasible set:
commitment relaxed to ``[0, 1]``, demand free within a demand set, other
lines' limits optionally enforced, and optionally a cost budget that
depends on aggregate demand.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .costbound import CostBoundModel
from .demandset import Box, ConvexHull, DemandSet, Singleton, aggregate_range
from .errors import ConfigMismatch, LineSetMismatch
from .grid import Grid, PtdfMatrix
from .solver import EQ, GE, LE, LinearProgram, Status, solve
from .uc import ConstraintMask

logger = logging.getLogger(__name__)

REMOVAL_TOL = 1e-6
SIDES = ("lower", "upper")
METHODS = ("bn", "ub", "cc", "ubcc")


@dataclass(frozen=True)
class MethodConfig:
    demand_set: DemandSet
    cost_bound: CostBoundModel | None = None
    enforce_other_lines: bool = True

    @property
    def method(self) -> str:
        hull = isinstance(self.demand_set, ConvexHull)
        if self.cost_bound is None:
            return "cc" if hull else "bn"
        return "ubcc" if hull else "ub"

    def digest(self) -> str:
        payload = {
            "demand_set": self.demand_set.digest_payload(),
            "cost_bound": self.cost_bound.to_dict() if self.cost_bound else None,
            "enforce_other_lines": self.enforce_other_lines,
        }
        blob = json.dumps(payload, sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ScreeningBound:
    line_id: str
    side: str
    extreme_flow: float
    capacity: float
    removable: bool
    status: str

    def to_dict(self) -> dict:
        return {"line": self.line_id, "side": self.side, "extreme_flow": _num(self.extreme_flow),
                "capacity": self.capacity, "removable": self.removable, "status": self.status}

    @classmethod
    def from_dict(cls, r: dict) -> ScreeningBound:
        ext = r["extreme_flow"]
        return cls(r["line"], r["side"], float("nan") if ext is None else float(ext),
                   float(r["capacity"]), bool(r["removable"]), r["status"])


def _num(v: float):
    return None if math.isnan(v) else (v if math.isfinite(v) else ("inf" if v > 0 else "-inf"))


@dataclass
class ScreeningResult:
    bounds: dict[tuple[str, str], ScreeningBound]
    method: str
    digest: str = ""
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    @property
    def line_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for lid, _ in self.bounds:
            seen.setdefault(lid, None)
        return list(seen)

    @property
    def removable_set(self) -> set[tuple[str, str]]:
        return {k for k, b in self.bounds.items() if b.removable}

    @property
    def n_sides(self) -> int:
        return len(self.bounds)

    @property
    def n_removable(self) -> int:
        return sum(b.removable for b in self.bounds.values())

    @property
    def n_retained(self) -> int:
        return self.n_sides - self.n_removable

    @property
    def removable_fraction(self) -> float:
        return self.n_removable / self.n_sides if self.n_sides else 0.0

    def retained_per_line(self) -> dict[str, int]:
        out = {lid: 0 for lid in self.line_ids}
        for (lid, _), b in self.bounds.items():
            out[lid] += not b.removable
        return out

    def to_mask(self, grid: Grid) -> ConstraintMask:
        lo = np.array([not self.bounds[(ln.id, "lower")].removable for ln in grid.lines])
        up = np.array([not self.bounds[(ln.id, "upper")].removable for ln in grid.lines])
        return ConstraintMask(lo, up)

    def to_dict(self) -> dict:
        return {"method": self.method, "config_digest": self.digest, "created": self.created,
                "retained": self.n_retained, "sides": [b.to_dict() for b in self.bounds.values()]}

    @classmethod
    def from_dict(cls, data: dict) -> ScreeningResult:
        bounds = {}
        for r in data["sides"]:
            b = ScreeningBound.from_dict(r)
            bounds[(b.line_id, b.side)] = b
        return cls(bounds, data["method"], data.get("config_digest", ""), data.get("created", ""))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> ScreeningResult:
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_bounding_model(grid: Grid, ptdf: PtdfMatrix, line: str | int, side: str,
                         config: MethodConfig) -> LinearProgram:
    """Bounding problem for one side of one line.

    Variables: relaxed commitment ``u``, dispatch ``p``, demand ``d`` and
    whatever the demand set adds (hull weights). With a cost budget, the
    aggregate demand ``D``, segment selectors ``y`` and ``z = y * D`` enter
    through ``z_s <= upper_s y_s``, ``z_s >= lower_s y_s``, ``sum z = D``,
    ``sum y = 1``. The first and last segments are stretched to cover the
    demand set's full range of totals. A single-segment budget pins ``y``
    and stays an LP.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    k = grid.line_ids.index(line) if isinstance(line, str) else int(line)
    N, G = grid.n_buses, grid.n_generators
    if isinstance(config.demand_set, Singleton) and len(config.demand_set.demand) != N:
        raise ConfigMismatch("singleton demand length does not match bus count")
    if isinstance(config.demand_set, Box) and len(config.demand_set.lower) != N:
        raise ConfigMismatch("box dimension does not match bus count")
    if isinstance(config.demand_set, ConvexHull) and np.asarray(config.demand_set.history).shape[1] != N:
        raise ConfigMismatch("hull history width does not match bus count")

    A = ptdf.values
    lp = LinearProgram(sense="max" if side == "upper" else "min",
                       name=f"bound:{config.method}:{grid.lines[k].id}:{side}")
    gids = [g.id for g in grid.generators]
    u = lp.add_vars("u", G, lb=0.0, ub=1.0, labels=gids)
    p = lp.add_vars("p", G, lb=0.0, ub=grid.p_max, obj=A[k, grid.gen_bus], labels=gids)
    d = lp.add_vars("d", N, lb=-np.inf, ub=np.inf, obj=-A[k], labels=grid.buses)
    config.demand_set.add_to_model(lp, d)

    lp.add_constraint(np.concatenate([p, d]), np.concatenate([np.ones(G), -np.ones(N)]), EQ, 0.0,
                      name="balance")
    for j, g in enumerate(grid.generators):
        lp.add_constraint([p[j], u[j]], [1.0, -g.p_max], LE, 0.0, name=f"pmax[{g.id}]")
        lp.add_constraint([p[j], u[j]], [1.0, -g.p_min], GE, 0.0, name=f"pmin[{g.id}]")
    if config.enforce_other_lines:
        cols = np.concatenate([p, d])
        for j, ln in enumerate(grid.lines):
            if j == k:
                continue
            row = np.concatenate([A[j, grid.gen_bus], -A[j]])
            nz = row != 0.0
            lp.add_constraint(cols[nz], row[nz], LE, ln.capacity, name=f"fmax[{ln.id}]")
            lp.add_constraint(cols[nz], row[nz], GE, -ln.capacity, name=f"fmin[{ln.id}]")

    cb = config.cost_bound
    if cb is not None:
        S = len(cb)
        D = lp.add_var("D", -np.inf, np.inf)
        lp.add_constraint(np.concatenate([[D], d]), np.concatenate([[1.0], -np.ones(N)]), EQ, 0.0,
                          name="aggregate")
        if S == 1:
            y = lp.add_vars("y", 1, lb=1.0, ub=1.0)
        else:
            y = lp.add_vars("y", S, lb=0.0, ub=1.0, binary=True)
        z = lp.add_vars("z", S, lb=-np.inf, ub=np.inf)
        # the outer segments reach to the ends of the demand set's total range;
        # cutting D at the fitted range would shrink the set beyond the data
        d_lo, d_hi = aggregate_range(config.demand_set)
        for s, seg in enumerate(cb.segments):
            lo = min(seg.lower, d_lo) if s == 0 else seg.lower
            hi = max(seg.upper, d_hi) if s == S - 1 else seg.upper
            lp.add_constraint([z[s], y[s]], [1.0, -hi], LE, 0.0, name=f"zmax[{s}]")
            lp.add_constraint([z[s], y[s]], [1.0, -lo], GE, 0.0, name=f"zmin[{s}]")
        lp.add_constraint(np.concatenate([z, [D]]), np.concatenate([np.ones(S), [-1.0]]), EQ, 0.0,
                          name="segment_demand")
        lp.add_constraint(y, np.ones(S), EQ, 1.0, name="one_segment")
        rho = np.array([s.intercept for s in cb.segments])
        nu = np.array([s.slope for s in cb.segments])
        lp.add_constraint(np.concatenate([p, y, z]), np.concatenate([grid.costs, -rho, -nu]), LE, 0.0,
                          name="cost_budget")
    return lp


def screen_line(grid: Grid, ptdf: PtdfMatrix, line: str | int, side: str, config: MethodConfig,
                tol: float = REMOVAL_TOL, **solver_kw) -> ScreeningBound:
    """Solve one bounding problem and decide removability.

    A side is removable only when its extreme flow is strictly inside the
    limit by ``tol``; ties at the limit are retained. Infeasible or unbounded
    bounding problems retain the side.
    """
    k = grid.line_ids.index(line) if isinstance(line, str) else int(line)
    ln = grid.lines[k]
    out = solve(build_bounding_model(grid, ptdf, k, side, config), **solver_kw)
    if out.status is Status.OPTIMAL:
        ext = out.objective
        removable = ext <= ln.capacity - tol if side == "upper" else ext >= -ln.capacity + tol
    elif out.status is Status.UNBOUNDED:
        ext, removable = (math.inf if side == "upper" else -math.inf), False
    else:
        ext, removable = math.nan, False
    if out.status is not Status.OPTIMAL:
        logger.warning("bounding problem %s/%s is %s; side retained", ln.id, side, out.status.value)
    return ScreeningBound(ln.id, side, float(ext), ln.capacity, bool(removable), out.status.value)


def _task(args):
    grid, ptdf, k, side, config, tol, solver_kw = args
    return screen_line(grid, ptdf, k, side, config, tol, **solver_kw)


def screen_all(grid: Grid, ptdf: PtdfMatrix, config: MethodConfig, tol: float = REMOVAL_TOL,
               workers: int = 1, **solver_kw) -> ScreeningResult:
    """Screen both sides of every line; ``workers > 1`` uses a process pool."""
    tasks = [(grid, ptdf, k, side, config, tol, solver_kw)
             for k in range(grid.n_lines) for side in SIDES]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_task(t) for t in tasks]
    bounds = {(b.line_id, b.side): b for b in results}
    return ScreeningResult(bounds, config.method, config.digest())


def intersect(results: list[ScreeningResult]) -> ScreeningResult:
    """A side is removable only if every input marks it removable.

    Extreme flows are combined to the loosest value (max for upper sides,
    min for lower sides).
    """
    if not results:
        raise ValueError("nothing to intersect")
    keys = list(results[0].bounds)
    for r in results[1:]:
        if set(r.bounds) != set(keys):
            raise LineSetMismatch("screening results cover different line sides")
    merged = {}
    for key in keys:
        bs = [r.bounds[key] for r in results]
        flows = [b.extreme_flow for b in bs if not math.isnan(b.extreme_flow)]
        if flows:
            ext = max(flows) if key[1] == "upper" else min(flows)
        else:
            ext = math.nan
        statuses = sorted({b.status for b in bs})
        merged[key] = ScreeningBound(key[0], key[1], ext, bs[0].capacity,
                                     all(b.removable for b in bs), "+".join(statuses))
    methods = sorted({r.method for r in results})
    digest = hashlib.sha256("|".join(r.digest for r in results).encode()).hexdigest()[:16]
    return ScreeningResult(merged, "&".join(methods), digest)
