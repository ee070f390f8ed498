"""Single-period DC unit commitment with PTDF line limits."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InfeasibleProblem
from .grid import Grid, PtdfMatrix, line_flows
from .solver import GE, LE, EQ, LinearProgram, SolveOutcome, Status, solve_lp, solve_milp

COST_RTOL = 1e-6


@dataclass(frozen=True)
class ConstraintMask:
    """Which side of each line limit is kept in the model."""

    keep_lower: np.ndarray
    keep_upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.keep_lower, dtype=bool)
        up = np.asarray(self.keep_upper, dtype=bool)
        if lo.shape != up.shape or lo.ndim != 1:
            raise DimensionMismatch("mask sides must be equal-length vectors")
        object.__setattr__(self, "keep_lower", lo)
        object.__setattr__(self, "keep_upper", up)

    @classmethod
    def full(cls, n_lines: int) -> ConstraintMask:
        return cls(np.ones(n_lines, bool), np.ones(n_lines, bool))

    @classmethod
    def empty(cls, n_lines: int) -> ConstraintMask:
        return cls(np.zeros(n_lines, bool), np.zeros(n_lines, bool))

    @property
    def n_lines(self) -> int:
        return self.keep_lower.size

    @property
    def n_kept(self) -> int:
        return int(self.keep_lower.sum() + self.keep_upper.sum())


@dataclass
class UcSolution:
    commitment: np.ndarray
    dispatch: np.ndarray
    injections: np.ndarray
    flows: np.ndarray
    cost: float

    def to_dict(self) -> dict:
        return {
            "commitment": [int(v) for v in self.commitment],
            "dispatch": [float(v) for v in self.dispatch],
            "injections": [float(v) for v in self.injections],
            "flows": [float(v) for v in self.flows],
            "cost": float(self.cost),
        }

    @classmethod
    def from_dict(cls, data: dict) -> UcSolution:
        return cls(np.array(data["commitment"], dtype=int), np.array(data["dispatch"], dtype=float),
                   np.array(data["injections"], dtype=float), np.array(data["flows"], dtype=float),
                   float(data["cost"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check(grid: Grid, ptdf: PtdfMatrix, d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.shape != (grid.n_buses,):
        raise DimensionMismatch(f"demand has shape {d.shape}, grid has {grid.n_buses} buses")
    if ptdf.values.shape != (grid.n_lines, grid.n_buses):
        raise DimensionMismatch("PTDF shape does not match the grid")
    return d


def build_full_uc(grid: Grid, ptdf: PtdfMatrix, d, mask: ConstraintMask | None = None,
                  commitment=None) -> LinearProgram:
    """UC model: binaries ``u``, dispatch ``p``, balance, unit limits, PTDF line limits.

    Line limits are written on dispatch with demand moved to the right-hand
    side: ``sum_g a_{l,bus(g)} p_g - a_l . d <= cap_l``. With ``commitment``
    given the binaries are pinned by their bounds.
    """
    d = _check(grid, ptdf, d)
    mask = mask or ConstraintMask.full(grid.n_lines)
    if mask.n_lines != grid.n_lines:
        raise DimensionMismatch("mask does not cover every line")
    G = grid.n_generators
    lp = LinearProgram(name=f"uc:{grid.name}")
    gids = [g.id for g in grid.generators]
    if commitment is None:
        u = lp.add_vars("u", G, lb=0.0, ub=1.0, binary=True, labels=gids)
    else:
        cm = np.asarray(commitment, dtype=float)
        if cm.shape != (G,):
            raise DimensionMismatch("commitment length must equal the generator count")
        u = lp.add_vars("u", G, lb=cm, ub=cm, labels=gids)
    p = lp.add_vars("p", G, lb=0.0, ub=grid.p_max, obj=grid.costs, labels=gids)
    lp.add_constraint(p, np.ones(G), EQ, float(d.sum()), name="balance")
    for k, g in enumerate(grid.generators):
        lp.add_constraint([p[k], u[k]], [1.0, -g.p_max], LE, 0.0, name=f"pmax[{g.id}]")
        lp.add_constraint([p[k], u[k]], [1.0, -g.p_min], GE, 0.0, name=f"pmin[{g.id}]")
    shift = ptdf.values @ d
    gen_sens = ptdf.values[:, grid.gen_bus]
    for k, ln in enumerate(grid.lines):
        if mask.keep_upper[k]:
            lp.add_constraint(p, gen_sens[k], LE, ln.capacity + shift[k], name=f"fmax[{ln.id}]")
        if mask.keep_lower[k]:
            lp.add_constraint(p, gen_sens[k], GE, -ln.capacity + shift[k], name=f"fmin[{ln.id}]")
    return lp


def _solution(grid: Grid, ptdf: PtdfMatrix, d: np.ndarray, out: SolveOutcome) -> UcSolution:
    G = grid.n_generators
    u = np.round(out.x[:G]).astype(int)
    p = out.x[G:2 * G].copy()
    q = grid.gen_incidence @ p - d
    return UcSolution(u, p, q, line_flows(ptdf, q), float(grid.costs @ p))


def solve_uc(grid: Grid, ptdf: PtdfMatrix, d, mask: ConstraintMask | None = None,
             gap: float = 1e-6, **solver_kw) -> UcSolution:
    """Optimal commitment and dispatch of the (possibly masked) model.

    Raises :class:`InfeasibleProblem` when no commitment is feasible.
    """
    d = _check(grid, ptdf, d)
    out = solve_milp(build_full_uc(grid, ptdf, d, mask), gap=gap, **solver_kw)
    if out.status is not Status.OPTIMAL:
        raise InfeasibleProblem(f"UC is {out.status.value}")
    return _solution(grid, ptdf, d, out)


def fix_and_resolve(grid: Grid, ptdf: PtdfMatrix, d, commitment, **solver_kw) -> SolveOutcome:
    """Dispatch LP of the full model with the commitment pinned."""
    return solve_lp(build_full_uc(grid, ptdf, d, None, commitment), **solver_kw)


def verdict(full_cost: float, resolved: SolveOutcome, rtol: float = COST_RTOL) -> str:
    """``infeasible``, ``suboptimal`` or ``exact`` for a fix-and-resolve outcome."""
    if resolved.status is not Status.OPTIMAL:
        return "infeasible"
    if resolved.objective - full_cost > rtol * max(1.0, abs(full_cost)):
        return "suboptimal"
    return "exact"


def solution_violation(grid: Grid, sol: UcSolution, d, mask: ConstraintMask | None = None) -> float:
    """Largest violation of the solution's own invariants (unit limits, balance, kept lines)."""
    d = np.asarray(d, dtype=float)
    mask = mask or ConstraintMask.full(grid.n_lines)
    u, p = sol.commitment, sol.dispatch
    v = [np.max(np.maximum(u * grid.p_min - p, 0.0), initial=0.0),
         np.max(np.maximum(p - u * grid.p_max, 0.0), initial=0.0),
         abs(sol.injections.sum()),
         np.max(np.abs(sol.injections - (grid.gen_incidence @ p - d)), initial=0.0),
         abs(sol.cost - grid.costs @ p)]
    cap = grid.capacities
    v.append(np.max(np.where(mask.keep_upper, np.maximum(sol.flows - cap, 0.0), 0.0), initial=0.0))
    v.append(np.max(np.where(mask.keep_lower, np.maximum(-cap - sol.flows, 0.0), 0.0), initial=0.0))
    return float(max(v))
