"""Net-demand histories and the demand sets used by the bounding problems."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, EmptyHistory, InvalidRange
from .solver import EQ, GE, LE, LinearProgram, solve_lp


@dataclass(frozen=True)
class DemandHistory:
    """Periods x buses matrix of net demand (MW)."""

    values: np.ndarray
    buses: tuple[str, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        if vals.shape[1] != len(self.buses):
            raise DimensionMismatch(f"history has {vals.shape[1]} columns for {len(self.buses)} buses")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "buses", tuple(self.buses))
        labels = tuple(self.labels) or tuple(f"t{k + 1}" for k in range(vals.shape[0]))
        if len(labels) != vals.shape[0]:
            raise DimensionMismatch("one label per period required")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def aggregate(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def subset(self, idx) -> DemandHistory:
        idx = np.asarray(idx, dtype=np.int64)
        return DemandHistory(self.values[idx], self.buses, tuple(self.labels[k] for k in idx))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["period", *self.buses])
            for lab, row in zip(self.labels, self.values):
                w.writerow([lab, *(repr(float(v)) for v in row)])

    @classmethod
    def from_csv(cls, path) -> DemandHistory:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if len(rows) < 2:
            raise EmptyHistory(f"{path}: no periods")
        header = rows[0]
        labelled = header[0].strip().lower() == "period"
        buses = tuple(h.strip() for h in (header[1:] if labelled else header))
        body = [r[1:] if labelled else r for r in rows[1:]]
        labels = tuple(r[0] for r in rows[1:]) if labelled else ()
        return cls(np.array(body, dtype=float), buses, labels)


@dataclass(frozen=True)
class Singleton:
    demand: np.ndarray

    def add_to_model(self, lp: LinearProgram, d_idx: np.ndarray) -> None:
        for k, j in enumerate(d_idx):
            lp.set_bounds(int(j), self.demand[k], self.demand[k])

    def digest_payload(self):
        return ["singleton", np.asarray(self.demand, dtype=float).tolist()]


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
            raise InvalidRange("box lower bound exceeds upper bound")

    def add_to_model(self, lp: LinearProgram, d_idx: np.ndarray) -> None:
        for k, j in enumerate(d_idx):
            lp.set_bounds(int(j), self.lower[k], self.upper[k])

    def digest_payload(self):
        return ["box", np.asarray(self.lower).tolist(), np.asarray(self.upper).tolist()]


@dataclass(frozen=True)
class ConvexHull:
    """``d = sum_t alpha_t h_t`` with ``alpha >= 0`` and ``1 <= sum(alpha) <= kappa``.

    With ``kappa == 1`` the weight sum is pinned to one. Larger ``kappa``
    only relaxes the upper limit on the weight sum.
    """

    history: np.ndarray
    kappa: float = 1.0

    def __post_init__(self):
        if self.kappa < 1.0:
            raise InvalidRange(f"kappa must be >= 1, got {self.kappa}")

    def add_to_model(self, lp: LinearProgram, d_idx: np.ndarray) -> np.ndarray:
        H = np.asarray(self.history, dtype=float)
        T = H.shape[0]
        alpha = lp.add_vars("alpha", T, lb=0.0)
        for k, j in enumerate(d_idx):
            lp.set_bounds(int(j), -np.inf, np.inf)
            nz = np.flatnonzero(H[:, k])
            lp.add_constraint(np.concatenate([[j], alpha[nz]]), np.concatenate([[1.0], -H[nz, k]]),
                              EQ, 0.0, name=f"hull[{k}]")
        ones = np.ones(T)
        if self.kappa == 1.0:
            lp.add_constraint(alpha, ones, EQ, 1.0, name="hull_sum")
        else:
            lp.add_constraint(alpha, ones, GE, 1.0, name="hull_sum_lo")
            lp.add_constraint(alpha, ones, LE, self.kappa, name="hull_sum_hi")
        return alpha

    def digest_payload(self):
        h = hashlib.sha256(np.ascontiguousarray(self.history, dtype=float).tobytes()).hexdigest()
        return ["hull", h, float(self.kappa)]


DemandSet = Union[Singleton, Box, ConvexHull]


def _as_matrix(history) -> np.ndarray:
    H = history.values if isinstance(history, DemandHistory) else np.atleast_2d(np.asarray(history, dtype=float))
    if H.shape[0] == 0:
        raise EmptyHistory("history has no periods")
    return H


def box_from_history(history) -> Box:
    H = _as_matrix(history)
    return Box(H.min(axis=0), H.max(axis=0))


def hull_from_history(history, kappa: float = 1.0) -> ConvexHull:
    return ConvexHull(_as_matrix(history).copy(), float(kappa))


def membership(dset: DemandSet, d, tol: float = 1e-7) -> bool:
    """Whether ``d`` belongs to the set (hull via a feasibility LP)."""
    d = np.asarray(d, dtype=float)
    if isinstance(dset, Singleton):
        _check_len(d, len(dset.demand))
        return bool(np.allclose(d, dset.demand, rtol=0.0, atol=tol))
    if isinstance(dset, Box):
        _check_len(d, len(dset.lower))
        return bool(np.all(d >= dset.lower - tol) and np.all(d <= dset.upper + tol))
    H = np.asarray(dset.history)
    _check_len(d, H.shape[1])
    lp = LinearProgram(name="hull_membership")
    d_idx = lp.add_vars("d", H.shape[1], lb=d, ub=d)
    dset.add_to_model(lp, d_idx)
    for k, j in enumerate(d_idx):
        lp.set_bounds(int(j), d[k], d[k])
    return solve_lp(lp).optimal


def aggregate_range(dset: DemandSet) -> tuple[float, float]:
    """Smallest and largest total demand over the set."""
    if isinstance(dset, Singleton):
        tot = float(np.sum(dset.demand))
        return tot, tot
    if isinstance(dset, Box):
        return float(np.sum(dset.lower)), float(np.sum(dset.upper))
    agg = np.asarray(dset.history, dtype=float).sum(axis=1)
    lo, hi = float(agg.min()), float(agg.max())
    return (lo if lo >= 0 else dset.kappa * lo), (hi * dset.kappa if hi >= 0 else hi)


def _check_len(d: np.ndarray, n: int) -> None:
    if d.shape != (n,):
        raise DimensionMismatch(f"demand vector has shape {d.shape}, expected ({n},)")


def sample(dset: DemandSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` points from the set (uniform for boxes, Dirichlet weights for hulls)."""
    if isinstance(dset, Singleton):
        return np.tile(dset.demand, (n, 1))
    if isinstance(dset, Box):
        return rng.uniform(dset.lower, dset.upper, size=(n, len(dset.lower)))
    H = np.asarray(dset.history)
    w = rng.dirichlet(np.full(H.shape[0], 0.5), size=n)
    if dset.kappa > 1.0:
        w *= rng.uniform(1.0, dset.kappa, size=(n, 1))
    return w @ H


def generate_history(xi: Sequence[float], n_periods: int, load_range=(50.0, 70.0),
                     width: float = 0.05, seed: int | None = 0,
                     buses: Sequence[str] | None = None) -> DemandHistory:
    """Synthetic net demand: ``L ~ U(load_range)``, then ``d_n ~ U((1-w) L xi_n, (1+w) L xi_n)``.

    Allocation factors are normalized to sum to one.
    """
    xi = np.asarray(xi, dtype=float)
    lo_L, hi_L = map(float, load_range)
    if np.any(xi < 0) or xi.sum() <= 0:
        raise InvalidRange("allocation factors must be nonnegative with a positive sum")
    if lo_L > hi_L or not 0.0 <= width < 1.0 or n_periods < 1:
        raise InvalidRange("bad load range, width or period count")
    xi = xi / xi.sum()
    rng = np.random.default_rng(seed)
    L = rng.uniform(lo_L, hi_L, size=n_periods)
    base = L[:, None] * xi[None, :]
    if width == 0.0:
        vals = base
    else:
        vals = rng.uniform((1.0 - width) * base, (1.0 + width) * base)
    buses = tuple(buses) if buses is not None else tuple(f"n{k + 1}" for k in range(xi.size))
    return DemandHistory(vals, buses)


def read_allocation(path) -> dict[str, float]:
    """One-column CSV keyed by bus id: ``bus,xi`` header then rows."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    body = rows[1:] if rows and not _is_number(rows[0][1]) else rows
    return {r[0].strip(): float(r[1]) for r in body}


def write_allocation(xi: dict[str, float], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bus", "xi"])
        for bus, v in xi.items():
            w.writerow([bus, repr(float(v))])


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_history(path) -> DemandHistory:
    return DemandHistory.from_csv(Path(path))
