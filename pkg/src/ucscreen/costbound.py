"""Upper-envelope piecewise-linear cost budget as a function of aggregate demand.

Each segment ``s`` covers ``[lower_s, upper_s]`` and carries a line
``intercept_s + slope_s * D`` that lies on or above every training cost whose
demand falls in the segment, with the smallest total slack. That is quantile
regression at tau = 1, which reduces to a two-variable LP per segment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSegment, OutOfFittedRange, TooFewPoints
from .solver import GE, LinearProgram, solve_lp


@dataclass(frozen=True)
class Segment:
    lower: float
    upper: float
    intercept: float
    slope: float

    def __call__(self, D):
        return self.intercept + self.slope * np.asarray(D, dtype=float)


@dataclass(frozen=True)
class CostBoundModel:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("cost bound needs at least one segment")
        for a, b in zip(segs, segs[1:]):
            if not np.isclose(a.upper, b.lower, rtol=0, atol=1e-9 * max(1.0, abs(a.upper))):
                raise ValueError("segments must be contiguous")
        object.__setattr__(self, "segments", segs)

    @property
    def lower(self) -> float:
        return self.segments[0].lower

    @property
    def upper(self) -> float:
        return self.segments[-1].upper

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([self.segments[0].lower] + [s.upper for s in self.segments])

    def __len__(self) -> int:
        return len(self.segments)

    def segment_index(self, D: float) -> int:
        tol = 1e-9 * max(1.0, abs(self.lower), abs(self.upper))
        if D < self.lower - tol or D > self.upper + tol:
            raise OutOfFittedRange(f"D={D} outside fitted range [{self.lower}, {self.upper}]")
        for k, s in enumerate(self.segments):
            if D <= s.upper + tol:
                return k
        return len(self.segments) - 1

    def __call__(self, D: float) -> float:
        return float(self.segments[self.segment_index(float(D))](D))

    def extended(self, D: float) -> float:
        """Budget with the outer segments continued past the fitted range.

        This is the function the screening models enforce.
        """
        D = float(D)
        if D < self.lower:
            return float(self.segments[0](D))
        if D > self.upper:
            return float(self.segments[-1](D))
        return self(D)

    def widened(self, margin: float) -> CostBoundModel:
        """Stretch the outer segment ends by ``margin`` (same lines)."""
        if margin == 0:
            return self
        segs = list(self.segments)
        segs[0] = Segment(segs[0].lower - margin, segs[0].upper, segs[0].intercept, segs[0].slope)
        last = segs[-1]
        segs[-1] = Segment(last.lower, last.upper + margin, last.intercept, last.slope)
        return CostBoundModel(tuple(segs))

    @classmethod
    def constant(cls, value: float, lower: float, upper: float) -> CostBoundModel:
        return cls((Segment(float(lower), float(upper), float(value), 0.0),))

    def to_dict(self) -> dict:
        return {"segments": [{"lower": s.lower, "upper": s.upper, "intercept": s.intercept,
                              "slope": s.slope} for s in self.segments]}

    @classmethod
    def from_dict(cls, data: dict) -> CostBoundModel:
        return cls(tuple(Segment(float(s["lower"]), float(s["upper"]), float(s["intercept"]),
                                 float(s["slope"])) for s in data["segments"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> CostBoundModel:
        return cls.from_dict(json.loads(Path(path).read_text()))


def evaluate_bound(model: CostBoundModel, D: float) -> float:
    """Budget at aggregate demand ``D``; a shared breakpoint belongs to the left segment."""
    return model(D)


def _sorted(D, C):
    D = np.asarray(D, dtype=float).ravel()
    C = np.asarray(C, dtype=float).ravel()
    if D.shape != C.shape:
        raise ValueError("D and C differ in length")
    order = np.argsort(D, kind="stable")
    return D[order], C[order]


def find_breakpoints(D, C, n_segments: int, max_candidates: int = 200,
                     min_points: int = 2) -> np.ndarray:
    """Breakpoints ``[D_min, b_1, ..., D_max]`` of the best least-squares segmented fit.

    Segments are fitted independently (no continuity). Interior breakpoints
    are midpoints between consecutive distinct demands, thinned to at most
    ``max_candidates`` evenly spaced choices, and chosen by dynamic
    programming over the summed squared error.
    """
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    D, C = _sorted(D, C)
    if D.size < min_points * n_segments:
        raise TooFewPoints(f"{D.size} points cannot fill {n_segments} segments of {min_points}")
    if n_segments == 1:
        return np.array([D[0], D[-1]])

    cuts = np.flatnonzero(np.diff(D) > 0) + 1  # split positions between distinct values
    if cuts.size > max_candidates:
        cuts = cuts[np.unique(np.linspace(0, cuts.size - 1, max_candidates).round().astype(int))]
    pos = np.concatenate([[0], cuts, [D.size]])
    K = pos.size

    # prefix sums give O(1) least-squares error for any index range
    s1 = np.concatenate([[0.0], np.cumsum(D)])
    s2 = np.concatenate([[0.0], np.cumsum(D * D)])
    t1 = np.concatenate([[0.0], np.cumsum(C)])
    t2 = np.concatenate([[0.0], np.cumsum(C * C)])
    st = np.concatenate([[0.0], np.cumsum(D * C)])

    def sse(i: int, j: int) -> float:
        n = j - i
        if n < min_points or D[j - 1] <= D[i]:
            return np.inf
        sx, sxx = s1[j] - s1[i], s2[j] - s2[i]
        sy, syy, sxy = t1[j] - t1[i], t2[j] - t2[i], st[j] - st[i]
        vxx = sxx - sx * sx / n
        vxy = sxy - sx * sy / n
        vyy = syy - sy * sy / n
        if vxx <= 0.0:  # distinct demands that cancel in floating point
            return max(vyy, 0.0)
        return max(vyy - vxy * vxy / vxx, 0.0)

    cost = np.full((n_segments + 1, K), np.inf)
    back = np.zeros((n_segments + 1, K), dtype=np.int64)
    cost[0, 0] = 0.0
    for s in range(1, n_segments + 1):
        for b in range(1, K):
            best, arg = np.inf, 0
            for a in range(b):
                if not np.isfinite(cost[s - 1, a]):
                    continue
                v = cost[s - 1, a] + sse(pos[a], pos[b])
                if v < best:
                    best, arg = v, a
            cost[s, b], back[s, b] = best, arg
    if not np.isfinite(cost[n_segments, K - 1]):
        raise TooFewPoints(f"cannot place {n_segments} segments with >= {min_points} distinct points each")
    chosen = []
    b = K - 1
    for s in range(n_segments, 0, -1):
        b = back[s, b]
        chosen.append(b)
    interior = [0.5 * (D[pos[a] - 1] + D[pos[a]]) for a in sorted(chosen)[1:]]
    return np.array([D[0], *interior, D[-1]])


def _fit_segment(D: np.ndarray, C: np.ndarray) -> tuple[float, float]:
    if D.size == 0:
        raise DegenerateSegment("segment contains no points")
    if D.size == 1 or np.ptp(D) == 0.0:
        if D.size >= 2:
            raise DegenerateSegment("all demands in the segment are identical")
        return float(C[0]), 0.0
    # centered and scaled for conditioning
    mu, span = D.mean(), np.ptp(D)
    cs = max(1.0, np.abs(C).max())
    x = (D - mu) / span
    y = C / cs
    lp = LinearProgram(name="upper_envelope")
    a = lp.add_var("intercept", -np.inf, np.inf, obj=float(x.size))
    b = lp.add_var("slope", -np.inf, np.inf, obj=float(x.sum()))
    for xi, yi in zip(x, y):
        lp.add_constraint([a, b], [1.0, xi], GE, yi)
    out = solve_lp(lp)
    if not out.optimal:
        raise DegenerateSegment(f"envelope LP ended {out.status.value}")
    a_s, b_s = out.x
    slope = b_s * cs / span
    intercept = a_s * cs - slope * mu
    # lift by any round-off shortfall so the envelope holds exactly
    short = np.max(C - (intercept + slope * D))
    if short > 0:
        intercept += short
    return float(intercept), float(slope)


def fit_quantile_pwl(D, C, breakpoints) -> CostBoundModel:
    """Fit each segment's upper envelope independently.

    A point sitting exactly on an interior breakpoint takes part in both
    neighbouring fits, so the bound is valid whichever segment is selected.
    """
    D, C = _sorted(D, C)
    bp = np.asarray(breakpoints, dtype=float)
    segs = []
    for lo, hi in zip(bp[:-1], bp[1:]):
        mask = (D >= lo) & (D <= hi)
        if mask.sum() < 2:
            raise TooFewPoints(f"segment [{lo}, {hi}] has {int(mask.sum())} points")
        rho, nu = _fit_segment(D[mask], C[mask])
        segs.append(Segment(float(lo), float(hi), rho, nu))
    return CostBoundModel(tuple(segs))


def pinball_loss(model: CostBoundModel, D, C) -> float:
    """Total tau = 1 quantile loss: summed slack of the envelope over the points."""
    D, C = _sorted(D, C)
    return float(sum(model(d) - c for d, c in zip(D, C)))


def _candidate_cuts(D: np.ndarray, max_candidates: int) -> np.ndarray:
    cuts = np.flatnonzero(np.diff(D) > 0) + 1
    if cuts.size > max_candidates:
        cuts = cuts[np.unique(np.linspace(0, cuts.size - 1, max_candidates).round().astype(int))]
    return 0.5 * (D[cuts - 1] + D[cuts])


def _refine(D: np.ndarray, C: np.ndarray, bp: np.ndarray, max_candidates: int):
    """Best single extra breakpoint for ``bp``; returns (loss, breakpoints) or None."""
    base = fit_quantile_pwl(D, C, bp)
    best = None
    for cut in _candidate_cuts(D, max_candidates):
        if np.any(np.isclose(cut, bp)):
            continue
        k = int(np.searchsorted(bp, cut)) - 1
        lo, hi = bp[k], bp[k + 1]
        left = (D >= lo) & (D <= cut)
        right = (D >= cut) & (D <= hi)
        if np.unique(D[left]).size < 2 or np.unique(D[right]).size < 2:
            continue
        old = base.segments[k]
        m = (D >= lo) & (D <= hi)
        gain = float(np.sum(old(D[m]) - C[m]))
        new = 0.0
        for mask in (left, right):
            rho, nu = _fit_segment(D[mask], C[mask])
            new += float(np.sum(rho + nu * D[mask] - C[mask]))
        if best is None or new - gain < best[0]:
            best = (new - gain, np.sort(np.append(bp, cut)))
    if best is None:
        return None
    bps = best[1]
    return pinball_loss(fit_quantile_pwl(D, C, bps), D, C), bps


def quantile_loss_curve(D, C, max_segments: int, max_candidates: int = 200) -> np.ndarray:
    """Total tau = 1 loss for 1..max_segments segments.

    For each count the loss is the better of the least-squares breakpoints
    and the previous count's breakpoints plus the best single extra cut.
    Splitting a segment never raises its envelope slack, so the curve is
    nonincreasing.
    """
    if max_segments < 1:
        raise ValueError("max_segments must be >= 1")
    D, C = _sorted(D, C)
    bp = find_breakpoints(D, C, 1)
    losses = [pinball_loss(fit_quantile_pwl(D, C, bp), D, C)]
    for n in range(2, max_segments + 1):
        options = []
        try:
            cand = find_breakpoints(D, C, n, max_candidates=max_candidates)
            options.append((pinball_loss(fit_quantile_pwl(D, C, cand), D, C), cand))
        except (TooFewPoints, DegenerateSegment):
            pass
        ref = _refine(D, C, bp, max_candidates)
        if ref is not None:
            options.append(ref)
        if not options:
            raise TooFewPoints(f"cannot place {n} segments")
        loss, bp = min(options, key=lambda o: o[0])
        losses.append(min(loss, losses[-1]))
    return np.array(losses)


def choose_elbow(losses) -> int:
    """Segment count at the elbow: the point farthest below the first-to-last chord."""
    y = np.asarray(losses, dtype=float)
    if y.size == 1 or y[0] - y[-1] <= 1e-12 * max(1.0, abs(y[0])):
        return 1
    if y.size == 2:
        return 2
    x = np.linspace(0.0, 1.0, y.size)
    yn = (y - y[-1]) / (y[0] - y[-1])
    return int(np.argmax((1.0 - x) - yn)) + 1


def fit_cost_bound(D, C, n_segments: int | None = None, elbow_max: int | None = None,
                   margin: float = 0.0) -> CostBoundModel:
    """Convenience wrapper: fixed segment count, or elbow choice up to ``elbow_max``."""
    if n_segments is None:
        n_segments = choose_elbow(quantile_loss_curve(D, C, elbow_max)) if elbow_max else 1
    model = fit_quantile_pwl(D, C, find_breakpoints(D, C, n_segments))
    return model.widened(margin)
