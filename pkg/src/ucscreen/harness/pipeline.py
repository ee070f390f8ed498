"""Train / screen / solve / validate pipeline and the topology experiment."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..costbound import CostBoundModel, fit_cost_bound
from ..demandset import (DemandHistory, Singleton, box_from_history, generate_history,
                         hull_from_history, load_history)
from ..errors import (InfeasibleProblem, InvalidSplit, IslandingOutage, StageError,
                      UcScreenError)
from ..grid import Grid, build_ptdf, load_grid
from ..screening import (METHODS, MethodConfig, ScreeningBound, ScreeningResult, intersect,
                         screen_all)
from ..uc import ConstraintMask, fix_and_resolve, solve_uc, verdict
from .report import EvaluationReport, MethodReport, emit_report

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorSpec:
    """Synthetic history: allocation factors, load range, spread and seed."""

    xi: tuple[float, ...]
    n_periods: int
    load_range: tuple[float, float]
    width: float = 0.05
    seed: int = 0


@dataclass
class ExperimentConfig:
    grid: str | Path | None = None
    history: str | Path | None = None
    generator: GeneratorSpec | None = None
    test_history: str | Path | None = None
    test_frac: float = 0.2
    worst_case: int | None = None
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    fixed_load: bool = False
    n_segments: int | None = None
    elbow_max: int | None = None
    kappa: float = 1.0
    fit_margin: float = 0.0
    enforce_other_lines: bool = True
    gap: float = 1e-6
    workers: int = 1
    out_dir: str | Path | None = None

    def __post_init__(self):
        self.methods = tuple(self.methods)
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")
        if self.n_segments is not None and self.elbow_max is not None:
            raise ValueError("give either n_segments or elbow_max, not both")
        if not 0.0 < self.test_frac < 1.0:
            raise ValueError("test_frac must lie in (0, 1)")
        for name in ("grid", "history", "test_history"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise StageError("data", FileNotFoundError(f"{name}: {path}"))

    def to_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, Path):
                v = str(v)
            elif isinstance(v, GeneratorSpec):
                v = dict(v.__dict__)
            out[k] = v
        return out


def random_split(n: int, test_frac: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    n_test = int(round(n * test_frac))
    if not 0 < n_test < n:
        raise InvalidSplit(f"test fraction {test_frac} leaves an empty side for {n} periods")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def worst_case_split(history: DemandHistory, n_test: int) -> tuple[DemandHistory, DemandHistory]:
    """Highest-aggregate periods go to the test set (earlier period wins a tie)."""
    n = len(history)
    if not 0 < n_test < n:
        raise InvalidSplit(f"n_test must lie in (0, {n}), got {n_test}")
    order = np.lexsort((np.arange(n), -history.aggregate))
    test = np.sort(order[:n_test])
    train = np.sort(order[n_test:])
    return history.subset(train), history.subset(test)


def training_costs(grid: Grid, ptdf, history: DemandHistory, gap: float = 1e-6):
    """Full-UC cost per training period; infeasible periods are dropped."""
    D, C, keep = [], [], []
    for k, d in enumerate(history.values):
        try:
            sol = solve_uc(grid, ptdf, d, gap=gap)
        except InfeasibleProblem:
            logger.warning("training period %s has no feasible commitment; skipped", history.labels[k])
            continue
        D.append(float(d.sum()))
        C.append(sol.cost)
        keep.append(k)
    return np.array(D), np.array(C), np.array(keep, dtype=np.int64)


def method_configs(train: DemandHistory, cost_bound: CostBoundModel | None, kappa: float = 1.0,
                   enforce_other_lines: bool = True, methods=METHODS) -> dict[str, MethodConfig]:
    box = box_from_history(train)
    hull = hull_from_history(train, kappa)
    table = {
        "bn": MethodConfig(box, None, enforce_other_lines),
        "ub": MethodConfig(box, cost_bound, enforce_other_lines),
        "cc": MethodConfig(hull, None, enforce_other_lines),
        "ubcc": MethodConfig(hull, cost_bound, enforce_other_lines),
    }
    return {m: table[m] for m in methods}


def _load(config: ExperimentConfig, grid: Grid | None, history: DemandHistory | None):
    if grid is None:
        if config.grid is None:
            raise StageError("data", "no grid given")
        grid = load_grid(config.grid)
    if history is None:
        if config.history is not None:
            history = load_history(config.history)
        elif config.generator is not None:
            g = config.generator
            history = generate_history(g.xi, g.n_periods, g.load_range, g.width, g.seed, grid.buses)
        else:
            raise StageError("data", "no history or generator given")
    if tuple(history.buses) != tuple(grid.buses):
        raise StageError("data", "history columns do not match grid buses")
    if config.test_history is not None:
        test = load_history(config.test_history)
        return grid, history, test
    if config.worst_case is not None:
        train, test = worst_case_split(history, config.worst_case)
    else:
        tr, te = random_split(len(history), config.test_frac, config.seed)
        train, test = history.subset(tr), history.subset(te)
    return grid, train, test


def _save_json(out: Path | None, name: str, data) -> None:
    if out is not None:
        (out / name).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def run_pipeline(config: ExperimentConfig, grid: Grid | None = None,
                 history: DemandHistory | None = None) -> EvaluationReport:
    """Fit, screen, solve reduced and full UC on the test set, validate, aggregate.

    ``grid`` and ``history`` override the paths in ``config``. When
    ``config.test_history`` is set the whole history trains the model.
    Intermediate artifacts go to ``config.out_dir`` when it is set.
    """
    out = Path(config.out_dir) if config.out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    try:
        grid, train, test = _load(config, grid, history)
        ptdf = build_ptdf(grid)
    except StageError:
        raise
    except (UcScreenError, OSError, ValueError) as exc:
        raise StageError("data", exc) from exc
    if out is not None:
        train.to_csv(out / "train.csv")
        test.to_csv(out / "test.csv")

    needs_bound = any(m in ("ub", "ubcc") for m in config.methods)
    try:
        cost_bound = None
        n_train_used = len(train)
        if needs_bound:
            D, C, keep = training_costs(grid, ptdf, train, config.gap)
            n_train_used = keep.size
            cost_bound = fit_cost_bound(D, C, config.n_segments, config.elbow_max, config.fit_margin)
            _save_json(out, "cost_bound.json", cost_bound.to_dict())
            _save_json(out, "training_costs.json",
                       {"period": [train.labels[k] for k in keep], "D": D.tolist(), "cost": C.tolist()})
        configs = method_configs(train, cost_bound, config.kappa, config.enforce_other_lines,
                                 config.methods)
    except UcScreenError as exc:
        raise StageError("fit", exc) from exc

    screen_time: dict[str, float] = {}
    certs: dict[str, ScreeningResult] = {}
    masks: dict[str, list[ConstraintMask]] = {}
    retained: dict[str, list[int]] = {}
    try:
        for name, mc in configs.items():
            t0 = time.perf_counter()
            res = screen_all(grid, ptdf, mc, workers=config.workers, gap=config.gap)
            screen_time[name] = time.perf_counter() - t0
            certs[name] = res
            if out is not None:
                res.save(out / f"certificate_{name}.json")
            masks[name] = [res.to_mask(grid)] * len(test)
            retained[name] = [res.n_retained] * len(test)
        if config.fixed_load:
            t0 = time.perf_counter()
            masks["bn_fixed"], retained["bn_fixed"] = [], []
            for d in test.values:
                res = screen_all(grid, ptdf, MethodConfig(Singleton(d), None, config.enforce_other_lines),
                                 workers=config.workers)
                masks["bn_fixed"].append(res.to_mask(grid))
                retained["bn_fixed"].append(res.n_retained)
            screen_time["bn_fixed"] = time.perf_counter() - t0
    except UcScreenError as exc:
        raise StageError("screen", exc) from exc

    names = list(masks)
    full_cost, full_time, evaluated = [], [], []
    red_time = {m: [] for m in names}
    verdicts = {m: [] for m in names}
    errors = {m: [] for m in names}
    records = []
    try:
        for k, d in enumerate(test.values):
            t0 = time.perf_counter()
            try:
                full = solve_uc(grid, ptdf, d, gap=config.gap)
            except InfeasibleProblem:
                logger.warning("test period %s has no feasible commitment; skipped", test.labels[k])
                continue
            full_time.append(time.perf_counter() - t0)
            full_cost.append(full.cost)
            evaluated.append(k)
            rec = {"period": test.labels[k], "full_cost": full.cost, "D": float(d.sum())}
            for m in names:
                t0 = time.perf_counter()
                red = solve_uc(grid, ptdf, d, masks[m][k], gap=config.gap)
                red_time[m].append(time.perf_counter() - t0)
                resolved = fix_and_resolve(grid, ptdf, d, red.commitment)
                v = verdict(full.cost, resolved)
                verdicts[m].append(v)
                errors[m].append(None if v == "infeasible" else
                                 (resolved.objective - full.cost) / max(abs(full.cost), 1e-9) * 100.0)
                rec[m] = {"verdict": v, "reduced_cost": red.cost,
                          "resolved_cost": resolved.objective if resolved.optimal else None}
            records.append(rec)
    except UcScreenError as exc:
        raise StageError("solve", exc) from exc
    _save_json(out, "test_results.json", records)

    try:
        n_eval = len(evaluated)
        total_full = float(np.sum(full_time))
        reports = []
        for m in names:
            vs = verdicts[m]
            n_inf, n_sub = vs.count("infeasible"), vs.count("suboptimal")
            all_err = [e for e in errors[m] if e is not None]
            sub_err = [e for e, v in zip(errors[m], vs) if v == "suboptimal"]
            kept = [retained[m][k] for k in evaluated] or retained[m][:1] or [0]
            red_total = float(np.sum(red_time[m]))
            reports.append(MethodReport(
                method=m, n_test=n_eval,
                retained_constraints_pct=100.0 * float(np.mean(kept)) / (2 * grid.n_lines),
                n_infeasible=n_inf, n_suboptimal=n_sub, n_exact=n_eval - n_inf - n_sub,
                cost_error_pct=float(np.mean(all_err)) if all_err else 0.0,
                cost_error_suboptimal_pct=float(np.mean(sub_err)) if sub_err else 0.0,
                screening_time_s=screen_time[m],
                reduced_uc_time_s=red_total,
                full_uc_time_s=total_full,
                total_time_s=screen_time[m] + red_total,
                computational_burden_pct=100.0 * red_total / total_full if total_full > 0 else math.nan,
                reduced_uc_time_median_s=float(np.median(red_time[m])) if red_time[m] else 0.0,
                full_uc_time_median_s=float(np.median(full_time)) if full_time else 0.0,
            ))
        meta = {"cost_bound": cost_bound.to_dict() if cost_bound else None,
                "n_train_used": int(n_train_used), "kappa": config.kappa,
                "split": ("worst_case" if config.worst_case is not None else
                          "given" if config.test_history is not None else "random")}
        report = EvaluationReport(grid.name, len(train), n_eval, len(test) - n_eval, grid.n_lines,
                                  reports, meta, records, certs)
    except (ValueError, ZeroDivisionError) as exc:
        raise StageError("eval", exc) from exc
    if out is not None:
        emit_report(report, out)
    return report


@dataclass
class TopologyResult:
    base: ScreeningResult
    variants: dict[str, ScreeningResult]
    intersection: ScreeningResult
    fractions: dict[str, float] = field(default_factory=dict)

    def summary(self) -> dict:
        return {"base_removable_fraction": self.base.removable_fraction,
                "intersection_removable_fraction": self.intersection.removable_fraction,
                "variant_removable_fraction": self.fractions}


def _pad_outage(res: ScreeningResult, grid: Grid, out_id: str) -> ScreeningResult:
    """Put the outaged line back as removable: it carries no flow limit in that topology."""
    cap = next(ln.capacity for ln in grid.lines if ln.id == out_id)
    bounds = {}
    for ln in grid.lines:
        for side in ("lower", "upper"):
            key = (ln.id, side)
            bounds[key] = (ScreeningBound(ln.id, side, 0.0, cap, True, "outaged")
                           if ln.id == out_id else res.bounds[key])
    return ScreeningResult(bounds, res.method, res.digest, res.created)


def survivable_outages(grid: Grid, history: DemandHistory, gap: float = 1e-6) -> list[str]:
    """Lines whose outage keeps the grid connected and every period servable.

    Periods the intact grid cannot serve are ignored. An outage that leaves
    some demand without a feasible commitment makes every bounding problem of
    that variant infeasible, which retains all sides.
    """
    _, _, keep = training_costs(grid, build_ptdf(grid), history, gap)
    history = history.subset(keep)
    out = []
    for ln in grid.lines:
        g = grid.without_line(ln.id)
        if not g.is_connected():
            continue
        ptdf = build_ptdf(g)
        try:
            for d in history.values:
                solve_uc(g, ptdf, d, gap=gap)
        except InfeasibleProblem:
            continue
        out.append(ln.id)
    return out


def topology_experiment(grid: Grid, outage_line_ids, base_config: MethodConfig,
                        workers: int = 1, **solver_kw) -> TopologyResult:
    """Screen the base topology and every single-line outage, then intersect.

    The outaged line's own sides count as removable in its variant.
    """
    outages = list(outage_line_ids)
    for lid in outages:
        if lid not in grid.line_ids:
            raise KeyError(lid)
        if not grid.without_line(lid).is_connected():
            raise IslandingOutage(f"outage of {lid} splits the network")
    base = screen_all(grid, build_ptdf(grid), base_config, workers=workers, **solver_kw)
    variants, fractions = {}, {}
    for lid in outages:
        g = grid.without_line(lid)
        res = _pad_outage(screen_all(g, build_ptdf(g), base_config, workers=workers, **solver_kw),
                          grid, lid)
        variants[lid] = res
        fractions[lid] = res.removable_fraction
    inter = intersect([base, *variants.values()]) if variants else base
    return TopologyResult(base, variants, inter, fractions)
