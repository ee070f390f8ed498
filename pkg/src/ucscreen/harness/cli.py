"""Command-line entry point: ``ucscreen <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..costbound import CostBoundModel, fit_cost_bound
from ..demandset import generate_history, load_history, read_allocation, write_allocation
from ..errors import StageError, UcScreenError
from ..grid import build_ptdf, load_grid, save_grid
from ..screening import METHODS, ScreeningResult, screen_all
from ..synthetic import random_grid
from ..uc import solve_uc
from .pipeline import (ExperimentConfig, method_configs, run_pipeline, survivable_outages,
                       topology_experiment, training_costs)
from .report import format_table


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fit_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--segments", type=int, help="number of cost-bound segments")
    g.add_argument("--elbow", type=int, metavar="M", help="pick the segment count by elbow up to M")
    p.add_argument("--kappa", type=float, default=1.0, help="cap on the hull weight sum")
    p.add_argument("--margin", type=float, default=0.0, help="widen the fitted demand range (MW)")


def _methods(args) -> tuple[str, ...]:
    return tuple(dict.fromkeys(args.method)) if args.method else METHODS


def _cost_bound(args, grid, ptdf, history):
    if getattr(args, "cost_bound", None):
        return CostBoundModel.load(args.cost_bound)
    D, C, _ = training_costs(grid, ptdf, history)
    return fit_cost_bound(D, C, args.segments, args.elbow, args.margin)


def cmd_gen_grid(args) -> int:
    case = random_grid(args.buses, args.generators, seed=args.seed)
    out = _out(args)
    save_grid(case.grid, out / "grid.json")
    write_allocation(case.allocation, out / "allocation.csv")
    (out / "load_range.json").write_text(json.dumps({"load_range": list(case.load_range)}) + "\n")
    print(f"{case.grid.name}: {case.grid.n_buses} buses, {case.grid.n_lines} lines, "
          f"load range {case.load_range[0]:.1f}-{case.load_range[1]:.1f} MW")
    return 0


def cmd_gen_data(args) -> int:
    try:
        xi = read_allocation(args.xi)
        hist = generate_history(list(xi.values()), args.periods, tuple(args.load_range), args.width,
                                args.seed, list(xi))
    except (UcScreenError, OSError, ValueError) as exc:
        raise StageError("data", exc) from exc
    path = _out(args) / "history.csv"
    hist.to_csv(path)
    print(f"wrote {len(hist)} periods to {path}")
    return 0


def cmd_fit(args) -> int:
    try:
        grid = load_grid(args.grid)
        hist = load_history(args.history)
    except (UcScreenError, OSError, ValueError) as exc:
        raise StageError("data", exc) from exc
    try:
        ptdf = build_ptdf(grid)
        D, C, keep = training_costs(grid, ptdf, hist)
        cb = fit_cost_bound(D, C, args.segments, args.elbow, args.margin)
    except UcScreenError as exc:
        raise StageError("fit", exc) from exc
    out = _out(args)
    cb.save(out / "cost_bound.json")
    (out / "training_costs.json").write_text(json.dumps(
        {"period": [hist.labels[k] for k in keep], "D": D.tolist(), "cost": C.tolist()}, indent=2) + "\n")
    sets = {"buses": list(hist.buses), "box_lower": hist.values.min(axis=0).tolist(),
            "box_upper": hist.values.max(axis=0).tolist(), "hull_points": len(hist), "kappa": args.kappa}
    (out / "demand_sets.json").write_text(json.dumps(sets, indent=2) + "\n")
    for s in cb.segments:
        print(f"[{s.lower:.3f}, {s.upper:.3f}]  C <= {s.intercept:.4f} + {s.slope:.4f} D")
    return 0


def cmd_screen(args) -> int:
    try:
        grid = load_grid(args.grid)
        hist = load_history(args.history)
        ptdf = build_ptdf(grid)
    except (UcScreenError, OSError, ValueError) as exc:
        raise StageError("data", exc) from exc
    methods = _methods(args)
    try:
        cb = _cost_bound(args, grid, ptdf, hist) if {"ub", "ubcc"} & set(methods) else None
    except UcScreenError as exc:
        raise StageError("fit", exc) from exc
    out = _out(args)
    try:
        for name, mc in method_configs(hist, cb, args.kappa, not args.skip_other_lines, methods).items():
            res = screen_all(grid, ptdf, mc, workers=args.workers)
            res.save(out / f"certificate_{name}.json")
            print(f"{name}: {res.n_retained}/{res.n_sides} sides retained")
    except UcScreenError as exc:
        raise StageError("screen", exc) from exc
    return 0


def cmd_solve(args) -> int:
    try:
        grid = load_grid(args.grid)
        demand = load_history(args.demand)
        ptdf = build_ptdf(grid)
        mask = ScreeningResult.load(args.certificate).to_mask(grid) if args.certificate else None
    except (UcScreenError, OSError, ValueError, KeyError) as exc:
        raise StageError("data", exc) from exc
    rows = []
    try:
        for lab, d in zip(demand.labels, demand.values):
            sol = solve_uc(grid, ptdf, d, mask)
            rows.append({"period": lab, **sol.to_dict()})
            on = [g.id for g, u in zip(grid.generators, sol.commitment) if u]
            print(f"{lab}: cost {sol.cost:.4f}, committed {','.join(on)}")
    except UcScreenError as exc:
        raise StageError("solve", exc) from exc
    if args.out:
        (_out(args) / "solutions.json").write_text(json.dumps(rows, indent=2) + "\n")
    return 0


def cmd_eval(args) -> int:
    cfg = ExperimentConfig(grid=args.grid, history=args.history, test_history=args.test_history,
                           test_frac=args.test_frac, worst_case=args.worst_case, seed=args.seed,
                           methods=_methods(args), fixed_load=args.fixed_load,
                           n_segments=args.segments, elbow_max=args.elbow, kappa=args.kappa,
                           fit_margin=args.margin, enforce_other_lines=not args.skip_other_lines,
                           workers=args.workers, out_dir=args.out)
    report = run_pipeline(cfg)
    sys.stdout.write(format_table(report))
    return 0


def cmd_topo(args) -> int:
    try:
        grid = load_grid(args.grid)
        hist = load_history(args.history)
        ptdf = build_ptdf(grid)
    except (UcScreenError, OSError, ValueError) as exc:
        raise StageError("data", exc) from exc
    method = _methods(args)[0]
    try:
        cb = _cost_bound(args, grid, ptdf, hist) if method in ("ub", "ubcc") else None
    except UcScreenError as exc:
        raise StageError("fit", exc) from exc
    mc = method_configs(hist, cb, args.kappa, True, (method,))[method]
    if args.outages == "all":
        outages = [ln.id for ln in grid.lines if grid.without_line(ln.id).is_connected()]
    elif args.outages == "survivable":
        try:
            outages = survivable_outages(grid, hist)
        except UcScreenError as exc:
            raise StageError("solve", exc) from exc
    else:
        outages = [s for s in args.outages.split(",") if s]
    try:
        res = topology_experiment(grid, outages, mc, workers=args.workers)
    except (UcScreenError, KeyError) as exc:
        raise StageError("screen", exc) from exc
    out = _out(args)
    res.intersection.save(out / "certificate_intersection.json")
    summary = {"method": method, "outages": outages, **res.summary()}
    (out / "topology.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"base removable {100 * res.base.removable_fraction:.1f}%, "
          f"intersection removable {100 * res.intersection.removable_fraction:.1f}% "
          f"over {len(outages)} outages")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ucscreen", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-grid", help="random connected test system")
    p.add_argument("--buses", type=int, default=24)
    p.add_argument("--generators", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_grid)

    p = sub.add_parser("gen-data", help="synthetic net-demand history")
    p.add_argument("--xi", required=True, help="allocation CSV (bus,xi)")
    p.add_argument("--periods", type=int, default=8640)
    p.add_argument("--load-range", type=float, nargs=2, default=(50.0, 70.0), metavar=("LO", "HI"))
    p.add_argument("--width", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("fit", help="cost bound and demand sets from a history")
    p.add_argument("--grid", required=True)
    p.add_argument("--history", required=True)
    _fit_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("screen", help="screening certificate per method")
    p.add_argument("--grid", required=True)
    p.add_argument("--history", required=True)
    p.add_argument("--method", action="append", choices=METHODS)
    p.add_argument("--cost-bound", help="fitted cost_bound.json (fit on the history if omitted)")
    _fit_args(p)
    p.add_argument("--skip-other-lines", action="store_true", help="drop other lines' limits")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("solve", help="full or reduced UC for each row of a demand file")
    p.add_argument("--grid", required=True)
    p.add_argument("--demand", required=True)
    p.add_argument("--certificate", help="screening certificate; omit for the full model")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="full pipeline with report")
    p.add_argument("--grid", required=True)
    p.add_argument("--history", required=True)
    p.add_argument("--test-history", help="explicit test periods; the whole history trains")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--test-frac", type=float, default=0.2)
    g.add_argument("--worst-case", type=int, metavar="N", help="test on the N highest-demand periods")
    p.add_argument("--method", action="append", choices=METHODS)
    p.add_argument("--fixed-load", action="store_true", help="add per-period singleton screening")
    _fit_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-other-lines", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("topo", help="screening under single-line outages, intersected")
    p.add_argument("--grid", required=True)
    p.add_argument("--history", required=True)
    p.add_argument("--method", action="append", choices=METHODS)
    p.add_argument("--outages", default="survivable",
                   help="comma-separated line ids, 'all' (non-islanding) or 'survivable' "
                        "(non-islanding and every history period still servable)")
    p.add_argument("--cost-bound")
    _fit_args(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_topo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (UcScreenError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
