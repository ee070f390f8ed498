"""Evaluation metrics, their files on disk, and the printed comparison table."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..errors import StageError

TIMING_FIELDS = ("screening_time_s", "reduced_uc_time_s", "full_uc_time_s", "total_time_s",
                 "computational_burden_pct", "reduced_uc_time_median_s", "full_uc_time_median_s")

TABLE_ROWS = (
    ("Retained constraints (%)", "retained_constraints_pct", "{:.2f}"),
    ("#Infeasibilities", "n_infeasible", "{:d}"),
    ("#Sub-optimal solutions", "n_suboptimal", "{:d}"),
    ("Cost error (%)", "cost_error_pct", "{:.4f}"),
    ("Screening time (s)", "screening_time_s", "{:.3f}"),
    ("Reduced UC time (s)", "reduced_uc_time_s", "{:.3f}"),
    ("Total time (s)", "total_time_s", "{:.3f}"),
    ("Computational burden (%)", "computational_burden_pct", "{:.1f}"),
)

LABELS = {"bn": "BN", "ub": "UB", "cc": "CC", "ubcc": "UB+CC", "bn_fixed": "BN (fixed load)"}


@dataclass
class MethodReport:
    method: str
    n_test: int
    retained_constraints_pct: float
    n_infeasible: int
    n_suboptimal: int
    n_exact: int
    cost_error_pct: float
    cost_error_suboptimal_pct: float
    screening_time_s: float = 0.0
    reduced_uc_time_s: float = 0.0
    full_uc_time_s: float = 0.0
    total_time_s: float = 0.0
    computational_burden_pct: float = 0.0
    reduced_uc_time_median_s: float = 0.0
    full_uc_time_median_s: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.retained_constraints_pct <= 100.0:
            raise ValueError("retained percentage outside [0, 100]")
        if self.n_infeasible + self.n_suboptimal + self.n_exact != self.n_test:
            raise ValueError("verdict counts do not add up to the test-set size")

    @property
    def label(self) -> str:
        return LABELS.get(self.method, self.method)

    def metrics(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in TIMING_FIELDS}

    def timing(self) -> dict:
        return {k: getattr(self, k) for k in TIMING_FIELDS}


@dataclass
class EvaluationReport:
    grid: str
    n_train: int
    n_test: int
    n_skipped: int
    n_lines: int
    methods: list[MethodReport] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    # in-memory only: per-period outcomes and screening certificates
    records: list = field(default_factory=list, repr=False, compare=False)
    certificates: dict = field(default_factory=dict, repr=False, compare=False)

    def method(self, name: str) -> MethodReport:
        for m in self.methods:
            if m.method == name:
                return m
        raise KeyError(name)

    def metrics_dict(self) -> dict:
        return {"grid": self.grid, "n_train": self.n_train, "n_test": self.n_test,
                "n_skipped": self.n_skipped, "n_lines": self.n_lines, "meta": self.meta,
                "methods": [m.metrics() for m in self.methods]}

    def timing_dict(self) -> dict:
        return {m.method: m.timing() for m in self.methods}

    @classmethod
    def from_dicts(cls, metrics: dict, timing: dict | None = None) -> EvaluationReport:
        timing = timing or {}
        names = {f.name for f in fields(MethodReport)}
        methods = []
        for row in metrics["methods"]:
            data = {k: v for k, v in row.items() if k in names}
            data.update(timing.get(row["method"], {}))
            methods.append(MethodReport(**data))
        return cls(metrics["grid"], metrics["n_train"], metrics["n_test"], metrics["n_skipped"],
                   metrics["n_lines"], methods, metrics.get("meta", {}))


def _cell(fmt: str, v) -> str:
    text = fmt.format(v)
    # solver-gap noise can print as "-0.0000"
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


def format_table(report: EvaluationReport) -> str:
    """Metrics as rows, methods as columns."""
    head = [""] + [m.label for m in report.methods]
    body = []
    for title, key, fmt in TABLE_ROWS:
        body.append([title] + [_cell(fmt, getattr(m, key)) for m in report.methods])
    rows = [head] + body
    widths = [max(len(r[c]) for r in rows) for c in range(len(head))]
    lines = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [r[c].rjust(widths[c]) for c in range(1, len(r))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def emit_report(report: EvaluationReport, out_dir, formats=("json", "table")) -> list[Path]:
    """Write ``report.json`` (deterministic), ``timing.json`` and ``report.txt``."""
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "json" in formats:
            p = out / "report.json"
            p.write_text(json.dumps(report.metrics_dict(), indent=2, sort_keys=True) + "\n")
            t = out / "timing.json"
            t.write_text(json.dumps(report.timing_dict(), indent=2, sort_keys=True) + "\n")
            written += [p, t]
        if "table" in formats:
            p = out / "report.txt"
            p.write_text(format_table(report))
            written.append(p)
    except OSError as exc:
        raise StageError("io", exc) from exc
    return written


def parse_report(out_dir) -> EvaluationReport:
    out = Path(out_dir)
    try:
        metrics = json.loads((out / "report.json").read_text())
        tpath = out / "timing.json"
        timing = json.loads(tpath.read_text()) if tpath.exists() else None
    except OSError as exc:
        raise StageError("io", exc) from exc
    return EvaluationReport.from_dicts(metrics, timing)
