"""Row-oriented container for linear and mixed-binary programs."""

from __future__ import annotations

import copy
import enum
import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

LE, GE, EQ = "<=", ">=", "=="
_SENSES = (LE, GE, EQ)


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class SolveOutcome:
    status: Status
    objective: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    iterations: int = 0
    nodes: int = 0
    bound: float = math.nan

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class _Row:
    idx: np.ndarray
    val: np.ndarray
    sense: str
    rhs: float
    name: str


@dataclass
class LinearProgram:
    """Variables with bounds, a linear objective and linear rows.

    Variables may be marked binary; everything else is continuous. Rows are
    stored sparsely and densified on demand by :meth:`dense`.
    """

    sense: str = "min"
    name: str = "lp"
    var_names: list[str] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    obj: list[float] = field(default_factory=list)
    binary: list[bool] = field(default_factory=list)
    rows: list[_Row] = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_constraints(self) -> int:
        return len(self.rows)

    @property
    def is_mip(self) -> bool:
        return any(self.binary)

    @property
    def maximize(self) -> bool:
        return self.sense == "max"

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF,
                obj: float = 0.0, binary: bool = False) -> int:
        lb, ub = float(lb), float(ub)
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ValueError(f"variable {name}: lb {lb} > ub {ub}")
        if not math.isfinite(obj):
            raise ValueError(f"variable {name}: non-finite objective coefficient")
        self.var_names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.obj.append(float(obj))
        self.binary.append(bool(binary))
        return self.n_vars - 1

    def add_vars(self, prefix: str, count: int, lb=0.0, ub=INF, obj=0.0,
                 binary: bool = False, labels=None) -> np.ndarray:
        lb = np.broadcast_to(np.asarray(lb, dtype=float), (count,))
        ub = np.broadcast_to(np.asarray(ub, dtype=float), (count,))
        obj = np.broadcast_to(np.asarray(obj, dtype=float), (count,))
        labels = labels if labels is not None else range(count)
        return np.array(
            [self.add_var(f"{prefix}[{lab}]", lb[k], ub[k], obj[k], binary)
             for k, lab in enumerate(labels)],
            dtype=np.int64,
        )

    def add_constraint(self, idx, coefs, sense: str, rhs: float, name: str | None = None) -> int:
        if sense not in _SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        idx = np.asarray(idx, dtype=np.int64).ravel()
        val = np.asarray(coefs, dtype=float).ravel()
        if idx.shape != val.shape:
            raise ValueError("index and coefficient arrays differ in length")
        if not (np.all(np.isfinite(val)) and math.isfinite(rhs)):
            raise ValueError(f"constraint {name}: non-finite coefficient or rhs")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise IndexError(f"constraint {name}: variable index out of range")
        self.rows.append(_Row(idx, val, sense, float(rhs), name or f"c{len(self.rows)}"))
        return len(self.rows) - 1

    def set_bounds(self, var: int, lb: float, ub: float) -> None:
        self.lb[var], self.ub[var] = float(lb), float(ub)

    def copy(self) -> LinearProgram:
        return copy.deepcopy(self)

    def dense(self):
        """Return ``(c, A, senses, rhs, lb, ub, binary)`` as numpy arrays."""
        n = self.n_vars
        A = np.zeros((len(self.rows), n))
        for i, row in enumerate(self.rows):
            np.add.at(A[i], row.idx, row.val)
        return (
            np.asarray(self.obj, dtype=float),
            A,
            np.array([r.sense for r in self.rows], dtype=object),
            np.array([r.rhs for r in self.rows], dtype=float),
            np.asarray(self.lb, dtype=float),
            np.asarray(self.ub, dtype=float),
            np.asarray(self.binary, dtype=bool),
        )

    def objective_value(self, x: np.ndarray) -> float:
        return float(np.dot(self.obj, x))

    def max_violation(self, x: np.ndarray) -> float:
        """Largest absolute violation of any row or bound at ``x``."""
        c, A, senses, rhs, lb, ub, _ = self.dense()
        act = A @ x
        viol = np.zeros(len(rhs))
        le = senses == LE
        ge = senses == GE
        eq = senses == EQ
        viol[le] = np.maximum(act[le] - rhs[le], 0.0)
        viol[ge] = np.maximum(rhs[ge] - act[ge], 0.0)
        viol[eq] = np.abs(act[eq] - rhs[eq])
        bnd = np.maximum(np.maximum(lb - x, x - ub), 0.0)
        return float(max(viol.max(initial=0.0), bnd.max(initial=0.0)))

    def to_lp_text(self) -> str:
        """CPLEX-LP-like dump for eyeballing or feeding an external solver."""

        def term(coef: float, var: str, first: bool) -> str:
            sign = "-" if coef < 0 else ("" if first else "+")
            return f"{sign} {abs(coef):.12g} {var}".strip()

        out = [f"\\ {self.name}", "Maximize" if self.maximize else "Minimize"]
        obj_terms = [term(c, v, k == 0) for k, (c, v) in
                     enumerate((c, v) for c, v in zip(self.obj, self.var_names) if c != 0.0)]
        out.append(" obj: " + (" ".join(obj_terms) if obj_terms else "0"))
        out.append("Subject To")
        for row in self.rows:
            terms = [term(c, self.var_names[j], k == 0) for k, (j, c) in enumerate(zip(row.idx, row.val))]
            sense = "=" if row.sense == EQ else row.sense
            out.append(f" {row.name}: {' '.join(terms) if terms else '0'} {sense} {row.rhs:.12g}")
        out.append("Bounds")
        for name, lo, hi in zip(self.var_names, self.lb, self.ub):
            lo_s = "-inf" if lo == -INF else f"{lo:.12g}"
            hi_s = "+inf" if hi == INF else f"{hi:.12g}"
            out.append(f" {lo_s} <= {name} <= {hi_s}")
        bins = [v for v, b in zip(self.var_names, self.binary) if b]
        if bins:
            out.append("Binaries")
            out.append(" " + " ".join(bins))
        out.append("End")
        return "\n".join(out) + "\n"
