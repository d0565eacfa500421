"""Exact rational LP and 0-1 integer programming over cycle variables.

The LP path is a dense two-phase simplex on ``Fraction`` entries with
Bland's rule.  ``solve_ilp`` runs a deterministic branch-and-bound on top
of it; for models too large for rational arithmetic it can hand the search
to HiGHS (``backend="highs"``) and then re-check the 0/1 answer exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ArityMismatch, InfeasibleModel, UnboundedObjective

LE, GE, EQ = "<=", ">=", "=="
_RELS = (LE, GE, EQ)

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
BUDGET = "BudgetExceeded"

# Extreme-point rank audit, read by the acceptance suite.
AUDIT = {"fractional_points": 0, "rank_ok": 0}


def reset_audit() -> None:
    AUDIT["fractional_points"] = 0
    AUDIT["rank_ok"] = 0


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (float, np.floating)):
        return Fraction(str(float(x)))
    return Fraction(int(x)) if isinstance(x, (bool, np.integer)) else Fraction(x)


@dataclass(frozen=True)
class Row:
    coeffs: Mapping[int, Fraction]
    rel: str
    rhs: Fraction
    name: str = ""

    def value(self, x: Sequence) -> Fraction:
        return sum((c * x[j] for j, c in self.coeffs.items()), Fraction(0))

    def holds(self, x: Sequence) -> bool:
        lhs = self.value(x)
        if self.rel == LE:
            return lhs <= self.rhs
        if self.rel == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


def make_row(coeffs, rel: str, rhs, name: str = "") -> Row:
    if rel not in _RELS:
        raise ValueError(f"unknown relation {rel!r}")
    if isinstance(coeffs, Mapping):
        items = coeffs.items()
    else:
        items = enumerate(coeffs)
    clean = {int(j): _frac(c) for j, c in items if c != 0}
    return Row(clean, rel, _frac(rhs), name)


@dataclass
class LinearModel:
    """``max/min c.x`` subject to sparse rows and ``0 <= x <= ub``.

    ``ub`` entries are 1 or ``None`` (unbounded above).
    """

    num_vars: int
    rows: list[Row] = field(default_factory=list)
    ub: list = None
    objective: dict = field(default_factory=dict)
    sense: str = "max"
    names: list = None

    def __post_init__(self):
        if self.ub is None:
            self.ub = [1] * self.num_vars
        if len(self.ub) != self.num_vars:
            raise ArityMismatch(f"{len(self.ub)} bounds for {self.num_vars} variables")
        self.objective = {int(j): _frac(c) for j, c in dict(self.objective).items() if c != 0}
        for r in self.rows:
            self._check_row(r)

    def _check_row(self, r: Row) -> None:
        for j in r.coeffs:
            if not 0 <= j < self.num_vars:
                raise ArityMismatch(f"row {r.name!r} references variable {j} of {self.num_vars}")

    def add_row(self, coeffs, rel, rhs, name="") -> Row:
        r = make_row(coeffs, rel, rhs, name)
        self._check_row(r)
        self.rows.append(r)
        return r

    def copy(self) -> "LinearModel":
        return LinearModel(self.num_vars, list(self.rows), list(self.ub), dict(self.objective),
                           self.sense, None if self.names is None else list(self.names))

    def with_objective(self, objective, sense="max") -> "LinearModel":
        m = self.copy()
        m.objective = {int(j): _frac(c) for j, c in dict(objective).items() if c != 0}
        m.sense = sense
        return m

    def objective_value(self, x: Sequence) -> Fraction:
        return sum((c * x[j] for j, c in self.objective.items()), Fraction(0))

    def is_feasible(self, x: Sequence) -> bool:
        for j, v in enumerate(x):
            if v < 0 or (self.ub[j] is not None and v > self.ub[j]):
                return False
        return all(r.holds(x) for r in self.rows)

    def dump(self) -> str:
        """Plain-text LP-like rendering for debugging."""
        nm = self.names or [f"x{j}" for j in range(self.num_vars)]

        def expr(coeffs):
            if not coeffs:
                return "0"
            parts = []
            for j in sorted(coeffs):
                c = coeffs[j]
                sign = "-" if c < 0 else "+"
                mag = abs(c)
                parts.append(f"{sign} {'' if mag == 1 else str(mag) + ' '}{nm[j]}")
            s = " ".join(parts)
            return s[2:] if s.startswith("+ ") else s

        lines = ["Maximize" if self.sense == "max" else "Minimize", f" obj: {expr(self.objective)}",
                 "Subject To"]
        for k, r in enumerate(self.rows):
            lines.append(f" {r.name or 'r' + str(k)}: {expr(r.coeffs)} {r.rel.replace('==', '=')} {r.rhs}")
        lines.append("Bounds")
        for j in range(self.num_vars):
            ub = self.ub[j]
            lines.append(f" 0 <= {nm[j]}" + ("" if ub is None else f" <= {ub}"))
        lines.append("End")
        return "\n".join(lines) + "\n"


def add_cut(m: LinearModel, row) -> LinearModel:
    """Return a copy of ``m`` with one more row (a ``Row`` or ``(coeffs, rel, rhs)``)."""
    if not isinstance(row, Row):
        coeffs, rel, rhs = row[:3]
        if not isinstance(coeffs, Mapping) and len(coeffs) != m.num_vars:
            raise ArityMismatch(f"cut has {len(coeffs)} coefficients, model has {m.num_vars} variables")
        row = make_row(coeffs, rel, rhs, row[3] if len(row) > 3 else "cut")
    out = m.copy()
    out._check_row(row)
    out.rows.append(row)
    return out


# ---------------------------------------------------------------------------
# simplex
# ---------------------------------------------------------------------------

@dataclass
class ExtremePoint:
    values: list
    tight_rows: list
    objective: Fraction
    is_integral: bool


def _pivot(T, obj_rows, r, c):
    prow = T[r]
    pv = prow[c]
    if pv != 1:
        inv = 1 / pv
        prow[:] = [a * inv if a else a for a in prow]
    nz = [(j, a) for j, a in enumerate(prow) if a]
    for k, row in enumerate(T):
        if k != r:
            f = row[c]
            if f:
                for j, a in nz:
                    row[j] -= f * a
    for row in obj_rows:
        f = row[c]
        if f:
            for j, a in nz:
                row[j] -= f * a


def _simplex(T, basis, z, allowed, max_iter=200000):
    """Maximize with reduced-cost row ``z`` (entering while z_j < 0). Bland's rule."""
    ncol = len(z) - 1
    for _ in range(max_iter):
        enter = -1
        for j in range(ncol):
            if allowed[j] and z[j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        best = None
        leave = -1
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return "unbounded"
        _pivot(T, [z], leave, enter)
        basis[leave] = enter
    raise RuntimeError("simplex iteration limit")


def _rank(rows: list[list[Fraction]]) -> int:
    mat = [list(r) for r in rows]
    rank = 0
    ncol = len(mat[0]) if mat else 0
    for c in range(ncol):
        piv = next((i for i in range(rank, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pr = mat[rank]
        for i in range(len(mat)):
            if i != rank and mat[i][c] != 0:
                f = mat[i][c] / pr[c]
                mat[i] = [a - f * b for a, b in zip(mat[i], pr)]
        rank += 1
    return rank


def tight_rank(m: LinearModel, x: Sequence, tight: Iterable[int]) -> int:
    """Rank of the tight model rows plus the tight variable bounds at ``x``."""
    rows = []
    for k in tight:
        r = m.rows[k]
        rows.append([r.coeffs.get(j, Fraction(0)) for j in range(m.num_vars)])
    for j, v in enumerate(x):
        if v == 0 or (m.ub[j] is not None and v == m.ub[j]):
            rows.append([Fraction(int(i == j)) for i in range(m.num_vars)])
    return _rank(rows) if rows else 0


def solve_lp_extreme(m: LinearModel, audit: bool = True) -> ExtremePoint:
    """Optimal basic feasible solution of the LP relaxation, in exact arithmetic."""
    n = m.num_vars
    cons = []  # (dense coeffs, rel, rhs)
    for r in m.rows:
        coeffs = [Fraction(0)] * n
        for j, c in r.coeffs.items():
            coeffs[j] = c
        cons.append((coeffs, r.rel, r.rhs))
    for j, u in enumerate(m.ub):
        if u is not None:
            coeffs = [Fraction(0)] * n
            coeffs[j] = Fraction(1)
            cons.append((coeffs, LE, _frac(u)))
    norm = []
    for coeffs, rel, rhs in cons:
        if rhs < 0:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        norm.append((coeffs, rel, rhs))

    n_slack = sum(1 for _, rel, _ in norm if rel != EQ)
    n_art = sum(1 for _, rel, _ in norm if rel != LE)
    ncol = n + n_slack + n_art
    T, basis = [], []
    s_at, a_at = n, n + n_slack
    art_cols = []
    for coeffs, rel, rhs in norm:
        row = coeffs + [Fraction(0)] * (n_slack + n_art) + [rhs]
        if rel == LE:
            row[s_at] = Fraction(1)
            basis.append(s_at)
            s_at += 1
        else:
            if rel == GE:
                row[s_at] = Fraction(-1)
                s_at += 1
            row[a_at] = Fraction(1)
            basis.append(a_at)
            art_cols.append(a_at)
            a_at += 1
        T.append(row)

    allowed = [True] * ncol
    if art_cols:
        # phase 1: maximize -sum(artificials)
        z = [Fraction(0)] * (ncol + 1)
        for a in art_cols:
            z[a] = Fraction(1)
        for i, b in enumerate(basis):
            if b >= n + n_slack:
                z[:] = [zj - tj for zj, tj in zip(z, T[i])]
        _simplex(T, basis, z, allowed)
        if z[-1] != 0:
            raise InfeasibleModel("LP relaxation is infeasible")
        # drive artificials out of the basis
        art = set(art_cols)
        keep = []
        for i in range(len(T)):
            if basis[i] in art:
                enter = next((j for j in range(n + n_slack) if T[i][j] != 0), None)
                if enter is None:
                    continue  # redundant row
                _pivot(T, [], i, enter)
                basis[i] = enter
            keep.append(i)
        T = [T[i] for i in keep]
        basis = [basis[i] for i in keep]
        for a in art_cols:
            allowed[a] = False

    sign = 1 if m.sense == "max" else -1
    z = [Fraction(0)] * (ncol + 1)
    for j, c in m.objective.items():
        z[j] = -sign * c
    for i, b in enumerate(basis):
        if z[b]:
            f = z[b]
            z[:] = [zj - f * tj for zj, tj in zip(z, T[i])]
    status = _simplex(T, basis, z, allowed)
    if status == "unbounded":
        raise UnboundedObjective("objective is unbounded")

    x = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    # independent substitution check
    if not m.is_feasible(x):
        raise AssertionError("simplex returned an infeasible point")
    obj = m.objective_value(x)
    if obj != sign * z[-1]:
        raise AssertionError("objective mismatch after simplex")
    tight = [k for k, r in enumerate(m.rows) if r.value(x) == r.rhs]
    integral = all(v.denominator == 1 for v in x)
    if audit and n and all(v.denominator != 1 for v in x):
        AUDIT["fractional_points"] += 1
        if tight_rank(m, x, tight) != n:
            raise AssertionError("all-fractional extreme point without full tight rank")
        AUDIT["rank_ok"] += 1
    return ExtremePoint(x, tight, obj, integral)


# ---------------------------------------------------------------------------
# integer programming
# ---------------------------------------------------------------------------

@dataclass
class IlpResult:
    status: str
    assignment: list | None
    objective: Fraction | None
    node_count: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _fixed_model(m: LinearModel, fixed: Mapping[int, int]) -> tuple[LinearModel, list[int]]:
    """Substitute fixed binaries; returns the reduced model and its free-variable list."""
    free = [j for j in range(m.num_vars) if j not in fixed]
    pos = {j: k for k, j in enumerate(free)}
    rows = []
    for r in m.rows:
        shift = sum((c for j, c in r.coeffs.items() if fixed.get(j) == 1), Fraction(0))
        coeffs = {pos[j]: c for j, c in r.coeffs.items() if j in pos}
        rows.append(Row(coeffs, r.rel, r.rhs - shift, r.name))
    obj = {pos[j]: c for j, c in m.objective.items() if j in pos}
    return LinearModel(len(free), rows, [m.ub[j] for j in free], obj, m.sense), free


def _trivially_infeasible(m: LinearModel) -> bool:
    for r in m.rows:
        if not r.coeffs:
            if not r.holds([]):
                return True
    return False


def solve_ilp(m: LinearModel, warm: Sequence[int] | None = None, node_budget: int = 200000,
              backend: str = "exact") -> IlpResult:
    """Optimal 0/1 assignment (every variable must have ub 1)."""
    if any(u != 1 for u in m.ub):
        raise ValueError("solve_ilp requires binary variables (ub = 1)")
    if backend == "highs":
        return _solve_highs(m)
    if backend != "exact":
        raise ValueError(f"unknown backend {backend!r}")
    sign = 1 if m.sense == "max" else -1

    best_x, best_val = None, None
    if warm is not None:
        w = [Fraction(int(v)) for v in warm]
        if len(w) == m.num_vars and m.is_feasible(w):
            best_x, best_val = [int(v) for v in warm], sign * m.objective_value(w)

    open_nodes = [({}, None)]
    nodes = 0
    restart_every = 10 ** 4
    while open_nodes:
        if nodes and nodes % restart_every == 0:
            k = max(range(len(open_nodes)),
                    key=lambda i: (open_nodes[i][1] if open_nodes[i][1] is not None else math.inf))
            fixed, _ = open_nodes.pop(k)
        else:
            fixed, _ = open_nodes.pop()
        nodes += 1
        if nodes > node_budget:
            return IlpResult(BUDGET, best_x, None if best_val is None else sign * best_val, nodes)
        sub, free = _fixed_model(m, fixed)
        if _trivially_infeasible(sub):
            continue
        const = sum((c for j, c in m.objective.items() if fixed.get(j) == 1), Fraction(0))
        if sub.num_vars == 0:
            val = sign * const
            if best_val is None or val > best_val:
                best_x = [fixed[j] for j in range(m.num_vars)]
                best_val = val
            continue
        try:
            ep = solve_lp_extreme(sub, audit=False)
        except InfeasibleModel:
            continue
        bound = sign * (ep.objective + const)
        if best_val is not None and bound <= best_val:
            continue
        frac = [(abs(v - Fraction(1, 2)), free[k]) for k, v in enumerate(ep.values) if v.denominator != 1]
        if not frac:
            x = [0] * m.num_vars
            for j, v in fixed.items():
                x[j] = v
            for k, v in enumerate(ep.values):
                x[free[k]] = int(v)
            best_x, best_val = x, bound
            continue
        _, j = min(frac)
        # depth-first: the x_j = 1 child is explored first
        open_nodes.append(({**fixed, j: 0}, bound))
        open_nodes.append(({**fixed, j: 1}, bound))
    if best_x is None:
        return IlpResult(INFEASIBLE, None, None, nodes)
    return IlpResult(OPTIMAL, best_x, sign * best_val, nodes)


def _solve_highs(m: LinearModel) -> IlpResult:
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    n = m.num_vars
    if n == 0:
        ok = all(r.holds([]) for r in m.rows)
        return IlpResult(OPTIMAL if ok else INFEASIBLE, [] if ok else None,
                         Fraction(0) if ok else None, 0)
    sign = 1 if m.sense == "max" else -1
    c = np.zeros(n)
    for j, v in m.objective.items():
        c[j] = -sign * float(v)
    ri, ci, vals, lo, hi = [], [], [], [], []
    for k, r in enumerate(m.rows):
        for j, v in r.coeffs.items():
            ri.append(k)
            ci.append(j)
            vals.append(float(v))
        rhs = float(r.rhs)
        lo.append(rhs if r.rel in (GE, EQ) else -np.inf)
        hi.append(rhs if r.rel in (LE, EQ) else np.inf)
    constraints = []
    if m.rows:
        A = coo_matrix((vals, (ri, ci)), shape=(len(m.rows), n)).tocsr()
        constraints.append(LinearConstraint(A, np.array(lo), np.array(hi)))
    res = milp(c, integrality=np.ones(n), bounds=Bounds(0, 1), constraints=constraints,
               options={"mip_rel_gap": 0, "presolve": True})
    if res.status == 2:
        return IlpResult(INFEASIBLE, None, None, 0)
    if res.x is None:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    x = [int(round(v)) for v in res.x]
    fx = [Fraction(v) for v in x]
    if not m.is_feasible(fx):
        raise AssertionError("HiGHS solution fails exact feasibility check")
    return IlpResult(OPTIMAL, x, m.objective_value(fx), int(getattr(res, "mip_node_count", 0) or 0))


def solve_lexicographic(m: LinearModel, stages: Sequence[Mapping[int, object]],
                        senses: Sequence[str] | None = None, warm=None, node_budget: int = 200000,
                        backend: str = "exact") -> tuple[IlpResult, list[Fraction]]:
    """Solve ``stages`` in order, fixing each attained value by an equality row.

    Returns the final result and the list of stage values.
    """
    if not stages:
        raise ValueError("at least one stage is required")
    senses = list(senses) if senses is not None else ["max"] * len(stages)
    cur = m.copy()
    values = []
    res = None
    for k, (obj, sense) in enumerate(zip(stages, senses)):
        model = cur.with_objective(obj, sense)
        res = solve_ilp(model, warm=warm, node_budget=node_budget, backend=backend)
        if not res.optimal:
            return res, values
        values.append(res.objective)
        cur = add_cut(cur, (dict(obj), EQ, res.objective, f"stage{k + 1}"))
        warm = res.assignment
    return res, values
