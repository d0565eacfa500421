"""Scarf system construction, complementary pivoting and fractional exchanges.

Rows are the player vertices; a column is a coalition together with one
representative exchange per utility vector the coalition can reach.  The
pivoting keeps a feasible basis of ``[I | Q] x = 1`` and an ordinal basis
of the utility-rank matrix, alternating until the two coincide.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exactlp
from .cyclegen import Exchange, canonical, enumerate_cycles
from .economy import PartitionEconomy, restrict_to
from .errors import CapacityViolation, EmptyColumnSpace, InstanceTooLarge, PivotBudgetExceeded

MAX_VERTICES = 16
MAX_ORGS = 4


@dataclass(frozen=True)
class ScarfColumn:
    coalition: tuple[int, ...]
    exchange: Exchange
    utilities: dict  # org -> utility, members of the coalition only


@dataclass
class ScarfSystem:
    economy: PartitionEconomy
    delta: int
    rows: list[int]            # vertex ids
    columns: list[ScarfColumn]
    Q: np.ndarray              # 0/1, rows x columns
    rank: np.ndarray           # utility ranks over [slacks | columns], larger = better

    @property
    def shape(self):
        return self.Q.shape

    def prefers(self, row: int, j: int, k: int) -> bool:
        """True when column ``j`` is strictly preferred to ``k`` in ``row`` (both must cover it)."""
        return _pref_key(self, row, j) > _pref_key(self, row, k)

    def dump(self) -> str:
        lines = [f"rows {len(self.rows)} columns {len(self.columns)} delta {self.delta}"]
        for k, col in enumerate(self.columns):
            lines.append(f"col {k}: P={list(col.coalition)} u={col.utilities} E={col.exchange.to_json()}")
        lines.append("Q | q")
        for r, v in enumerate(self.rows):
            lines.append(f"v{v:<4d} " + " ".join(str(int(a)) for a in self.Q[r]) + " | 1")
        lines.append("prefs (best first)")
        for r, v in enumerate(self.rows):
            sup = [k for k in range(len(self.columns)) if self.Q[r, k]]
            sup.sort(key=lambda k: _pref_key(self, r, k), reverse=True)
            lines.append(f"v{v:<4d} " + " > ".join(map(str, sup)))
        return "\n".join(lines) + "\n"


def _pref_key(sys: ScarfSystem, row: int, k: int):
    col = sys.columns[k]
    org = sys.economy[sys.rows[row]].org
    return (col.utilities.get(org, 0), -len(col.coalition), -k)


def _coalition_vectors(e: PartitionEconomy, S: tuple[int, ...], delta: int):
    """Map utility vector (ordered as ``S``) -> lexicographically smallest exchange."""
    sub = restrict_to(e, [v for i in S for v in e.members(i)])
    cycles = [c.verts for c in enumerate_cycles(sub, delta)]
    ids = sorted(sub.ids)
    bit = {v: 1 << k for k, v in enumerate(ids)}
    pos = {i: k for k, i in enumerate(S)}
    by_low: dict[int, list] = {}
    for c in cycles:
        mask = 0
        gain = [0] * len(S)
        for v in c:
            mask |= bit[v]
            if not e[v].is_altruist:
                gain[pos[e[v].org]] += 1
        by_low.setdefault(min(c), []).append((c, mask, tuple(gain)))
    memo: dict[int, dict] = {}

    def best(free: int) -> dict:
        if free in memo:
            return memo[free]
        if not free:
            out = {tuple([0] * len(S)): ()}
        else:
            low = (free & -free).bit_length() - 1
            v = ids[low]
            out = dict(best(free & ~bit[v]))
            for c, mask, gain in by_low.get(v, ()):
                if mask & free == mask:
                    for u, enc in best(free & ~mask).items():
                        key = tuple(a + b for a, b in zip(u, gain))
                        cand = (c,) + enc
                        if key not in out or cand < out[key]:
                            out[key] = cand
        memo[free] = out
        return out

    return best((1 << len(ids)) - 1)


def build_scarf_system(e: PartitionEconomy, delta: int | None = None, max_coalition_card: int | None = None,
                       max_vertices: int = MAX_VERTICES, max_orgs: int = MAX_ORGS) -> ScarfSystem:
    """Rows are player vertices; columns are (coalition, exchange) pairs, one per
    attainable non-zero utility vector.  ``max_coalition_card`` limits coalition
    size (``None`` keeps all, which the core argument needs)."""
    delta = e.delta if delta is None else delta
    rows = list(e.player_ids())
    if len(rows) > max_vertices or e.n_orgs > max_orgs:
        raise InstanceTooLarge(f"{len(rows)} vertices / {e.n_orgs} orgs exceed the Scarf guard "
                               f"({max_vertices} / {max_orgs})")
    columns = []
    orgs = list(e.orgs)
    top = len(orgs) if max_coalition_card is None else min(max_coalition_card, len(orgs))
    for size in range(1, top + 1):
        for S in itertools.combinations(orgs, size):
            for u, enc in sorted(_coalition_vectors(e, S, delta).items()):
                if not enc:
                    continue
                columns.append(ScarfColumn(S, Exchange(enc), dict(zip(S, u))))
    if not columns:
        raise EmptyColumnSpace("no coalition can form any exchange")
    rpos = {v: r for r, v in enumerate(rows)}
    m, N = len(rows), len(columns)
    Q = np.zeros((m, N), dtype=np.int64)
    for k, col in enumerate(columns):
        for v in col.exchange.vertices:
            Q[rpos[v], k] = 1
    sys = ScarfSystem(e, delta, rows, columns, Q, np.zeros((m, m + N), dtype=np.int64))
    # rank row r: own slack lowest, then covering columns worst..best,
    # then non-covering columns, then the other slacks
    for r in range(m):
        sup = [k for k in range(N) if Q[r, k]]
        sup.sort(key=lambda k: _pref_key(sys, r, k))
        order = [r] + [m + k for k in sup] + [m + k for k in range(N) if not Q[r, k]] \
            + [s for s in range(m) if s != r]
        sys.rank[r, order] = np.arange(m + N)
    return sys


# ---------------------------------------------------------------------------
# pivoting
# ---------------------------------------------------------------------------

def _column(sys: ScarfSystem, j: int) -> list[Fraction]:
    m = len(sys.rows)
    if j < m:
        return [Fraction(int(r == j)) for r in range(m)]
    return [Fraction(int(a)) for a in sys.Q[:, j - m]]


def _cardinal_pivot(sys, basis, binv, xb, enter):
    """Bring ``enter`` into the feasible basis (lexicographic ratio test); return the leaving column."""
    m = len(basis)
    a = _column(sys, enter)
    d = [sum((binv[i][k] * a[k] for k in range(m) if a[k]), Fraction(0)) for i in range(m)]
    best_row, best_vec = None, None
    for i in range(m):
        if d[i] > 0:
            vec = [xb[i] / d[i]] + [binv[i][k] / d[i] for k in range(m)]
            if best_vec is None or vec < best_vec:
                best_row, best_vec = i, vec
    if best_row is None:
        raise AssertionError("entering column has no positive entry; system is unbounded")
    t = best_row
    piv = d[t]
    binv[t] = [v / piv for v in binv[t]]
    xb[t] = xb[t] / piv
    for i in range(m):
        if i != t and d[i]:
            f = d[i]
            binv[i] = [v - f * w for v, w in zip(binv[i], binv[t])]
            xb[i] = xb[i] - f * xb[t]
    leave = basis[t]
    basis[t] = enter
    return leave


def _ordinal_pivot(rank: np.ndarray, K: list[int], r: int) -> int:
    """Replace ``r`` in the ordinal basis ``K``; return the entering column."""
    rest = [k for k in K if k != r]
    sub = rank[:, rest]
    argmins = sub.argmin(axis=1)
    umin = sub.min(axis=1)
    old = rank[:, K].argmin(axis=1)
    i_r = int(np.flatnonzero(np.asarray(K)[old] == r)[0])
    j_s = rest[int(argmins[i_r])]
    rows_of_js = [i for i in range(rank.shape[0]) if rest[int(argmins[i])] == j_s]
    i_s = next(i for i in rows_of_js if i != i_r)
    others = np.ones(rank.shape[0], dtype=bool)
    others[i_s] = False
    ok = (rank[others] > umin[others][:, None]).all(axis=0)
    ok[rest] = False
    cand = np.flatnonzero(ok)
    if not len(cand):
        raise AssertionError("ordinal pivot found no entering column")
    return int(cand[np.argmax(rank[i_s, cand])])


@dataclass
class ScarfResult:
    x: list[Fraction]          # one value per real column
    basis: list[int]
    pivots: int


def scarf_pivot(sys: ScarfSystem, max_pivots: int = 1_000_000) -> ScarfResult:
    m, N = sys.Q.shape
    basis = list(range(m))
    binv = [[Fraction(int(i == k)) for k in range(m)] for i in range(m)]
    xb = [Fraction(1)] * m
    first = m + int(np.argmax(sys.rank[0, m:]))
    K = list(range(1, m)) + [first]
    enter = first
    pivots = 0
    while True:
        pivots += 1
        if pivots > max_pivots:
            raise PivotBudgetExceeded(f"more than {max_pivots} pivots")
        leave = _cardinal_pivot(sys, basis, binv, xb, enter)
        if leave == 0:
            break
        enter = _ordinal_pivot(sys.rank, K, leave)
        K[K.index(leave)] = enter
        if enter == 0:
            break
    if sorted(K) != sorted(basis):
        raise AssertionError("terminal cardinal and ordinal bases differ")
    x = [Fraction(0)] * N
    for i, b in enumerate(basis):
        if b >= m:
            x[b - m] = xb[i]
    return ScarfResult(x, sorted(basis), pivots)


def check_domination(sys: ScarfSystem, x) -> list[int]:
    """Columns *not* dominated by ``x`` (empty list means ``x`` is a valid certificate).

    Also raises if ``x`` is infeasible.
    """
    m, N = sys.Q.shape
    x = [Fraction(v) for v in x]
    if any(v < 0 for v in x):
        raise CapacityViolation("negative column weight")
    load = [sum((x[k] for k in range(N) if sys.Q[r, k]), Fraction(0)) for r in range(m)]
    if any(l > 1 for l in load):
        raise CapacityViolation("row load exceeds 1")
    failures = []
    for j in range(N):
        dominated = False
        for r in range(m):
            if not sys.Q[r, j] or load[r] != 1:
                continue
            org = sys.economy[sys.rows[r]].org
            uj = sys.columns[j].utilities.get(org, 0)
            ok = True
            for k in range(N):
                if k == j or not sys.Q[r, k] or x[k] == 0:
                    continue
                ck = sys.columns[k]
                uk = ck.utilities.get(org, 0)
                better = (uk, -len(ck.coalition), -k) > (uj, -len(sys.columns[j].coalition), -j)
                if not better:
                    ok = False
                    break
            if ok:
                dominated = True
                break
        if not dominated:
            failures.append(j)
    return failures


def is_extreme(sys: ScarfSystem, x) -> bool:
    m, N = sys.Q.shape
    model = exactlp.LinearModel(N, ub=[None] * N)
    for r in range(m):
        model.add_row({k: 1 for k in range(N) if sys.Q[r, k]}, exactlp.LE, 1)
    tight = [r for r, row in enumerate(model.rows) if row.value(x) == row.rhs]
    return exactlp.tight_rank(model, x, tight) == N


# ---------------------------------------------------------------------------
# fractional exchange
# ---------------------------------------------------------------------------

@dataclass
class FractionalExchange:
    economy: PartitionEconomy
    y: dict            # canonical cycle tuple -> Fraction (non-zero entries only)
    targets: dict      # org -> int

    def load(self, v: int) -> Fraction:
        return sum((w for c, w in self.y.items() if v in c), Fraction(0))

    def org_mass(self, org: int) -> Fraction:
        e = self.economy
        return sum((w * sum(1 for v in c if e[v].org == org and not e[v].is_altruist)
                    for c, w in self.y.items()), Fraction(0))

    def to_json(self) -> dict:
        return {"y": [{"cycle": list(c), "weight": str(w)} for c, w in sorted(self.y.items())],
                "targets": {str(i): b for i, b in sorted(self.targets.items())}}


def make_fractional_exchange(e: PartitionEconomy, y: dict) -> FractionalExchange:
    y = {canonical(c): Fraction(w) for c, w in y.items() if w}
    fe = FractionalExchange(e, y, {})
    for v in e.ids:
        if fe.load(v) > 1:
            raise CapacityViolation(f"vertex {v} carries weight {fe.load(v)} > 1")
    fe.targets = {i: int(fe.org_mass(i) // 1) for i in e.orgs}
    return fe


def extract_fractional_exchange(sys: ScarfSystem, x) -> FractionalExchange:
    y: dict[tuple[int, ...], Fraction] = {}
    for k, w in enumerate(x):
        if w:
            for c in sys.columns[k].exchange.cycles:
                y[c] = y.get(c, Fraction(0)) + Fraction(w)
    return make_fractional_exchange(sys.economy, y)


def scarf_fractional_exchange(e: PartitionEconomy, delta: int | None = None, **guard):
    """Build, pivot, verify domination and return ``(system, result, y*)``."""
    sys = build_scarf_system(e, delta, None, **guard)
    res = scarf_pivot(sys)
    bad = check_domination(sys, res.x)
    if bad:
        raise AssertionError(f"pivot output leaves columns {bad[:5]} undominated")
    return sys, res, extract_fractional_exchange(sys, res.x)
