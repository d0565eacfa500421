"""Coalition optima, blocking detection and the stabilization loops.

All models are 0/1 cycle-packing programs over a :class:`CycleSet`.  The
default backend is HiGHS with an exact integer re-check of every returned
assignment; ``backend="exact"`` routes through the rational
branch-and-bound of :mod:`supcore.exactlp` instead.
"""
from __future__ import annotations

import enum
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from . import exactlp
from .cyclegen import CycleSet, Exchange, enumerate_cycles, utilities
from .economy import PartitionEconomy, restrict_to

CERTIFIED = "certified"
POOL_EXHAUSTED = "pool_exhausted"
TU_UNREACHABLE = "tu_core_unreachable"
TIMEOUT = "timeout"


class CoreMode(enum.Enum):
    WEAK = "weak"
    STRONG = "strong"
    TU = "tu"

    @classmethod
    def parse(cls, value) -> "CoreMode":
        return value if isinstance(value, cls) else cls(str(value).lower())


@dataclass(frozen=True)
class BlockingWitness:
    coalition: tuple[int, ...]
    deviation: Exchange
    mode: CoreMode
    deviation_utilities: dict
    current_utilities: dict


@dataclass
class StabilizeReport:
    exchange: Exchange
    mode: str
    core_status: str
    altruists_used: int = 0
    altruist_ids: list = field(default_factory=list)
    altruists_added: int = 0
    cuts_added: int = 0
    iterations: int = 0
    stage_values: list = field(default_factory=list)
    heuristic_incomplete: bool = False
    max_coal_size: int = 4
    binding_coalitions: list = field(default_factory=list)

    @property
    def core_certified(self) -> bool:
        return self.core_status == CERTIFIED

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "core_status": self.core_status,
            "exchange": self.exchange.to_json(),
            "altruists_used": self.altruists_used,
            "altruist_ids": list(self.altruist_ids),
            "altruists_added": self.altruists_added,
            "cuts_added": self.cuts_added,
            "iterations": self.iterations,
            "stage_values": [str(v) for v in self.stage_values],
            "heuristic_incomplete": self.heuristic_incomplete,
            "max_coal_size": self.max_coal_size,
        }


class DeadlineExceeded(TimeoutError):
    pass


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise DeadlineExceeded("per-run time budget exhausted")


# ---------------------------------------------------------------------------
# packing models
# ---------------------------------------------------------------------------

class PackingModel:
    """Vertex-disjoint selection of cycles ``cs[idx]`` plus extra integer rows."""

    def __init__(self, cs: CycleSet, idx: Sequence[int]):
        self.cs = cs
        self.idx = np.asarray(idx, dtype=np.int64)
        vpos: dict[int, int] = {}
        ri, ci = [], []
        for k, c in enumerate(self.idx):
            for v in cs[int(c)].verts:
                ri.append(vpos.setdefault(v, len(vpos)))
                ci.append(k)
        self.vertex_rows = sparse.csr_matrix(
            (np.ones(len(ri), dtype=np.int64), (ri, ci)), shape=(len(vpos), len(self.idx)))
        self.extra: list[tuple[np.ndarray, str, int]] = []

    @property
    def num_vars(self) -> int:
        return len(self.idx)

    def column(self, name: str) -> np.ndarray:
        return self.cs.arrays()[name][self.idx]

    def gamma_sum(self, orgs: Iterable[int]) -> np.ndarray:
        g = self.cs.arrays()["gamma"]
        orgs = list(orgs)
        if not orgs:
            return np.zeros(self.num_vars, dtype=np.int64)
        return g[np.ix_(self.idx, orgs)].sum(axis=1)

    def add_row(self, coef, rel: str, rhs) -> None:
        self.extra.append((np.asarray(coef, dtype=np.int64), rel, int(rhs)))

    def feasible(self, x: np.ndarray) -> bool:
        if self.vertex_rows.shape[0] and (self.vertex_rows @ x).max(initial=0) > 1:
            return False
        for coef, rel, rhs in self.extra:
            lhs = int(coef @ x)
            if (rel == exactlp.LE and lhs > rhs) or (rel == exactlp.GE and lhs < rhs) \
                    or (rel == exactlp.EQ and lhs != rhs):
                return False
        return True

    def to_linear_model(self, objective, sense="max") -> exactlp.LinearModel:
        m = exactlp.LinearModel(self.num_vars)
        csr = self.vertex_rows
        for r in range(csr.shape[0]):
            cols = csr.indices[csr.indptr[r]:csr.indptr[r + 1]]
            if len(cols) > 1:
                m.add_row({int(j): 1 for j in cols}, exactlp.LE, 1)
        for coef, rel, rhs in self.extra:
            m.add_row({j: int(c) for j, c in enumerate(coef) if c}, rel, rhs)
        m.objective = {j: exactlp._frac(c) for j, c in enumerate(objective) if c}
        m.sense = sense
        return m

    def solve(self, objective, sense: str = "max", backend: str = "highs", warm=None):
        """Return the 0/1 vector (numpy int64) of an optimal selection, or ``None``."""
        n = self.num_vars
        if backend == "exact":
            res = exactlp.solve_ilp(self.to_linear_model(objective, sense), warm=warm)
            if res.status == exactlp.BUDGET:
                raise RuntimeError("exact branch-and-bound node budget exhausted")
            if not res.optimal:
                return None
            return np.asarray(res.assignment, dtype=np.int64)
        if n == 0:
            x = np.zeros(0, dtype=np.int64)
            return x if self.feasible(x) else None
        c = -np.asarray([float(v) for v in objective]) if sense == "max" \
            else np.asarray([float(v) for v in objective])
        cons = []
        if self.vertex_rows.shape[0]:
            cons.append(LinearConstraint(self.vertex_rows.astype(float), -np.inf, 1.0))
        if self.extra:
            A = np.vstack([coef for coef, _, _ in self.extra]).astype(float)
            lo = np.array([rhs if rel in (exactlp.GE, exactlp.EQ) else -np.inf
                           for _, rel, rhs in self.extra], dtype=float)
            hi = np.array([rhs if rel in (exactlp.LE, exactlp.EQ) else np.inf
                           for _, rel, rhs in self.extra], dtype=float)
            cons.append(LinearConstraint(A, lo, hi))
        res = milp(c, integrality=np.ones(n), bounds=Bounds(0, 1), constraints=cons,
                   options={"mip_rel_gap": 0})
        if res.status == 2:
            return None
        if res.x is None:
            raise RuntimeError(f"HiGHS failed: {res.message}")
        x = np.rint(res.x).astype(np.int64)
        if not self.feasible(x):
            raise AssertionError("HiGHS assignment fails the exact feasibility re-check")
        return x

    def exchange(self, x: np.ndarray) -> Exchange:
        return Exchange(tuple(self.cs[int(self.idx[k])].verts for k in np.flatnonzero(x)))


# ---------------------------------------------------------------------------
# coalition oracle and blocking detection
# ---------------------------------------------------------------------------

class CoalitionOracle:
    """Caches ``opt_S`` for a fixed cycle database (platform vertices never count)."""

    def __init__(self, cs: CycleSet, backend: str = "highs"):
        self.cs = cs
        self.backend = backend
        self._opt: dict[tuple[int, ...], int] = {}

    def opt(self, S: Iterable[int]) -> int:
        key = tuple(sorted(S))
        if key not in self._opt:
            pm = PackingModel(self.cs, self.cs.internal_to(key))
            obj = pm.gamma_sum(key)
            x = pm.solve(obj, backend=self.backend)
            self._opt[key] = int(obj @ x)
        return self._opt[key]


def coalition_optimum(e: PartitionEconomy, S: Iterable[int], delta: int | None = None,
                      cycles: CycleSet | None = None, backend: str = "highs") -> int:
    """Most ``U^S`` vertices coverable inside ``G[V^S]`` (platform excluded)."""
    S = tuple(sorted(set(S)))
    for i in S:
        if i not in e.orgs:
            from .errors import UnknownOrg
            raise UnknownOrg(f"unknown organization {i}")
    if cycles is None:
        sub = restrict_to(e, [v for i in S for v in e.members(i)])
        cycles = enumerate_cycles(sub, delta)
    return CoalitionOracle(cycles, backend).opt(S)


def _coalitions(orgs: Sequence[int], cap: int):
    n = len(orgs)
    for size in range(1, min(cap, n) + 1):
        yield from itertools.combinations(orgs, size)
    if n == cap + 1:
        yield tuple(orgs)


def find_blocking_coalition(e: PartitionEconomy, ex: Exchange, mode, max_coal_size: int = 4,
                            cycles: CycleSet | None = None, backend: str = "highs",
                            oracle: CoalitionOracle | None = None, deadline=None):
    """First blocking coalition in (size, lexicographic) order, or ``None``.

    The grand coalition is also checked when ``n_orgs == max_coal_size + 1``.
    """
    mode = CoreMode.parse(mode)
    if cycles is None:
        cycles = oracle.cs if oracle is not None else enumerate_cycles(e)
    if oracle is None:
        oracle = CoalitionOracle(cycles, backend)
    u = utilities(ex, e)
    orgs = list(e.orgs)
    for S in _coalitions(orgs, max_coal_size):
        _check_deadline(deadline)
        base = sum(u[i] for i in S)
        if mode is CoreMode.WEAK:
            if any(u[i] + 1 > len(e.patients(i)) for i in S):
                continue
            need = base + len(S)
        else:
            need = base + 1
        if oracle.opt(S) < need:
            continue
        pm = PackingModel(cycles, cycles.internal_to(S))
        if mode is CoreMode.WEAK:
            for i in S:
                pm.add_row(pm.gamma_sum([i]), exactlp.GE, u[i] + 1)
        elif mode is CoreMode.STRONG:
            for i in S:
                pm.add_row(pm.gamma_sum([i]), exactlp.GE, u[i])
            pm.add_row(pm.gamma_sum(S), exactlp.GE, base + 1)
        else:
            pm.add_row(pm.gamma_sum(S), exactlp.GE, base + 1)
        x = pm.solve(pm.gamma_sum(S), backend=oracle.backend)
        if x is None:
            continue
        dev = pm.exchange(x)
        du = utilities(dev, e)
        return BlockingWitness(S, dev, mode, {i: du[i] for i in S}, {i: u[i] for i in S})
    return None


# ---------------------------------------------------------------------------
# stabilization loops
# ---------------------------------------------------------------------------

class _Workspace:
    """Shared state for the loops: full cycle database, pool order, active altruists."""

    def __init__(self, e: PartitionEconomy, altruist_pool, seed: int, backend: str,
                 cycles: CycleSet | None = None):
        self.e = e
        pool = list(e.platform) if altruist_pool is None else [int(a) for a in altruist_pool]
        for a in pool:
            if a not in e or e[a].org != 0:
                raise ValueError(f"pool altruist {a} is not a platform vertex of the economy")
        rng = np.random.default_rng(seed)
        self.order = [pool[k] for k in rng.permutation(len(pool))]
        self.players = list(e.player_ids())
        self.cs = cycles if cycles is not None else \
            enumerate_cycles(restrict_to(e, self.players + pool))
        self.backend = backend
        self.oracle = CoalitionOracle(self.cs, backend)
        self.active: list[int] = []
        # platform vertices of each cycle, for activity masks
        plat = set(pool)
        self._plat = [tuple(v for v in c.verts if v in plat) for c in self.cs]
        self.K = self.oracle.opt(tuple(e.orgs)) if e.n_orgs else 0

    @property
    def remaining(self) -> int:
        return len(self.order) - len(self.active)

    def add_altruist(self) -> int:
        a = self.order[len(self.active)]
        self.active.append(a)
        return a

    def active_idx(self) -> np.ndarray:
        act = set(self.active)
        return np.array([k for k, p in enumerate(self._plat) if all(v in act for v in p)],
                        dtype=np.int64)

    def economy(self) -> PartitionEconomy:
        return restrict_to(self.e, self.players + self.active)

    def used(self, ex: Exchange) -> list[int]:
        act = set(self.active)
        return sorted(v for v in ex.vertices if v in act)

    def blocking(self, ex: Exchange, mode, cap, deadline):
        return find_blocking_coalition(self.economy(), ex, mode, cap, cycles=self.cs,
                                       oracle=self.oracle, deadline=deadline)


def _report(ws: _Workspace, ex, mode, status, **kw) -> StabilizeReport:
    used = ws.used(ex)
    return StabilizeReport(ex, mode, status, altruists_used=len(used), altruist_ids=used,
                           altruists_added=len(ws.active), **kw)


def _cut_loop(e, mode: CoreMode, altruist_pool, max_coal_size, seed, backend, cycles,
              time_limit, max_iterations=100000) -> StabilizeReport:
    deadline = None if time_limit is None else time.monotonic() + time_limit
    ws = _Workspace(e, altruist_pool, seed, backend, cycles)
    cuts: list[tuple[tuple[int, ...], int]] = []
    best = Exchange()
    incomplete = False
    it = 0
    while it < max_iterations:
        it += 1
        _check_deadline(deadline)
        pm = PackingModel(ws.cs, ws.active_idx())
        pm.add_row(pm.column("real"), exactlp.GE, ws.K)
        for S, rhs in cuts:
            pm.add_row(pm.gamma_sum(S), exactlp.GE, rhs)
        weight = len(ws.order) + 1
        obj = pm.column("real") * weight - pm.column("platform")
        x = pm.solve(obj, backend=backend)
        if x is None:
            if ws.remaining == 0:
                return _report(ws, best, mode.value, POOL_EXHAUSTED, cuts_added=len(cuts),
                               iterations=it, heuristic_incomplete=True,
                               max_coal_size=max_coal_size)
            ws.add_altruist()
            incomplete = True
            continue
        ex = pm.exchange(x)
        best = ex
        w = ws.blocking(ex, mode, max_coal_size, deadline)
        if w is None:
            real = int(pm.column("real") @ x)
            return _report(ws, ex, mode.value, CERTIFIED, cuts_added=len(cuts), iterations=it,
                           stage_values=[Fraction(real)], heuristic_incomplete=incomplete,
                           max_coal_size=max_coal_size)
        cuts.append((w.coalition, sum(w.current_utilities.values()) + 1))
    raise RuntimeError("cut loop iteration limit reached")


def strong_core_heuristic(e: PartitionEconomy, altruist_pool=None, max_coal_size: int = 4,
                          seed: int = 0, backend: str = "highs", cycles=None,
                          time_limit: float | None = None) -> StabilizeReport:
    return _cut_loop(e, CoreMode.STRONG, altruist_pool, max_coal_size, seed, backend, cycles,
                     time_limit)


def weak_core_heuristic(e: PartitionEconomy, altruist_pool=None, max_coal_size: int = 4,
                        seed: int = 0, backend: str = "highs", cycles=None,
                        time_limit: float | None = None) -> StabilizeReport:
    return _cut_loop(e, CoreMode.WEAK, altruist_pool, max_coal_size, seed, backend, cycles,
                     time_limit)


def tu_core_solve(e: PartitionEconomy, altruist_pool=None, max_coal_size: int = 4,
                  pre_add_fraction: float = 0.05, seed: int = 0, backend: str = "highs",
                  cycles=None, time_limit: float | None = None) -> StabilizeReport:
    """Min-altruist packing that meets every coalition optimum up to the cap.

    If the pre-added altruists do not suffice, further pool altruists are
    added one at a time before giving up.
    """
    deadline = None if time_limit is None else time.monotonic() + time_limit
    ws = _Workspace(e, altruist_pool, seed, backend, cycles)
    n_pairs = len(ws.players)
    for _ in range(min(math.ceil(pre_add_fraction * n_pairs), ws.remaining)):
        ws.add_altruist()
    orgs = list(e.orgs)
    coalitions = list(_coalitions(orgs, max_coal_size))
    it = 0
    while True:
        it += 1
        _check_deadline(deadline)
        pm = PackingModel(ws.cs, ws.active_idx())
        pm.add_row(pm.column("real"), exactlp.GE, ws.K)
        for S in coalitions:
            pm.add_row(pm.gamma_sum(S), exactlp.GE, ws.oracle.opt(S))
        x = pm.solve(pm.column("platform"), sense="min", backend=backend)
        if x is not None:
            break
        if ws.remaining == 0:
            binding = [S for S in coalitions if ws.oracle.opt(S) > 0]
            return _report(ws, Exchange(), CoreMode.TU.value, TU_UNREACHABLE, iterations=it,
                           max_coal_size=max_coal_size, binding_coalitions=binding)
        ws.add_altruist()
    ex = pm.exchange(x)
    w = ws.blocking(ex, CoreMode.TU, max_coal_size, deadline)
    if w is not None:
        raise AssertionError(f"TU model output blocked by {w.coalition}")
    real = int(pm.column("real") @ x)
    return _report(ws, ex, CoreMode.TU.value, CERTIFIED, iterations=it,
                   stage_values=[Fraction(real)], max_coal_size=max_coal_size)


LEX_STAGES = ("real", "count", "same_blood", "hardness")


def _lex_solve(pm: PackingModel, backend: str):
    values = []
    x = None
    for k, name in enumerate(LEX_STAGES):
        if name == "count":
            obj = np.ones(pm.num_vars, dtype=np.int64)
        elif name == "hardness":
            obj = [pm.cs[int(j)].hardness for j in pm.idx]
        else:
            obj = pm.column(name)
        x = pm.solve(obj, backend=backend)
        if x is None:
            raise AssertionError("lexicographic stage became infeasible")
        if name == "hardness":
            values.append(sum((obj[j] for j in np.flatnonzero(x)), Fraction(0)))
        else:
            val = int(obj @ x)
            values.append(Fraction(val))
            pm.add_row(obj, exactlp.EQ, val)
    return x, values


def lex_then_stabilize(e: PartitionEconomy, altruist_pool=None, max_coal_size: int = 4,
                       seed: int = 0, backend: str = "highs", cycles=None,
                       time_limit: float | None = None) -> StabilizeReport:
    """Four-stage lexicographic packing, then add altruists until weak-core stable."""
    deadline = None if time_limit is None else time.monotonic() + time_limit
    ws = _Workspace(e, altruist_pool, seed, backend, cycles)
    it = 0
    while True:
        it += 1
        _check_deadline(deadline)
        pm = PackingModel(ws.cs, ws.active_idx())
        x, values = _lex_solve(pm, backend)
        ex = pm.exchange(x)
        w = ws.blocking(ex, CoreMode.WEAK, max_coal_size, deadline)
        if w is None:
            return _report(ws, ex, "lex", CERTIFIED, iterations=it, stage_values=values,
                           max_coal_size=max_coal_size)
        if ws.remaining == 0:
            return _report(ws, ex, "lex", POOL_EXHAUSTED, iterations=it, stage_values=values,
                           max_coal_size=max_coal_size)
        ws.add_altruist()


def stabilize(e: PartitionEconomy, mode: str, **kw) -> StabilizeReport:
    fn = {"weak": weak_core_heuristic, "strong": strong_core_heuristic,
          "tu": tu_core_solve, "lex": lex_then_stabilize}[mode]
    return fn(e, **kw)
