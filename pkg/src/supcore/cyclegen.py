"""Bounded-length cycle enumeration and per-cycle statistics.

The enumeration kernel is compiled (``_cycles_ext``) when the extension has
been built and falls back to ``_cycles_py`` otherwise.  Set
``SUPCORE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .economy import PartitionEconomy
from .errors import OverlappingCycles

if os.environ.get("SUPCORE_PURE_PYTHON"):
    from ._cycles_py import enumerate_raw
    KERNEL = "python"
else:
    try:
        from ._cycles_ext import enumerate_raw
        KERNEL = "compiled"
    except ImportError:  # extension not built
        from ._cycles_py import enumerate_raw
        KERNEL = "python"

INF = float("inf")


def canonical(verts: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cycle so its smallest vertex id comes first."""
    k = min(range(len(verts)), key=verts.__getitem__)
    return tuple(verts[k:]) + tuple(verts[:k])


@dataclass(frozen=True, eq=True)
class Cycle:
    verts: tuple[int, ...]
    gamma: dict  # org -> number of that org's non-altruist vertices on the cycle
    altruist_count: int
    same_blood_edges: int
    hardness: Fraction

    @property
    def length(self) -> int:
        return len(self.verts)

    @property
    def real_count(self) -> int:
        return self.length - self.altruist_count

    def gamma_of(self, org: int) -> int:
        return self.gamma.get(org, 0)

    def __hash__(self):
        return hash(self.verts)


def hardness_of(e: PartitionEconomy, v: int) -> Fraction | float:
    """``1 / in-degree``; vertices without in-arcs get ``+inf``."""
    deg = e.in_degree(v)
    return Fraction(1, deg) if deg else INF


def cycle_stats(e: PartitionEconomy, verts: Sequence[int]) -> Cycle:
    verts = canonical(verts)
    gamma: dict[int, int] = {}
    n_alt = 0
    same = 0
    for k, u in enumerate(verts):
        vu = e[u]
        if vu.is_altruist:
            n_alt += 1
        else:
            gamma[vu.org] = gamma.get(vu.org, 0) + 1
        w = e[verts[(k + 1) % len(verts)]]
        if vu.donor_blood is not None and w.patient_blood is not None \
                and vu.donor_blood == w.patient_blood:
            same += 1
    hard = max(Fraction(1, e.in_degree(u)) for u in verts)
    return Cycle(verts, gamma, n_alt, same, hard)


class CycleSet:
    """Immutable cycle database for one economy."""

    def __init__(self, economy: PartitionEconomy, cycles: Sequence[Cycle]):
        self.economy = economy
        self.cycles = list(cycles)
        index: dict[int, list[int]] = {}
        for k, c in enumerate(self.cycles):
            for v in c.verts:
                index.setdefault(v, []).append(k)
        self.vertex_index = index
        self._pos = {c.verts: k for k, c in enumerate(self.cycles)}
        self._arrays = None

    def __len__(self):
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def __getitem__(self, k) -> Cycle:
        return self.cycles[k]

    def position(self, verts: Sequence[int]) -> int:
        return self._pos[canonical(verts)]

    def arrays(self):
        """Dense numpy views used to build models quickly.

        Returns a dict with ``gamma`` (cycles x (n_orgs+1)), ``length``,
        ``altruists``, ``real``, ``same_blood``, ``hardness`` (float),
        ``platform`` (count of org-0 vertices) and ``orgmask`` (bitmask of
        the organizations a cycle touches, bit 0 = platform).
        """
        if self._arrays is None:
            e = self.economy
            m = len(self.cycles)
            gamma = np.zeros((m, e.n_orgs + 1), dtype=np.int64)
            platform = np.zeros(m, dtype=np.int64)
            orgmask = np.zeros(m, dtype=np.int64)
            for k, c in enumerate(self.cycles):
                for org, cnt in c.gamma.items():
                    gamma[k, org] = cnt
                mask = 0
                for v in c.verts:
                    o = e[v].org
                    mask |= 1 << o
                    if o == 0:
                        platform[k] += 1
                orgmask[k] = mask
            self._arrays = {
                "gamma": gamma,
                "length": np.array([c.length for c in self.cycles], dtype=np.int64),
                "altruists": np.array([c.altruist_count for c in self.cycles], dtype=np.int64),
                "real": np.array([c.real_count for c in self.cycles], dtype=np.int64),
                "same_blood": np.array([c.same_blood_edges for c in self.cycles], dtype=np.int64),
                "hardness": np.array([float(c.hardness) for c in self.cycles]),
                "platform": platform,
                "orgmask": orgmask,
            }
        return self._arrays

    def internal_to(self, orgs: Iterable[int]) -> np.ndarray:
        """Indices of cycles whose every vertex belongs to one of ``orgs``."""
        mask = 0
        for o in orgs:
            mask |= 1 << o
        om = self.arrays()["orgmask"]
        return np.flatnonzero((om & ~mask) == 0)

    def to_csv(self, path) -> None:
        n_orgs = self.economy.n_orgs
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["cycle_id", "verts", "length", "altruists", "same_blood", "hardness"]
                       + [f"gamma_org_{k}" for k in range(1, n_orgs + 1)])
            for k, c in enumerate(self.cycles):
                w.writerow([k, " ".join(map(str, c.verts)), c.length, c.altruist_count,
                            c.same_blood_edges, str(c.hardness)]
                           + [c.gamma_of(o) for o in range(1, n_orgs + 1)])


def _csr(e: PartitionEconomy, ids: Sequence[int]):
    pos = {v: k for k, v in enumerate(ids)}
    indptr = [0]
    indices = []
    for v in ids:
        succ = sorted(pos[w] for w in e.successors(v) if w in pos)
        indices.extend(succ)
        indptr.append(len(indices))
    return np.array(indptr, dtype=np.int64), np.array(indices, dtype=np.int64)


def enumerate_cycles(e: PartitionEconomy, delta: int | None = None,
                     vertices: Iterable[int] | None = None) -> CycleSet:
    """Every simple directed cycle of length ``<= delta``, once up to rotation.

    ``vertices`` restricts the search to an induced subgraph.
    """
    delta = e.delta if delta is None else delta
    if delta < 2:
        raise ValueError("delta must be >= 2")
    ids = sorted(e.ids if vertices is None else set(vertices))
    indptr, indices = _csr(e, ids)
    raw = enumerate_raw(len(ids), indptr, indices, delta)
    cycles = [cycle_stats(e, [ids[k] for k in r]) for r in raw]
    cycles.sort(key=lambda c: (len(c.verts), c.verts))
    return CycleSet(e, cycles)


# ---------------------------------------------------------------------------
# exchanges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Exchange:
    """A set of vertex-disjoint cycles, stored as canonical vertex tuples."""

    cycles: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cycles",
                           tuple(sorted(canonical(tuple(c)) for c in self.cycles)))

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for c in self.cycles for v in c)

    def __len__(self):
        return len(self.cycles)

    def to_json(self) -> list[list[int]]:
        return [list(c) for c in self.cycles]


def check_exchange(ex: Exchange, e: PartitionEconomy, delta: int | None = None) -> None:
    delta = e.delta if delta is None else delta
    seen: set[int] = set()
    for c in ex.cycles:
        if len(c) > delta:
            raise ValueError(f"cycle {c} longer than delta={delta}")
        for k, v in enumerate(c):
            if v in seen:
                raise OverlappingCycles(f"vertex {v} covered twice")
            seen.add(v)
            if v not in e:
                raise ValueError(f"cycle {c} uses unknown vertex {v}")
            if not e.has_arc(v, c[(k + 1) % len(c)]):
                raise ValueError(f"cycle {c} uses missing arc ({v}, {c[(k + 1) % len(c)]})")


def utilities(ex: Exchange, e: PartitionEconomy) -> dict[int, int]:
    """Covered non-altruist vertices per organization ``1..n``."""
    covered: set[int] = set()
    for c in ex.cycles:
        for v in c:
            if v in covered:
                raise OverlappingCycles(f"vertex {v} covered twice")
            covered.add(v)
    u = {i: 0 for i in e.orgs}
    for v in covered:
        vert = e[v]
        if not vert.is_altruist and vert.org != 0:
            u[vert.org] += 1
    return u


def mutual_graph(e: PartitionEconomy) -> nx.Graph:
    """Undirected graph of mutual compatibilities (the pairwise substrate)."""
    g = nx.Graph()
    g.add_nodes_from(e.ids)
    for u in e.ids:
        for w in e.successors(u):
            if u < w and e.has_arc(w, u):
                g.add_edge(u, w)
    return g
