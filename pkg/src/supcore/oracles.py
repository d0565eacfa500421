"""Exhaustive ground truth for small economies.

Nothing here shares code with the ILP path beyond cycle enumeration: every
coalition's attainable utility vectors are listed by plain recursion.
"""
from __future__ import annotations

import itertools
from typing import Iterable

from .coreops import CoreMode
from .cyclegen import Exchange, check_exchange, enumerate_cycles, utilities
from .economy import PartitionEconomy, restrict_to
from .errors import InstanceTooLarge

DEFAULT_LIMIT = 12


def all_exchanges(e: PartitionEconomy, delta: int | None = None, maximal_only: bool = False):
    """Yield every exchange of ``e`` (including the empty one)."""
    cs = enumerate_cycles(e, delta)
    cycles = [c.verts for c in cs]
    by_min: dict[int, list[tuple[int, ...]]] = {}
    for c in cycles:
        by_min.setdefault(min(c), []).append(c)
    order = sorted(e.ids)

    def rec(k, used, chosen):
        if k == len(order):
            if maximal_only and any(not (set(c) & used) for c in cycles):
                return
            yield Exchange(tuple(chosen))
            return
        v = order[k]
        yield from rec(k + 1, used, chosen)
        for c in by_min.get(v, ()):
            if not (set(c) & used):
                yield from rec(k + 1, used | set(c), chosen + [c])

    yield from rec(0, frozenset(), [])


def _frontier(vectors: Iterable[tuple[int, ...]]) -> set[tuple[int, ...]]:
    vs = sorted(set(vectors), reverse=True)
    out = []
    for v in vs:
        if not any(all(a >= b for a, b in zip(w, v)) for w in out):
            out.append(v)
    return set(out)


def utility_frontier(e: PartitionEconomy, orgs: Iterable[int], delta: int | None = None):
    """Pareto frontier of utility vectors (ordered as ``sorted(orgs)``) inside ``G[V^orgs]``.

    Platform vertices are never available to a coalition.
    """
    orgs = sorted(orgs)
    sub = restrict_to(e, [v for i in orgs for v in e.members(i)])
    cycles = [c.verts for c in enumerate_cycles(sub, delta)]
    # components of the cycle hypergraph are independent
    parent = {v: v for v in sub.ids}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for c in cycles:
        for v in c[1:]:
            parent[find(v)] = find(c[0])
    comps: dict[int, list[tuple[int, ...]]] = {}
    for c in cycles:
        comps.setdefault(find(c[0]), []).append(c)
    pos = {i: k for k, i in enumerate(orgs)}
    front = {tuple([0] * len(orgs))}
    for comp_cycles in comps.values():
        local = set()
        verts = sorted({v for c in comp_cycles for v in c})
        comp = restrict_to(sub, verts)
        for ex in all_exchanges(comp, delta, maximal_only=True):
            u = [0] * len(orgs)
            for c in ex.cycles:
                for v in c:
                    vert = e[v]
                    if not vert.is_altruist:
                        u[pos[vert.org]] += 1
            local.add(tuple(u))
        local = _frontier(local)
        front = _frontier(tuple(a + b for a, b in zip(f, g)) for f in front for g in local)
    return front


def blocks(mode, current: tuple[int, ...], frontier) -> bool:
    mode = CoreMode.parse(mode)
    for v in frontier:
        if mode is CoreMode.WEAK and all(a > b for a, b in zip(v, current)):
            return True
        if mode is CoreMode.STRONG and all(a >= b for a, b in zip(v, current)) and sum(v) > sum(current):
            return True
        if mode is CoreMode.TU and sum(v) > sum(current):
            return True
    return False


def _guard(e: PartitionEconomy, limit: int | None):
    size = len(e.player_ids())
    if limit is not None and size > limit:
        raise InstanceTooLarge(f"{size} player vertices exceed the brute-force limit {limit}")


class FrontierCache:
    """Per-economy cache of coalition frontiers, for checking many exchanges."""

    def __init__(self, e: PartitionEconomy, delta: int | None = None, limit: int | None = DEFAULT_LIMIT):
        _guard(e, limit)
        self.e = e
        self.delta = delta
        self._f: dict[tuple[int, ...], set] = {}

    def frontier(self, S: tuple[int, ...]):
        if S not in self._f:
            self._f[S] = utility_frontier(self.e, S, self.delta)
        return self._f[S]

    def blocking(self, u: dict, mode):
        orgs = list(self.e.orgs)
        for size in range(1, len(orgs) + 1):
            for S in itertools.combinations(orgs, size):
                if blocks(mode, tuple(u[i] for i in S), self.frontier(S)):
                    return S
        return None


def brute_force_blocking(e: PartitionEconomy, ex: Exchange, mode, delta: int | None = None,
                         limit: int | None = DEFAULT_LIMIT, cache: FrontierCache | None = None):
    """First blocking coalition (size, then lexicographic) or ``None``."""
    check_exchange(ex, e, delta)
    cache = cache or FrontierCache(e, delta, limit)
    return cache.blocking(utilities(ex, e), mode)


def brute_force_core_check(e: PartitionEconomy, ex: Exchange, mode="weak", delta: int | None = None,
                           limit: int | None = DEFAULT_LIMIT, cache: FrontierCache | None = None) -> bool:
    """True iff no coalition of organizations blocks ``ex`` under ``mode``."""
    return brute_force_blocking(e, ex, mode, delta, limit, cache) is None


def core_exists(e: PartitionEconomy, mode="weak", delta: int | None = None,
                limit: int | None = DEFAULT_LIMIT) -> Exchange | None:
    """Some core exchange of ``e`` (platform vertices usable), or ``None`` if the core is empty.

    Only maximal exchanges are tried: enlarging an exchange never lowers
    anyone's utility, so a core exchange can always be enlarged to a
    maximal one that is still in the core.
    """
    cache = FrontierCache(e, delta, limit)
    seen = set()
    for ex in all_exchanges(e, delta, maximal_only=True):
        u = utilities(ex, e)
        key = tuple(sorted(u.items()))
        if key in seen:
            continue
        seen.add(key)
        if cache.blocking(u, mode) is None:
            return ex
    return None


def _components(e: PartitionEconomy, cycles):
    parent = {v: v for v in e.ids}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for c in cycles:
        for v in c[1:]:
            parent[find(v)] = find(c[0])
    comps: dict[int, set] = {}
    for c in cycles:
        comps.setdefault(find(c[0]), set()).update(c)
    return [sorted(s) for s in comps.values()]


def achievable_vectors(e: PartitionEconomy, delta: int | None = None) -> dict:
    """Utility vector (orgs ``1..n``) -> one maximal exchange of the whole economy attaining it.

    Works component by component, so economies made of many small gadgets
    stay cheap even when they are far beyond :data:`DEFAULT_LIMIT`.
    """
    orgs = list(e.orgs)
    pos = {i: k for k, i in enumerate(orgs)}
    cycles = [c.verts for c in enumerate_cycles(e, delta)]
    out = {tuple([0] * len(orgs)): ()}
    for comp in _components(e, cycles):
        local = {}
        for ex in all_exchanges(restrict_to(e, comp), delta, maximal_only=True):
            u = [0] * len(orgs)
            for c in ex.cycles:
                for v in c:
                    if not e[v].is_altruist and e[v].org in pos:
                        u[pos[e[v].org]] += 1
            local.setdefault(tuple(u), ex.cycles)
        out = {tuple(a + b for a, b in zip(f, g)): cf + cg
               for f, cf in out.items() for g, cg in local.items()}
    return {u: Exchange(cs) for u, cs in out.items()}


def core_exists_by_vectors(e: PartitionEconomy, mode="weak", delta: int | None = None):
    """Like :func:`core_exists` but over attainable utility vectors; no size guard."""
    cache = FrontierCache(e, delta, limit=None)
    orgs = list(e.orgs)
    for u, ex in sorted(achievable_vectors(e, delta).items()):
        if cache.blocking(dict(zip(orgs, u)), mode) is None:
            return ex
    return None
