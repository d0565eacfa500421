"""Shared helpers for the test modules."""
import itertools

import numpy as np

from supcore.economy import PAIR, PartitionEconomy, Vertex


def random_economy(seed: int, n_vertices: int, n_orgs: int, delta: int, p: float = 0.35,
                   mutual: bool = False) -> PartitionEconomy:
    """Small Erdos-Renyi style economy, every vertex a pair."""
    rng = np.random.default_rng(seed)
    orgs = [int(o) for o in rng.integers(1, n_orgs + 1, size=n_vertices)]
    arcs = []
    for u, w in itertools.permutations(range(n_vertices), 2):
        if mutual:
            if u < w and rng.random() < p:
                arcs += [(u, w), (w, u)]
        elif rng.random() < p:
            arcs.append((u, w))
    return PartitionEconomy([Vertex(k, orgs[k], PAIR) for k in range(n_vertices)], arcs, delta, n_orgs)


def naive_cycles(e: PartitionEconomy, delta: int) -> set:
    """Every ordered tuple of distinct vertices closing into a cycle, rotated to its minimum."""
    out = set()
    ids = sorted(e.ids)
    for k in range(2, delta + 1):
        for tup in itertools.permutations(ids, k):
            if tup[0] != min(tup):
                continue
            if all(e.has_arc(tup[i], tup[(i + 1) % k]) for i in range(k)):
                out.add(tup)
    return out


# criterion number -> (passed, detail); printed by the terminal summary hook
ACCEPTANCE: dict = {}


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
