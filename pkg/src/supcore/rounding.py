"""Iterative rounding of fractional exchanges into supplemented-core exchanges.

Given per-organization targets ``b`` (the floors of the fractional
utilities), both routines produce an integral exchange in which every
organization meets its target, adding synthetic platform altruists where
the graph forces it.  Any such exchange is weak-core stable once the
altruists are included.
"""
from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx
import numpy as np

from . import exactlp
from .cyclegen import Exchange, canonical, enumerate_cycles, mutual_graph, utilities
from .economy import PartitionEconomy, to_json_dict, with_altruists
from .errors import InstanceTooLarge, NonterminationGuard, TargetMiss

NU_LIMIT = 60


# ---------------------------------------------------------------------------
# independent odd cycles
# ---------------------------------------------------------------------------

@dataclass
class OddCycleFamily:
    cycles: list[tuple[int, ...]]

    @property
    def size(self) -> int:
        return len(self.cycles)

    def is_independent(self, g: nx.Graph) -> bool:
        seen: set[int] = set()
        for c in self.cycles:
            if len(c) % 2 == 0 or len(c) < 3 or seen & set(c):
                return False
            for a, b in zip(c, c[1:] + c[:1]):
                if not g.has_edge(a, b):
                    return False
            seen |= set(c)
        for k, c in enumerate(self.cycles):
            for d in self.cycles[k + 1:]:
                if any(g.has_edge(a, b) for a in c for b in d):
                    return False
        return True


def _induced_odd_cycles_through(g: nx.Graph, v, alive: frozenset):
    """Chordless odd cycles of ``g[alive]`` containing ``v``, each listed once."""
    nbrs = [w for w in g[v] if w in alive]
    out = []

    def extend(path, on):
        last = path[-1]
        for w in g[last]:
            if w not in alive or w in on:
                continue
            # no chord from w back into the interior of the path
            if any(g.has_edge(w, p) for p in path[1:-1]):
                continue
            touches_v = g.has_edge(w, v)
            if touches_v:
                if len(path) >= 2 and (len(path) + 1) % 2 == 1 and path[1] < w:
                    out.append(tuple(path) + (w,))
                continue
            path.append(w)
            on.add(w)
            extend(path, on)
            path.pop()
            on.discard(w)

    for u in nbrs:
        extend([v, u], {v, u})
    return out


def independent_odd_cycles(g: nx.Graph | PartitionEconomy, limit: int | None = NU_LIMIT) -> OddCycleFamily:
    """A maximum family of pairwise independent odd cycles (exact search).

    Only chordless cycles are tried: a chord of an odd cycle always splits
    off a shorter odd cycle on a subset of its vertices.
    """
    if isinstance(g, PartitionEconomy):
        g = mutual_graph(g.without_platform())
    if limit is not None and g.number_of_nodes() > limit:
        raise InstanceTooLarge(f"{g.number_of_nodes()} vertices exceed the odd-cycle limit {limit}")
    memo: dict[frozenset, list] = {}

    def solve(alive: frozenset) -> list:
        if len(alive) < 3:
            return []
        if alive in memo:
            return memo[alive]
        comps = list(nx.connected_components(g.subgraph(alive)))
        if len(comps) > 1:
            res = [c for comp in comps for c in solve(frozenset(comp))]
        else:
            v = min(alive, key=lambda w: (g.subgraph(alive).degree(w), w))
            res = solve(alive - {v})
            for c in _induced_odd_cycles_through(g, v, alive):
                if len(res) >= len(alive) // 3:
                    break
                closed = set(c)
                for w in c:
                    closed.update(g[w])
                cand = [c] + solve(alive - closed)
                if len(cand) > len(res):
                    res = cand
        memo[alive] = res
        return res

    return OddCycleFamily(sorted(solve(frozenset(g.nodes))))


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

@dataclass
class Typing:
    type_of: dict
    classes: list[tuple]
    upper_bound: bool = False

    @property
    def t(self) -> int:
        return len(self.classes)


def infer_types(g: PartitionEconomy | nx.Graph | nx.DiGraph) -> Typing:
    """Coarsest partition in which arcs depend only on the endpoints' classes.

    Two vertices can share a class exactly when their in- and
    out-neighbourhoods coincide, so grouping by neighbourhood is optimal.
    For economies the vertex kind is also kept apart; ``upper_bound`` is set
    when that split made the partition finer than necessary.
    """
    sig: dict = {}
    loose: dict = {}
    if isinstance(g, PartitionEconomy):
        for v in g.ids:
            base = (frozenset(g.successors(v)), frozenset(g.predecessors(v)))
            sig.setdefault(base + (g[v].kind,), []).append(v)
            loose.setdefault(base, []).append(v)
    elif isinstance(g, nx.DiGraph):
        for v in g.nodes:
            sig.setdefault((frozenset(g.successors(v)), frozenset(g.predecessors(v))), []).append(v)
        loose = sig
    else:
        for v in g.nodes:
            sig.setdefault(frozenset(g[v]), []).append(v)
        loose = sig
    classes = sorted(tuple(sorted(vs)) for vs in sig.values())
    type_of = {v: k for k, cls in enumerate(classes) for v in cls}
    return Typing(type_of, classes, upper_bound=len(classes) > len(loose))


def check_type_bound(g: PartitionEconomy | nx.Graph, limit: int | None = NU_LIMIT) -> dict:
    """Compare the odd-cycle packing number of the mutual graph with ``t/3``."""
    if isinstance(g, PartitionEconomy):
        g = mutual_graph(g.without_platform())
    typing = infer_types(g)
    nu = independent_odd_cycles(g, limit).size
    return {"nu": nu, "t": typing.t, "holds": 3 * nu <= typing.t, "upper_bound": typing.upper_bound}


def random_group_graph(n: int, probs, seed: int) -> nx.Graph:
    """Undirected graph with vertices spread evenly over groups; edge probability by group pair."""
    rng = np.random.default_rng(seed)
    probs = np.asarray(probs, dtype=float)
    groups = np.arange(n) % len(probs)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    draws = rng.random((n, n))
    for u in range(n):
        for w in range(u + 1, n):
            if draws[u, w] < probs[groups[u], groups[w]]:
                g.add_edge(u, w)
    return g


DEFAULT_GROUP_PROBS = ((0.6, 0.8), (0.8, 0.6))


def nu_growth_experiment(sizes=(10, 20, 40), trials: int = 5, probs=DEFAULT_GROUP_PROBS,
                         seed: int = 0, csv_path=None) -> list[dict]:
    """Sample group-model graphs and record the odd-cycle packing number per size."""
    rows = []
    for n in sizes:
        for k in range(trials):
            g = random_group_graph(n, probs, seed + 1000 * n + k)
            nu = independent_odd_cycles(g).size
            rows.append({"n": n, "trial": k, "nu": nu, "nu_over_log_n": nu / math.log(n)})
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["n", "trial", "nu", "nu_over_log_n"])
            w.writeheader()
            w.writerows(rows)
    return rows


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class RoundingCertificate:
    economy: PartitionEconomy          # player graph plus the synthetic altruists
    exchange: Exchange
    altruists: list[tuple[int, int]]   # (altruist id, only recipient)
    targets: dict
    achieved: dict
    bound_name: str
    bound_value: int
    stats: dict = field(default_factory=dict)
    verified: bool | None = None

    @property
    def n_altruists(self) -> int:
        return len(self.altruists)

    def meets_targets(self) -> bool:
        return all(self.achieved.get(i, 0) >= b for i, b in self.targets.items())

    def to_json(self) -> dict:
        return {
            "instance": to_json_dict(self.economy),
            "exchange": self.exchange.to_json(),
            "altruists": [{"id": a, "recipient": p} for a, p in self.altruists],
            "targets": {str(i): b for i, b in sorted(self.targets.items())},
            "achieved": {str(i): u for i, u in sorted(self.achieved.items())},
            "bound": {"name": self.bound_name, "value": self.bound_value},
            "stats": self.stats,
            "verified": self.verified,
        }


def _finish(G: PartitionEconomy, cycles, stand_in, comp_targets, targets, bound_name, bound_value, stats):
    """Attach synthetic altruists and assemble the certificate.

    ``cycles`` may contain string placeholders ``"alt:k"`` for the k-th
    stand-in of ``stand_in`` (a list of recipients).
    """
    recipients = list(stand_in) + list(comp_targets)
    ext, new_ids = with_altruists(G, [[p] for p in recipients])
    final = []
    for c in cycles:
        final.append(tuple(new_ids[int(v[4:])] if isinstance(v, str) else v for v in c))
    for k, p in enumerate(comp_targets):
        final.append((new_ids[len(stand_in) + k], p))
    ex = Exchange(tuple(canonical(c) for c in final))
    achieved = utilities(ex, ext)
    for i, b in targets.items():
        if achieved.get(i, 0) < b:
            raise TargetMiss(f"org {i} receives {achieved.get(i, 0)} < target {b}")
    return RoundingCertificate(ext, ex, list(zip(new_ids, recipients)), dict(targets), achieved,
                               bound_name, bound_value, stats)


def _compensate(G: PartitionEconomy, used: set, achieved: Mapping[int, int], targets: Mapping[int, int]):
    """Patients to cover with single-recipient altruists so every org reaches its target."""
    out = []
    for i, b in sorted(targets.items()):
        short = b - achieved.get(i, 0)
        if short <= 0:
            continue
        spare = [v for v in G.patients(i) if v not in used]
        if len(spare) < short:
            raise TargetMiss(f"org {i} is {short} short with only {len(spare)} uncovered patients")
        out += spare[:short]
    return out


def _targets_of(targets) -> dict:
    t = getattr(targets, "targets", targets)
    return {int(i): int(b) for i, b in dict(t).items()}


# ---------------------------------------------------------------------------
# pairwise rounding
# ---------------------------------------------------------------------------

def _even_step(z: dict, comp_edges, weight, vertex_edges, org_rows, b_cur):
    """Shift weight along an even path or cycle until some edge hits 0 or 1."""
    d = {e: (1 if k % 2 == 0 else -1) for k, e in enumerate(comp_edges)}
    if sum(weight[e] * s for e, s in d.items()) < 0:
        d = {e: -s for e, s in d.items()}
    eps = None

    def cap(limit):
        nonlocal eps
        if limit is not None and (eps is None or limit < eps):
            eps = limit

    for e, s in d.items():
        cap((1 - z[e]) if s > 0 else z[e])
    for v, es in vertex_edges.items():
        delta = sum(d.get(e, 0) for e in es)
        if delta > 0:
            cap((1 - sum(z[e] for e in es)) / delta)
    for i, (coef, _) in org_rows.items():
        delta = sum(c * d.get(e, 0) for e, c in coef.items())
        if delta < 0:
            cap((sum(c * z[e] for e, c in coef.items()) - b_cur[i]) / -delta)
    for e, s in d.items():
        z[e] += s * eps


def _balance(cycles, leave, org_of, stats):
    """Move leave-out vertices so no org exceeds a third (rounded up) of its cycle vertices."""
    share = Counter(org_of[v] for c in cycles for v in c)
    cap = {i: -(-n // 3) for i, n in share.items()}
    for _ in range(10 * len(cycles) + 10):
        load = Counter(org_of[leave[k]] for k in range(len(cycles)))
        B = [i for i in cap if load[i] > cap[i]]
        if not B:
            return
        A = [i for i in cap if load[i] < cap[i]]
        # arcs i -> j: some cycle leaves out a j vertex and holds an i vertex
        arcs = defaultdict(list)
        for k, c in enumerate(cycles):
            j = org_of[leave[k]]
            for v in c:
                if v != leave[k] and org_of[v] != j:
                    arcs[org_of[v]].append((j, k, v))
        prev = {i: None for i in A}
        q = deque(A)
        hit = None
        while q and hit is None:
            i = q.popleft()
            for j, k, v in arcs[i]:
                if j not in prev:
                    prev[j] = (i, k, v)
                    if j in B:
                        hit = j
                        break
                    q.append(j)
        if hit is None:
            raise AssertionError("no augmenting path while some org is over its share")
        j = hit
        while prev[j] is not None:
            i, k, v = prev[j]
            leave[k] = v
            j = i
        stats["balancing_shifts"] += 1
    raise NonterminationGuard("balancing did not settle")


def round_pairwise(e: PartitionEconomy, targets, balance: bool = True, prune: bool = True,
                   max_rounds: int = 10_000) -> RoundingCertificate:
    """Round to a matching in which every org meets ``targets``, adding at most one
    altruist per residual odd cycle."""
    G = e.without_platform()
    b_orig = _targets_of(targets)
    g = mutual_graph(G)
    edges = sorted(tuple(sorted(x)) for x in g.edges)
    weight = {ed: sum(1 for v in ed if not G[v].is_altruist) for ed in edges}
    org_of = {v: G[v].org for v in G.ids}
    free = set(edges)
    matched: list[tuple[int, int]] = []
    dead: set[int] = set()
    b_cur = dict(b_orig)
    stats = {"lp_solves": 0, "even_steps": 0, "merges": 0, "outside_matches": 0,
             "balancing_shifts": 0, "residual_cycles": 0}

    def fix_edge(ed):
        matched.append(ed)
        dead.update(ed)
        for v in ed:
            if not G[v].is_altruist:
                b_cur[org_of[v]] -= 1

    rounds = 0
    residual = []
    while free:
        rounds += 1
        if rounds > max_rounds:
            raise NonterminationGuard("pairwise rounding exceeded its round budget")
        free = {ed for ed in free if not (set(ed) & dead)}
        if not free:
            break
        var = sorted(free)
        col = {ed: k for k, ed in enumerate(var)}
        model = exactlp.LinearModel(len(var), objective={col[ed]: weight[ed] for ed in var})
        vertex_edges = defaultdict(list)
        for ed in var:
            for v in ed:
                vertex_edges[v].append(ed)
        for v, es in sorted(vertex_edges.items()):
            model.add_row({col[x]: 1 for x in es}, exactlp.LE, 1, f"v{v}")
        org_rows = {}
        for i, b in sorted(b_cur.items()):
            coef = {ed: sum(1 for v in ed if org_of[v] == i and not G[v].is_altruist) for ed in var}
            coef = {ed: c for ed, c in coef.items() if c}
            if b > 0:
                model.add_row({col[x]: c for x, c in coef.items()}, exactlp.GE, b, f"org{i}")
                org_rows[i] = (coef, b)
        pt = exactlp.solve_lp_extreme(model)
        stats["lp_solves"] += 1
        z = {ed: pt.values[col[ed]] for ed in var}
        progress = False
        for ed in var:
            if z[ed] == 1:
                fix_edge(ed)
                free.discard(ed)
                progress = True
            elif z[ed] == 0:
                free.discard(ed)
                progress = True
        if progress:
            continue
        # every coordinate is fractional: the support must be disjoint odd cycles
        h = nx.Graph(var)
        even = None
        for comp in nx.connected_components(h):
            sub = h.subgraph(comp)
            degs = [d for _, d in sub.degree()]
            if max(degs) > 2:
                raise AssertionError("fractional support has a vertex of degree > 2")
            is_cycle = min(degs) == 2
            if is_cycle and len(comp) % 2 == 1:
                continue
            even = sub
            break
        if even is not None:
            if min(d for _, d in even.degree()) == 2:
                order = [tuple(sorted(x)) for x in nx.find_cycle(even)]
            else:
                ends = [v for v, d in even.degree() if d == 1]
                path = nx.shortest_path(even, ends[0], ends[1])
                order = [tuple(sorted(x)) for x in zip(path, path[1:])]
            _even_step(z, order, weight, vertex_edges, org_rows, b_cur)
            stats["even_steps"] += 1
            for ed in var:
                if z[ed] == 1:
                    fix_edge(ed)
                    free.discard(ed)
                elif z[ed] == 0:
                    free.discard(ed)
            continue
        for comp in nx.connected_components(h):
            residual.append([u for u, _ in nx.find_cycle(h.subgraph(comp))])
        break

    # merge residual cycles joined by an edge, or attach one to an unused vertex
    def path_matching(cyc, skip):
        k = cyc.index(skip)
        rest = cyc[k + 1:] + cyc[:k]
        return [tuple(sorted(rest[m:m + 2])) for m in range(0, len(rest), 2)]

    changed = True
    while changed:
        changed = False
        on = {v: k for k, c in enumerate(residual) for v in c}
        for k, c in enumerate(residual):
            for u in c:
                for w in g[u]:
                    if w in dead:
                        continue
                    j = on.get(w)
                    if j == k:
                        continue
                    matched.append(tuple(sorted((u, w))))
                    matched.extend(path_matching(c, u))
                    dead.update(c)
                    dead.add(w)
                    if j is None:
                        stats["outside_matches"] += 1
                        residual = [x for m, x in enumerate(residual) if m != k]
                    else:
                        stats["merges"] += 1
                        matched.extend(path_matching(residual[j], w))
                        dead.update(residual[j])
                        residual = [x for m, x in enumerate(residual) if m not in (k, j)]
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
    stats["residual_cycles"] = len(residual)

    # choose one uncovered vertex per residual cycle
    load = Counter()
    leave = []
    for c in residual:
        v = min(c, key=lambda x: (load[org_of[x]], x))
        leave.append(v)
        load[org_of[v]] += 1
    if balance and residual:
        _balance(residual, leave, org_of, stats)
    cycles = [ed for ed in matched]
    for c, v in zip(residual, leave):
        cycles += path_matching(c, v)
    used = {v for ed in cycles for v in ed}
    achieved = utilities(Exchange(tuple(cycles)), G)
    comp = []
    for c, v in zip(residual, leave):
        i = org_of[v]
        if G[v].is_altruist or (prune and achieved.get(i, 0) >= b_orig.get(i, 0)):
            continue
        comp.append(v)
        achieved[i] = achieved.get(i, 0) + 1
    comp += _compensate(G, used | set(comp), achieved, b_orig)
    stats["per_org_leaveouts"] = {str(i): n for i, n in sorted(Counter(org_of[v] for v in leave).items())}
    stats["per_org_cycle_vertices"] = {str(i): n for i, n in sorted(
        Counter(org_of[v] for c in residual for v in c).items())}
    return _finish(G, cycles, [], comp, b_orig, "nu_G", len(residual), stats)


# ---------------------------------------------------------------------------
# cyclic rounding
# ---------------------------------------------------------------------------

def round_cyclic(e: PartitionEconomy, typing: Typing | None, targets, delta: int | None = None,
                 max_rounds: int = 10_000) -> RoundingCertificate:
    """Round over typed cycles; each org needs at most ``(delta-1)(t+1)`` synthetic altruists."""
    G = e.without_platform()
    delta = G.delta if delta is None else delta
    typing = typing or infer_types(G)
    b_orig = _targets_of(targets)
    tkey = {v: (typing.type_of[v], G[v].org) for v in G.ids}
    a_cur = Counter(tkey.values())
    a_orig = dict(a_cur)
    cyc = [c.verts for c in enumerate_cycles(G, delta)]
    beta = [Counter(tkey[v] for v in c) for c in cyc]
    gamma = [Counter(G[v].org for v in c if not G[v].is_altruist) for c in cyc]
    b_cur = dict(b_orig)
    A_act = set(a_cur)
    B_act = {i for i, b in b_cur.items() if b > 0}
    free = set(range(len(cyc)))
    chosen: list[int] = []
    stats = {"lp_solves": 0, "rows_dropped_a": 0, "rows_dropped_b": 0, "cycles": len(cyc)}
    rounds = 0
    while free:
        rounds += 1
        if rounds > max_rounds:
            raise NonterminationGuard("cyclic rounding exceeded its round budget")
        var = sorted(free)
        col = {c: k for k, c in enumerate(var)}
        model = exactlp.LinearModel(len(var), objective={col[c]: sum(gamma[c].values()) for c in var})
        for key in sorted(A_act):
            coef = {col[c]: beta[c][key] for c in var if beta[c][key]}
            if coef:
                model.add_row(coef, exactlp.LE, a_cur[key], f"a{key}")
        for i in sorted(B_act):
            coef = {col[c]: gamma[c][i] for c in var if gamma[c][i]}
            model.add_row(coef, exactlp.GE, b_cur[i], f"b{i}")
        pt = exactlp.solve_lp_extreme(model)
        stats["lp_solves"] += 1
        z = {c: pt.values[col[c]] for c in var}
        progress = False
        for c in var:
            if z[c] in (0, 1):
                free.discard(c)
                progress = True
                if z[c] == 1:
                    chosen.append(c)
                    a_cur.subtract(beta[c])
                    for i, g_ in gamma[c].items():
                        b_cur[i] -= g_
        for key in sorted(A_act):
            if sum(beta[c][key] for c in free) <= a_cur[key] + delta - 1:
                A_act.discard(key)
                stats["rows_dropped_a"] += 1
                progress = True
        for i in sorted(B_act):
            if sum(gamma[c][i] * z[c] for c in free) <= delta - 1:
                B_act.discard(i)
                stats["rows_dropped_b"] += 1
                progress = True
        if not progress:
            raise NonterminationGuard("all-fractional point with no removable row")

    # realize: hand out real vertices of the right (type, org); missing ones get stand-ins
    pool = defaultdict(list)
    for v in sorted(G.ids):
        pool[tkey[v]].append(v)
    excess = Counter()
    segments = []
    stand_in: list[int] = []
    for c in chosen:
        real = []
        for v in cyc[c]:
            lst = pool[tkey[v]]
            if v in lst:
                lst.remove(v)
                real.append(v)
            elif lst:
                real.append(lst.pop(0))
            else:
                real.append(None)
                excess[tkey[v]] += 1
        if all(x is not None for x in real):
            segments.append(tuple(real))
            continue
        k0 = real.index(None)
        rot = real[k0:] + real[:k0]
        cur: list = []
        for x in rot + [None]:
            if x is None:
                if cur:
                    segments.append(tuple(cur))
                cur = []
                continue
            if not cur and not G[x].is_altruist:
                cur = [f"alt:{len(stand_in)}"]
                stand_in.append(x)
            cur.append(x)
    def gain(seg):
        return Counter(G[v].org for v in seg if not isinstance(v, str) and not G[v].is_altruist)

    achieved = Counter()
    for seg in segments:
        achieved.update(gain(seg))
    # drop stand-in segments nobody needs, newest first
    pruned = 0
    for k in range(len(segments) - 1, -1, -1):
        seg = segments[k]
        if isinstance(seg[0], str):
            g_ = gain(seg)
            if all(achieved[i] - n >= b_orig.get(i, 0) for i, n in g_.items()):
                achieved.subtract(g_)
                stand_in[int(seg[0][4:])] = None
                segments.pop(k)
                pruned += 1
    keep = [k for k, p in enumerate(stand_in) if p is not None]
    renum = {k: m for m, k in enumerate(keep)}
    segments = [tuple(f"alt:{renum[int(v[4:])]}" if isinstance(v, str) else v for v in seg)
                for seg in segments]
    stand_in = [stand_in[k] for k in keep]
    stats["stand_ins_pruned"] = pruned
    used = {v for seg in segments for v in seg if not isinstance(v, str)}
    comp = _compensate(G, used, achieved, b_orig)
    n = G.n_orgs
    stats["type_excess"] = {f"{t}:{i}": k for (t, i), k in sorted(excess.items())}
    stats["stand_ins"] = len(stand_in)
    stats["compensations"] = len(comp)
    stats["t"] = typing.t
    stats["max_row_violation"] = max([0] + [
        sum(beta[c][key] for c in chosen) - a_orig[key] for key in a_orig])
    bound = (delta - 1) * n * (typing.t + 1)
    return _finish(G, segments, stand_in, comp, b_orig, "delta_n_t", bound, stats)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def supplemented_core_pipeline(e: PartitionEconomy, delta: int | None = None, verify: bool = True,
                               verify_limit: int = 12, **scarf_guard) -> RoundingCertificate:
    """Fractional core point, rounding, then (small instances) an exhaustive weak-core check."""
    from .oracles import brute_force_core_check
    from .scarf import scarf_fractional_exchange

    delta = e.delta if delta is None else delta
    G = e.without_platform().with_delta(delta)
    from .errors import EmptyColumnSpace
    try:
        _, res, fe = scarf_fractional_exchange(G, delta, **scarf_guard)
    except EmptyColumnSpace:
        cert = _finish(G, [], [], [], {i: 0 for i in G.orgs}, "empty", 0, {"scarf_pivots": 0})
        cert.verified = True
        return cert
    if delta == 2:
        cert = round_pairwise(G, fe)
    else:
        cert = round_cyclic(G, infer_types(G), fe, delta)
    cert.stats["scarf_pivots"] = res.pivots
    cert.stats["fractional_support"] = len(fe.y)
    if verify and len(G.player_ids()) <= verify_limit:
        cert.verified = brute_force_core_check(cert.economy, cert.exchange, "weak", delta, limit=None)
        if not cert.verified:
            raise AssertionError("rounded exchange is blocked")
    return cert
