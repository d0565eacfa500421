import itertools
from fractions import Fraction

import pytest

from _util import random_economy
from supcore import exactlp
from supcore.cyclegen import enumerate_cycles
from supcore.errors import ArityMismatch, InfeasibleModel
from supcore.exactlp import (
    EQ, GE, LE, LinearModel, add_cut, solve_ilp, solve_lexicographic, solve_lp_extreme, tight_rank,
)
from supcore.fixtures import fig1_instance, lb_triangle
from supcore.oracles import all_exchanges


def _packing(e, delta=None, weight="length"):
    cs = enumerate_cycles(e, delta)
    m = LinearModel(len(cs))
    for v in e.ids:
        m.add_row({k: 1 for k, c in enumerate(cs) if v in c.verts}, LE, 1, f"v{v}")
    m.objective = {k: (c.length if weight == "length" else 1) for k, c in enumerate(cs)}
    return m, cs


def _polytope_vertices(rows, n):
    """Vertices of {x >= 0, rows} by solving every n-subset of constraints as equalities."""
    cons = [(r, rhs) for r, rhs in rows] + [([int(i == j) for i in range(n)], 0) for j in range(n)]
    out = set()
    for subset in itertools.combinations(cons, n):
        A = [[Fraction(a) for a in r] for r, _ in subset]
        b = [Fraction(rhs) for _, rhs in subset]
        # Gauss-Jordan
        M = [A[i] + [b[i]] for i in range(n)]
        ok = True
        for c in range(n):
            p = next((i for i in range(c, n) if M[i][c] != 0), None)
            if p is None:
                ok = False
                break
            M[c], M[p] = M[p], M[c]
            M[c] = [v / M[c][c] for v in M[c]]
            for i in range(n):
                if i != c and M[i][c]:
                    M[i] = [a - M[i][c] * bb for a, bb in zip(M[i], M[c])]
        if not ok:
            continue
        x = tuple(M[i][n] for i in range(n))
        if all(v >= 0 for v in x) and all(sum(a * v for a, v in zip(r, x)) <= rhs for r, rhs in rows):
            out.add(x)
    return out


def test_single_variable_lp():
    m = LinearModel(1, ub=[None], objective={0: 1})
    m.add_row({0: 1}, LE, 1)
    ep = solve_lp_extreme(m)
    assert ep.values == [1] and ep.tight_rows == [0]


def test_triangle_fractional_matching():
    rows = [([1, 0, 1], 1), ([1, 1, 0], 1), ([0, 1, 1], 1)]
    m = LinearModel(3, ub=[None] * 3, objective={0: 1, 1: 1, 2: 1})
    for r, rhs in rows:
        m.add_row(r, LE, rhs)
    exactlp.reset_audit()
    ep = solve_lp_extreme(m)
    oracle = _polytope_vertices(rows, 3)
    best = max(sum(v) for v in oracle)
    assert ep.objective == best == Fraction(3, 2)
    assert tuple(ep.values) in oracle
    assert ep.values == [Fraction(1, 2)] * 3
    assert len(ep.tight_rows) == 3 == tight_rank(m, ep.values, ep.tight_rows)
    assert exactlp.AUDIT == {"fractional_points": 1, "rank_ok": 1}


def test_infeasible_lp():
    m = LinearModel(1, ub=[None], objective={0: 1})
    m.add_row({0: 1}, GE, 2)
    m.add_row({0: 1}, LE, 1)
    with pytest.raises(InfeasibleModel):
        solve_lp_extreme(m)


@pytest.mark.parametrize("seed", range(6))
def test_lp_optimum_matches_vertex_enumeration(seed):
    import numpy as np
    rng = np.random.default_rng(seed)
    n = 3
    rows = [([int(a) for a in rng.integers(0, 3, size=n)], int(rng.integers(1, 4))) for _ in range(3)]
    rows.append(([1] * n, 4))
    c = [int(a) for a in rng.integers(1, 5, size=n)]
    m = LinearModel(n, ub=[None] * n, objective=dict(enumerate(c)))
    for r, rhs in rows:
        m.add_row(r, LE, rhs)
    ep = solve_lp_extreme(m, audit=False)
    best = max(sum(ci * xi for ci, xi in zip(c, x)) for x in _polytope_vertices(rows, n))
    assert ep.objective == best


def test_directed_triangle_ilp():
    from supcore.economy import PAIR, PartitionEconomy, Vertex
    e = PartitionEconomy([Vertex(k, k + 1, PAIR) for k in range(3)], [(0, 1), (1, 2), (2, 0)], 3, 3)
    m, _ = _packing(e)
    r = solve_ilp(m)
    assert r.optimal and r.objective == 3 and r.assignment == [1]


def test_fig1_max_packing():
    e = fig1_instance()
    m, _ = _packing(e)
    oracle = max(sum(len(c) for c in ex.cycles) for ex in all_exchanges(e))
    for backend in ("exact", "highs"):
        r = solve_ilp(m, backend=backend)
        assert r.objective == oracle == len(e) - 5


@pytest.mark.parametrize("seed", range(15))
def test_ilp_matches_brute_force(seed):
    e = random_economy(100 + seed, 8, 3, 3, p=0.3)
    m, _ = _packing(e)
    oracle = max(sum(len(c) for c in ex.cycles) for ex in all_exchanges(e))
    assert solve_ilp(m).objective == oracle
    assert solve_ilp(m, backend="highs").objective == oracle


def test_cut_above_optimum_is_infeasible():
    e = lb_triangle(1)
    m, _ = _packing(e)
    opt = solve_ilp(m).objective
    cut = add_cut(m, (m.objective, GE, opt + 1))
    assert solve_ilp(cut).status == exactlp.INFEASIBLE
    assert solve_ilp(cut, backend="highs").status == exactlp.INFEASIBLE
    assert len(m.rows) + 1 == len(cut.rows)


def test_trivial_cut_changes_nothing():
    m, _ = _packing(lb_triangle(1))
    same = add_cut(m, ({}, GE, 0))
    assert solve_ilp(same).objective == solve_ilp(m).objective


def test_cut_arity_checked():
    m = LinearModel(2)
    with pytest.raises(ArityMismatch):
        add_cut(m, ([1, 1, 1], LE, 1))
    with pytest.raises(ArityMismatch):
        add_cut(m, ({5: 1}, LE, 1))


def test_lexicographic_single_stage():
    m, _ = _packing(random_economy(1, 8, 2, 3, p=0.35))
    res, vals = solve_lexicographic(m, [m.objective])
    assert vals == [solve_ilp(m).objective]


def test_lexicographic_prefers_same_blood():
    # vertex 1 lies on both 2-cycles; only (0,1) has a same-blood edge
    m = LinearModel(2)
    m.add_row({0: 1, 1: 1}, LE, 1, "v1")
    transplants = {0: 2, 1: 2}
    same_blood = {0: 1, 1: 0}
    feasible = [x for x in itertools.product((0, 1), repeat=2) if x[0] + x[1] <= 1]
    best = max(feasible, key=lambda x: (2 * x[0] + 2 * x[1], x[0]))
    res, vals = solve_lexicographic(m, [transplants, same_blood])
    assert tuple(res.assignment) == best == (1, 0)
    assert vals == [2, 1]


def test_lex_stages_never_raise_stage_one():
    from supcore.economy import GeneratorConfig, generate_random
    e = generate_random(GeneratorConfig(n_pairs=20, n_orgs=2, seed=4, cpra="saidman"))
    cs = enumerate_cycles(e)
    m = LinearModel(len(cs))
    for v in e.ids:
        m.add_row({k: 1 for k, c in enumerate(cs) if v in c.verts}, LE, 1)
    stages = [{k: c.real_count for k, c in enumerate(cs)},
              {k: 1 for k in range(len(cs))},
              {k: c.same_blood_edges for k, c in enumerate(cs)},
              {k: c.hardness for k, c in enumerate(cs)}]
    res, vals = solve_lexicographic(m, stages, backend="highs")
    alone = solve_ilp(m.with_objective(stages[0]), backend="highs").objective
    assert len(vals) == 4 and vals[0] == alone
    x = res.assignment
    assert sum(stages[0][k] * x[k] for k in range(len(cs))) == vals[0]
    assert sum(x[k] for k in range(len(cs))) == vals[1]


def test_equality_rows_and_dump():
    m = LinearModel(2, objective={0: 1, 1: 1})
    m.add_row({0: 1, 1: 1}, EQ, 1, "one")
    assert solve_ilp(m).objective == 1
    text = m.dump()
    assert "one: x0 + x1 = 1" in text and text.startswith("Maximize")
