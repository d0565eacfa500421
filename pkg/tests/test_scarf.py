import itertools
from fractions import Fraction

import pytest

from _util import random_economy
from supcore.cyclegen import utilities
from supcore.economy import PAIR, PartitionEconomy, Vertex, restrict_to
from supcore.errors import CapacityViolation, EmptyColumnSpace, InstanceTooLarge
from supcore.fixtures import fig1_instance, lb_triangle
from supcore.oracles import FrontierCache, all_exchanges, brute_force_core_check
from supcore.scarf import (
    build_scarf_system, check_domination, extract_fractional_exchange, is_extreme,
    make_fractional_exchange, scarf_fractional_exchange, scarf_pivot,
)


def _pair():
    return PartitionEconomy([Vertex(0, 1, PAIR), Vertex(1, 2, PAIR)], [(0, 1), (1, 0)], 2, 2)


def _mutual_triangle():
    arcs = [(u, w) for u in range(3) for w in range(3) if u != w]
    return PartitionEconomy([Vertex(k, k + 1, PAIR) for k in range(3)], arcs, 2, 3)


def _weakly_dominated(sys, x):
    """Every column has a tight row whose supported columns give that row's org at least as much."""
    m, N = sys.Q.shape
    load = [sum(x[k] for k in range(N) if sys.Q[r, k]) for r in range(m)]
    for j in range(N):
        ok = False
        for r in range(m):
            if not sys.Q[r, j] or load[r] != 1:
                continue
            org = sys.economy[sys.rows[r]].org
            uj = sys.columns[j].utilities[org]
            if all(sys.columns[k].utilities[org] >= uj for k in range(N) if x[k] and sys.Q[r, k]):
                ok = True
                break
        if not ok:
            return False
    return True


def _brute_columns(e, delta):
    """(coalition, utility vector) pairs attainable with a non-empty exchange."""
    out = set()
    for size in range(1, e.n_orgs + 1):
        for S in itertools.combinations(e.orgs, size):
            sub = restrict_to(e, [v for i in S for v in e.members(i)])
            for ex in all_exchanges(sub, delta):
                if ex.cycles:
                    u = utilities(ex, e)
                    out.add((S, tuple(u[i] for i in S)))
    return out


def test_single_pair_system():
    sys = build_scarf_system(_pair())
    assert sys.shape == (2, 1)
    col = sys.columns[0]
    assert col.coalition == (1, 2) and col.exchange.cycles == ((0, 1),)
    res = scarf_pivot(sys)
    assert res.x == [1]
    assert check_domination(sys, res.x) == []
    # the zero vector dominates nothing
    assert check_domination(sys, [0]) == [0]


def test_no_cycles_empty_column_space():
    e = PartitionEconomy([Vertex(0, 1), Vertex(1, 2)], [(0, 1)], 2, 2)
    with pytest.raises(EmptyColumnSpace):
        build_scarf_system(e)


def test_size_guard():
    with pytest.raises(InstanceTooLarge):
        build_scarf_system(fig1_instance())


def test_triangle_gadget_columns_match_brute_force():
    e = lb_triangle(1)
    sys = build_scarf_system(e, max_orgs=5)
    got = {(c.coalition, tuple(c.utilities[i] for i in c.coalition)) for c in sys.columns}
    assert len(sys.columns) == len(got)
    assert got == _brute_columns(e, 3)


@pytest.mark.parametrize("fixture, guard", [
    (lambda: lb_triangle(1), {"max_orgs": 5}),
    (fig1_instance, {"max_vertices": 24}),
    (_mutual_triangle, {}),
])
def test_pivot_output_dominates(fixture, guard):
    e = fixture()
    sys = build_scarf_system(e, **guard)
    res = scarf_pivot(sys)
    assert check_domination(sys, res.x) == []
    assert _weakly_dominated(sys, res.x)
    assert is_extreme(sys, res.x)


@pytest.mark.parametrize("seed", range(20))
def test_pivot_random(seed):
    e = random_economy(seed, 6 + seed % 5, 2 + seed % 2, 2 + seed % 2, p=0.35)
    try:
        sys = build_scarf_system(e)
    except EmptyColumnSpace:
        return
    res = scarf_pivot(sys)
    assert check_domination(sys, res.x) == []
    assert _weakly_dominated(sys, res.x)


def test_domination_rejects_overload():
    sys = build_scarf_system(_mutual_triangle())
    with pytest.raises(CapacityViolation):
        check_domination(sys, [1] * len(sys.columns))


def test_extract_zero_and_pair():
    sys = build_scarf_system(_pair())
    fe0 = extract_fractional_exchange(sys, [0])
    assert fe0.y == {} and fe0.targets == {1: 0, 2: 0}
    fe1 = extract_fractional_exchange(sys, [1])
    assert fe1.y == {(0, 1): 1} and fe1.targets == {1: 1, 2: 1}


def test_extract_triangle_recomputed():
    e = _mutual_triangle()
    sys, res, fe = scarf_fractional_exchange(e)
    # recompute y and b directly from the columns
    y = {}
    for k, w in enumerate(res.x):
        for c in sys.columns[k].exchange.cycles:
            y[c] = y.get(c, Fraction(0)) + w
    y = {c: w for c, w in y.items() if w}
    assert fe.y == y
    for i in e.orgs:
        mass = sum(w for c, w in y.items() for v in c if e[v].org == i)
        assert fe.targets[i] == mass.numerator // mass.denominator
    for v in e.ids:
        assert fe.load(v) <= 1


def test_make_fractional_exchange_overload():
    with pytest.raises(CapacityViolation):
        make_fractional_exchange(_mutual_triangle(), {(0, 1): Fraction(2, 3), (0, 2): Fraction(2, 3)})


def test_targets_certify_weak_core():
    """Every exchange meeting the fractional targets is in the weak core."""
    hits = 0
    for seed in range(25):
        e = random_economy(500 + seed, 5 + seed % 5, 2 + seed % 2, 2 + seed % 2, p=0.4)
        try:
            _, _, fe = scarf_fractional_exchange(e)
        except EmptyColumnSpace:
            continue
        cache = FrontierCache(e)
        for ex in all_exchanges(e):
            u = utilities(ex, e)
            if all(u[i] >= b for i, b in fe.targets.items()):
                hits += 1
                assert brute_force_core_check(e, ex, "weak", cache=cache)
    assert hits > 25


def test_dump_lists_rows_and_prefs():
    text = build_scarf_system(_mutual_triangle()).dump()
    assert text.startswith("rows 3 columns") and "prefs (best first)" in text
