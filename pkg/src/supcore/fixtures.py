"""Deterministic constructors for the small adversarial economies.

Ids are assigned gadget-major, role-minor, so a vertex can be located from
its gadget index and role alone (see each constructor's docstring).
"""
from __future__ import annotations

from .cyclegen import Exchange
from .economy import ALTRUIST, PAIR, PartitionEconomy, Vertex

RED, GREEN, BLUE = 1, 2, 3


def _mutual(ids):
    return [(u, w) for u in ids for w in ids if u != w]


def fig1_instance(with_altruist: bool = False) -> PartitionEconomy:
    """Three organizations, pairwise exchange, empty core.

    Orgs: 1 = red, 2 = green, 3 = blue.  Ids 0-2 form the first triangle
    (green, blue, red), 3-5 the second (green, blue, red), then three K5
    blocks at 6-10 (g g b b r), 11-15 (r g b b r) and 16-20 (g g b r r).
    ``with_altruist`` adds id 21, a platform altruist that can only give
    to vertex 0.
    """
    orgs = [GREEN, BLUE, RED, GREEN, BLUE, RED,
            GREEN, GREEN, BLUE, BLUE, RED,
            RED, GREEN, BLUE, BLUE, RED,
            GREEN, GREEN, BLUE, RED, RED]
    vertices = [Vertex(k, o, PAIR) for k, o in enumerate(orgs)]
    arcs = []
    for block in ((0, 1, 2), (3, 4, 5), range(6, 11), range(11, 16), range(16, 21)):
        arcs += _mutual(list(block))
    if with_altruist:
        vertices.append(Vertex(21, 0, ALTRUIST))
        arcs.append((21, 0))
    e = PartitionEconomy(vertices, arcs, 2, 3)
    assert len(e.player_ids()) == 21 and len(arcs) == 2 * (3 + 3 + 30) + int(with_altruist)
    return e


def fig1_bold_exchange() -> Exchange:
    """The highlighted matching; needs ``fig1_instance(with_altruist=True)``."""
    return Exchange(((21, 0), (1, 2), (4, 5), (7, 8), (9, 10), (12, 13), (11, 15),
                     (17, 18), (16, 20)))


def lb_pairwise(a: int) -> PartitionEconomy:
    """``3a`` triangles and ``9a`` K5 blocks over three organizations.

    Triangle ``j`` is ids ``3j, 3j+1, 3j+2`` owned by orgs 1, 2, 3.  K5
    blocks follow at ``9a + 5b``; block ``b`` belongs to group
    ``g = b // 3a + 1`` and holds two vertices of org ``g``, two of ``g+1``
    and one of ``g+2`` (orgs taken cyclically in 1..3).
    """
    if a < 1:
        raise ValueError("a must be >= 1")
    vertices, arcs = [], []
    for j in range(3 * a):
        ids = [3 * j, 3 * j + 1, 3 * j + 2]
        vertices += [Vertex(v, k + 1, PAIR) for k, v in enumerate(ids)]
        arcs += _mutual(ids)
    base = 9 * a
    for b in range(9 * a):
        g = b // (3 * a)
        owners = [g % 3 + 1, g % 3 + 1, (g + 1) % 3 + 1, (g + 1) % 3 + 1, (g + 2) % 3 + 1]
        ids = [base + 5 * b + k for k in range(5)]
        vertices += [Vertex(v, o, PAIR) for v, o in zip(ids, owners)]
        arcs += _mutual(ids)
    e = PartitionEconomy(vertices, arcs, 2, 3)
    assert len(e) == 54 * a
    assert all(len(e.members(i)) == 18 * a for i in (1, 2, 3))
    assert len(arcs) == 2 * (3 * 3 * a + 10 * 9 * a)
    return e


def lb_triangle(copies: int = 1) -> PartitionEconomy:
    """Disjoint copies of the subdivided five-cycle, delta 3, five orgs per copy.

    Copy ``c`` uses ids ``10c + (i-1)`` for ``v_i`` (org ``5c + i``) and
    ``10c + 5 + (i-1)`` for ``v_{i,i+1}`` (org ``5c + i+1``), ``i = 1..5``.
    Each copy needs its own donor, so ``copies - 1`` donors never suffice.
    """
    if copies < 1:
        raise ValueError("copies must be >= 1")
    vertices, arcs = [], []
    for c in range(copies):
        v = [10 * c + i for i in range(5)]
        s = [10 * c + 5 + i for i in range(5)]
        vertices += [Vertex(v[i], 5 * c + i + 1, PAIR) for i in range(5)]
        vertices += [Vertex(s[i], 5 * c + (i + 1) % 5 + 1, PAIR) for i in range(5)]
        for i in range(5):
            nxt = (i + 1) % 5
            arcs += [(v[i], s[i]), (s[i], v[nxt]), (v[nxt], v[i])]
    e = PartitionEconomy(vertices, arcs, 3, 5 * copies)
    assert len(e) == 10 * copies and len(arcs) == 15 * copies
    return e


def type_a_gadget(delta: int, i: int, start: int = 0):
    """Vertices and arcs of the ``i``-th subdivided triangle (``3(delta-1)`` vertices).

    Roles in id order: a1, a2, a3, then the ``delta-2`` subdivision vertices
    of the 1-2, 2-3 and 1-3 sides.
    """
    m = delta - 2
    a1, a2, a3 = start, start + 1, start + 2
    side = {key: [start + 3 + k * m + t for t in range(m)] for k, key in enumerate(("12", "23", "13"))}
    if i % 2 == 0:
        owner = {"12": 1, "23": 2, "13": 3}
    else:
        owner = {"13": 1, "12": 2, "23": 3}
    vertices = [Vertex(a1, 1, PAIR), Vertex(a2, 2, PAIR), Vertex(a3, 3, PAIR)]
    arcs = []
    for key, (x, y) in (("12", (a1, a2)), ("23", (a2, a3)), ("13", (a1, a3))):
        vertices += [Vertex(v, owner[key], PAIR) for v in side[key]]
        path = [x] + side[key] + [y]
        arcs += list(zip(path, path[1:])) + [(y, x)]
    return vertices, arcs


def type_b_gadget(delta: int, i: int, start: int = 0):
    """Vertices and arcs of the ``i``-th subdivided five-cycle (``10d+5`` vertices, ``d=(delta-2)//2``).

    Roles in id order: b1..b5, then for ``l = 1..5`` the forward path
    ``b_l -> b_{l+1}`` followed by the backward path ``b_{l+1} -> b_l``.
    """
    d = (delta - 2) // 2
    b = [start + l for l in range(5)]
    fwd, bwd = {}, {}
    nid = start + 5
    for l in range(5):
        fwd[l] = list(range(nid, nid + d))
        nid += d
        bwd[l] = list(range(nid, nid + d))
        nid += d
    # role groups: P owns b1, b2 and their paths, Q owns b3, b4, R owns b5
    rot = {1: (1, 2, 3), 2: (2, 3, 1), 0: (3, 1, 2)}[i % 3]
    P, Q, R = rot
    owner = {b[0]: P, b[1]: P, b[2]: Q, b[3]: Q, b[4]: R}
    for v in fwd[4] + bwd[0] + fwd[0] + bwd[1]:   # 51, 21, 12, 32
        owner[v] = P
    for v in fwd[1] + bwd[2] + fwd[2] + bwd[3]:   # 23, 43, 34, 54
        owner[v] = Q
    for v in fwd[3] + bwd[4]:                     # 45, 15
        owner[v] = R
    arcs = []
    for l in range(5):
        x, y = b[l], b[(l + 1) % 5]
        there = [x] + fwd[l] + [y]
        back = [y] + bwd[l] + [x]
        arcs += list(zip(there, there[1:])) + list(zip(back, back[1:]))
    vertices = [Vertex(v, owner[v], PAIR) for v in range(start, nid)]
    return vertices, arcs


def lb_general(delta: int, x: int = 1) -> PartitionEconomy:
    """``60x`` type-A and ``180x`` type-B gadgets over three orgs."""
    if delta < 3:
        raise ValueError("lb_general needs delta >= 3")
    if x < 1:
        raise ValueError("x must be >= 1")
    vertices, arcs = [], []
    nid = 0
    for i in range(1, 60 * x + 1):
        vs, ar = type_a_gadget(delta, i, nid)
        vertices += vs
        arcs += ar
        nid += len(vs)
    for i in range(1, 180 * x + 1):
        vs, ar = type_b_gadget(delta, i, nid)
        vertices += vs
        arcs += ar
        nid += len(vs)
    d = (delta - 2) // 2
    e = PartitionEconomy(vertices, arcs, delta, 3)
    assert len(e) == 60 * x * 3 * (delta - 1) + 180 * x * (10 * d + 5)
    return e


def score_gap(k: int) -> PartitionEconomy:
    """Org 1 holds ``k`` universal altruists (ids ``0..k-1``); orgs ``2..k+2`` hold ``k`` pairs each."""
    if k < 1:
        raise ValueError("k must be >= 1")
    vertices = [Vertex(a, 1, ALTRUIST) for a in range(k)]
    pairs = []
    for b in range(k + 1):
        for t in range(k):
            vid = k + b * k + t
            vertices.append(Vertex(vid, b + 2, PAIR))
            pairs.append(vid)
    arcs = [(a, p) for a in range(k) for p in pairs]
    e = PartitionEconomy(vertices, arcs, 2, k + 2)
    assert len(e) == k + k * (k + 1)
    return e


FIXTURES = {
    "fig1": lambda: fig1_instance(),
    "fig1_supplemented": lambda: fig1_instance(with_altruist=True),
    "lb_pairwise": lb_pairwise,
    "lb_triangle": lb_triangle,
    "lb_general": lb_general,
    "score_gap": score_gap,
}


def build_fixture(tag: str, *params: int) -> PartitionEconomy:
    try:
        fn = FIXTURES[tag]
    except KeyError:
        raise ValueError(f"unknown fixture {tag!r}; choose from {sorted(FIXTURES)}") from None
    return fn(*params)
