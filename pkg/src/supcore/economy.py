"""Partition exchange economies: data model, generation, serialization.

A vertex is a donor/patient pair, an unpaired patient or an altruistic
donor.  Organizations are numbered ``1..n_orgs``; organization ``0`` is the
platform and may only hold altruists (the designer's endowment).

Arcs into altruists are implicit: an altruist's dummy patient accepts any
donor, so every non-altruist vertex points at every altruist.  Unpaired
patients carry a dummy donor that only gives to those dummy patients, so
their only out-arcs are the implicit ones.  Explicit arcs that merely
restate this convention are dropped when an instance is built.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadKindArc,
    DanglingArc,
    DuplicateId,
    InstanceError,
    SchemaError,
    SelfLoop,
    ShapeMismatch,
    UnknownOrg,
)

PAIR = "pair"
UNPAIRED = "unpaired"
ALTRUIST = "altruist"
KINDS = (PAIR, UNPAIRED, ALTRUIST)
BLOOD_TYPES = ("O", "A", "B", "AB")

_ABO = {
    "O": frozenset(BLOOD_TYPES),
    "A": frozenset({"A", "AB"}),
    "B": frozenset({"B", "AB"}),
    "AB": frozenset({"AB"}),
}


def abo_compatible(donor: str, patient: str) -> bool:
    return patient in _ABO[donor]


@dataclass(frozen=True)
class Vertex:
    id: int
    org: int
    kind: str = PAIR
    donor_blood: str | None = None
    patient_blood: str | None = None
    cpra: Fraction | None = None

    @property
    def is_altruist(self) -> bool:
        return self.kind == ALTRUIST

    @property
    def has_donor(self) -> bool:
        return self.kind != UNPAIRED

    @property
    def has_patient(self) -> bool:
        return self.kind != ALTRUIST


class PartitionEconomy:
    """Immutable compatibility graph with an organization partition.

    ``arcs`` holds only the explicit arcs; use :meth:`has_arc` and
    :meth:`successors` for the effective relation that includes the implicit
    arcs into altruists.
    """

    __slots__ = ("vertices", "arcs", "delta", "n_orgs", "_by_id", "_succ", "_pred",
                 "_altruists", "_members")

    def __init__(self, vertices: Sequence[Vertex], arcs: Iterable[tuple[int, int]],
                 delta: int, n_orgs: int):
        self.vertices = tuple(sorted(vertices, key=lambda v: v.id))
        self.arcs = frozenset(arcs)
        self.delta = int(delta)
        self.n_orgs = int(n_orgs)
        self._by_id = {v.id: v for v in self.vertices}
        self._altruists = tuple(v.id for v in self.vertices if v.is_altruist)
        succ: dict[int, list[int]] = {v.id: [] for v in self.vertices}
        pred: dict[int, list[int]] = {v.id: [] for v in self.vertices}
        for u, w in self.arcs:
            succ[u].append(w)
            pred[w].append(u)
        for a in self._altruists:
            for v in self.vertices:
                if not v.is_altruist:
                    succ[v.id].append(a)
                    pred[a].append(v.id)
        self._succ = {k: tuple(sorted(s)) for k, s in succ.items()}
        self._pred = {k: tuple(sorted(s)) for k, s in pred.items()}
        members: dict[int, list[int]] = {}
        for v in self.vertices:
            members.setdefault(v.org, []).append(v.id)
        self._members = {k: tuple(s) for k, s in members.items()}

    # -- lookups ---------------------------------------------------------
    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, vid: int) -> Vertex:
        return self._by_id[vid]

    def __contains__(self, vid: int) -> bool:
        return vid in self._by_id

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(self._by_id)

    @property
    def orgs(self) -> range:
        return range(1, self.n_orgs + 1)

    def has_arc(self, u: int, v: int) -> bool:
        if (u, v) in self.arcs:
            return True
        return self._by_id[v].is_altruist and not self._by_id[u].is_altruist

    def successors(self, u: int) -> tuple[int, ...]:
        return self._succ[u]

    def predecessors(self, v: int) -> tuple[int, ...]:
        return self._pred[v]

    def in_degree(self, v: int) -> int:
        return len(self._pred[v])

    def members(self, org: int) -> tuple[int, ...]:
        """All vertices endowed to ``org`` (``V^org``)."""
        return self._members.get(org, ())

    def patients(self, org: int) -> tuple[int, ...]:
        """Non-altruist vertices of ``org`` (``U^org``)."""
        return tuple(v for v in self.members(org) if not self._by_id[v].is_altruist)

    @property
    def platform(self) -> tuple[int, ...]:
        return self.members(0)

    @property
    def altruists(self) -> tuple[int, ...]:
        return self._altruists

    def player_ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.vertices if v.org != 0)

    def without_platform(self) -> "PartitionEconomy":
        return induced_subeconomy(self, set(self.orgs))

    def with_delta(self, delta: int) -> "PartitionEconomy":
        return PartitionEconomy(self.vertices, self.arcs, delta, self.n_orgs)

    # -- structural equality ----------------------------------------------
    def _key(self):
        return (self.vertices, self.arcs, self.delta, self.n_orgs)

    def __eq__(self, other):
        if not isinstance(other, PartitionEconomy):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash((self.vertices, self.arcs, self.delta, self.n_orgs))

    def __repr__(self):
        n_alt = len(self._altruists)
        return (f"PartitionEconomy(|V|={len(self.vertices)}, altruists={n_alt}, "
                f"arcs={len(self.arcs)}, delta={self.delta}, n_orgs={self.n_orgs})")


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _coerce_vertex(raw) -> Vertex:
    if isinstance(raw, Vertex):
        return raw
    cpra = raw.get("cpra")
    return Vertex(
        id=int(raw["id"]),
        org=int(raw.get("org", 1)),
        kind=raw.get("kind", PAIR),
        donor_blood=raw.get("donor_blood"),
        patient_blood=raw.get("patient_blood"),
        cpra=None if cpra is None else Fraction(str(cpra)),
    )


def build_instance(vertices, arcs, delta: int, n_orgs: int | None = None) -> PartitionEconomy:
    """Validate raw vertex/arc lists and return an economy.

    Vertices may be :class:`Vertex` objects or mappings with the JSON
    field names.  ``n_orgs`` defaults to the largest organization index.
    """
    verts = [_coerce_vertex(v) for v in vertices]
    by_id: dict[int, Vertex] = {}
    for v in verts:
        if v.id in by_id:
            raise DuplicateId(f"duplicate vertex id {v.id}")
        if v.kind not in KINDS:
            raise InstanceError(f"vertex {v.id}: unknown kind {v.kind!r}")
        if v.org < 0:
            raise UnknownOrg(f"vertex {v.id}: negative org {v.org}")
        if v.org == 0 and not v.is_altruist:
            raise InstanceError(f"vertex {v.id}: platform (org 0) may only hold altruists")
        if v.is_altruist and (v.patient_blood is not None or v.cpra is not None):
            raise InstanceError(f"altruist {v.id} cannot carry patient data")
        if v.kind == UNPAIRED and v.donor_blood is not None:
            raise InstanceError(f"unpaired patient {v.id} cannot carry donor data")
        if v.cpra is not None and not (0 <= v.cpra <= 1):
            raise InstanceError(f"vertex {v.id}: cpra {v.cpra} outside [0, 1]")
        by_id[v.id] = v
    if delta < 2:
        raise InstanceError(f"delta must be >= 2, got {delta}")

    kept = set()
    for arc in arcs:
        u, w = int(arc[0]), int(arc[1])
        if u == w:
            raise SelfLoop(f"self-loop on vertex {u}")
        for end in (u, w):
            if end not in by_id:
                raise DanglingArc(f"arc ({u}, {w}) references unknown vertex {end}")
        tail, head = by_id[u], by_id[w]
        if head.is_altruist:
            if tail.is_altruist:
                raise BadKindArc(f"arc ({u}, {w}) joins two altruists")
            continue  # implicit
        if tail.kind == UNPAIRED:
            raise BadKindArc(f"arc ({u}, {w}) leaves unpaired patient {u}")
        kept.add((u, w))

    inferred = max((v.org for v in verts), default=0)
    if n_orgs is None:
        n_orgs = inferred
    elif n_orgs < inferred:
        raise UnknownOrg(f"vertex org {inferred} exceeds n_orgs={n_orgs}")
    return PartitionEconomy(verts, kept, delta, n_orgs)


def induced_subeconomy(e: PartitionEconomy, orgs, include_platform: bool = False) -> PartitionEconomy:
    """Restrict ``e`` to ``V^i`` for ``i`` in ``orgs`` (ids and org labels kept)."""
    orgs = set(orgs)
    for i in orgs:
        if i not in e.orgs and not (i == 0 and include_platform):
            raise UnknownOrg(f"unknown organization {i}")
    if include_platform:
        orgs.add(0)
    keep = [v for v in e.vertices if v.org in orgs]
    ids = {v.id for v in keep}
    arcs = [(u, w) for u, w in e.arcs if u in ids and w in ids]
    return PartitionEconomy(keep, arcs, e.delta, e.n_orgs)


def restrict_to(e: PartitionEconomy, vertex_ids) -> PartitionEconomy:
    ids = set(vertex_ids)
    keep = [v for v in e.vertices if v.id in ids]
    arcs = [(u, w) for u, w in e.arcs if u in ids and w in ids]
    return PartitionEconomy(keep, arcs, e.delta, e.n_orgs)


def with_altruists(e: PartitionEconomy, targets: Sequence[Iterable[int] | None],
                   org: int = 0, donor_blood: str | None = None):
    """Append altruists to ``e``.

    ``targets[k]`` lists the patients the k-th new altruist can give to;
    ``None`` makes it universal (an arc to every vertex with a patient).
    Returns ``(economy, new_ids)``.
    """
    next_id = max(e.ids, default=-1) + 1
    new_vertices = list(e.vertices)
    arcs = set(e.arcs)
    new_ids = []
    patients = [v.id for v in e.vertices if v.has_patient]
    for k, tgt in enumerate(targets):
        aid = next_id + k
        new_ids.append(aid)
        new_vertices.append(Vertex(aid, org, ALTRUIST, donor_blood=donor_blood))
        for p in (patients if tgt is None else tgt):
            if e[p].is_altruist:
                raise BadKindArc(f"altruist {aid} cannot give to altruist {p}")
            arcs.add((aid, p))
    return PartitionEconomy(new_vertices, arcs, e.delta, e.n_orgs), new_ids


# ---------------------------------------------------------------------------
# random generation
# ---------------------------------------------------------------------------

# (cpra value, probability)
CPRA_DISTRIBUTIONS: dict[str, tuple[tuple[float, float], ...]] = {
    "saidman": ((0.05, 0.7019), (0.45, 0.2), (0.90, 0.0981)),
    "sensitized": ((0.05, 0.25), (0.45, 0.15), (0.75, 0.15), (0.90, 0.2), (0.98, 0.25)),
    "none": ((0.0, 1.0),),
}

SAIDMAN_BLOOD = (0.4814, 0.3373, 0.1428, 0.0385)


@dataclass(frozen=True)
class GeneratorConfig:
    n_pairs: int = 100
    n_altruists: int = 0
    n_orgs: int = 1
    seed: int = 0
    blood_freq: tuple[float, float, float, float] = SAIDMAN_BLOOD
    cpra: str = "sensitized"
    dirichlet_alpha: float = 1.0
    altruist_mode: str = "pool"
    delta: int = 3

    def __post_init__(self):
        if min(self.n_pairs, self.n_altruists) < 0 or self.n_orgs < 1:
            raise InstanceError("counts must be non-negative and n_orgs >= 1")
        if len(self.blood_freq) != 4 or min(self.blood_freq) < 0:
            raise InstanceError("blood_freq must be 4 non-negative probabilities")
        if not math.isclose(sum(self.blood_freq), 1.0, abs_tol=1e-9):
            raise InstanceError(f"blood_freq sums to {sum(self.blood_freq)}, not 1")
        if self.cpra not in CPRA_DISTRIBUTIONS:
            raise InstanceError(f"unknown cpra distribution {self.cpra!r}")
        if self.dirichlet_alpha <= 0:
            raise InstanceError("dirichlet_alpha must be positive")
        if self.altruist_mode not in ("pool", "synthetic"):
            raise InstanceError(f"unknown altruist_mode {self.altruist_mode!r}")


def _draw_orgs(rng: np.random.Generator, count: int, n_orgs: int, alpha: float) -> np.ndarray:
    weights = rng.dirichlet(np.full(n_orgs, float(alpha)))
    return rng.choice(n_orgs, size=count, p=weights) + 1


def generate_random(config: GeneratorConfig) -> PartitionEconomy:
    """Saidman-style random instance; a pure function of ``config``.

    Pairs whose donor could give to their own patient are redrawn.  The
    pool altruists belong to the platform (org 0).
    """
    rng = np.random.default_rng(config.seed)
    cpra_values = np.array([c for c, _ in CPRA_DISTRIBUTIONS[config.cpra]])
    cpra_probs = np.array([p for _, p in CPRA_DISTRIBUTIONS[config.cpra]])
    blood = np.array(config.blood_freq, dtype=float)

    donors, patients, cpras = [], [], []
    while len(donors) < config.n_pairs:
        d = BLOOD_TYPES[rng.choice(4, p=blood)]
        p = BLOOD_TYPES[rng.choice(4, p=blood)]
        c = float(cpra_values[rng.choice(len(cpra_values), p=cpra_probs)])
        if abo_compatible(d, p) and rng.random() >= c:
            continue  # self-compatible pair never enters the pool
        donors.append(d)
        patients.append(p)
        cpras.append(c)
    alt_blood = [BLOOD_TYPES[i] for i in rng.choice(4, size=config.n_altruists, p=blood)]
    orgs = _draw_orgs(rng, config.n_pairs, config.n_orgs, config.dirichlet_alpha)

    vertices = [
        Vertex(k, int(orgs[k]), PAIR, donors[k], patients[k], Fraction(str(cpras[k])))
        for k in range(config.n_pairs)
    ]
    vertices += [
        Vertex(config.n_pairs + k, 0, ALTRUIST, donor_blood=alt_blood[k])
        for k in range(config.n_altruists)
    ]

    n = config.n_pairs
    arcs = []
    if n:
        draws = rng.random((n + config.n_altruists, n))
        cpra_arr = np.array(cpras)
        for u in range(n + config.n_altruists):
            dblood = donors[u] if u < n else alt_blood[u - n]
            universal = u >= n and config.altruist_mode == "synthetic"
            for v in range(n):
                if u == v:
                    continue
                if universal or (abo_compatible(dblood, patients[v]) and draws[u, v] > cpra_arr[v]):
                    arcs.append((u, v))
    return PartitionEconomy(vertices, arcs, config.delta, config.n_orgs if n else 0)


def assign_orgs(e: PartitionEconomy, n_orgs: int, seed: int, alpha: float = 1.0) -> PartitionEconomy:
    """Redistribute all player vertices over ``n_orgs`` organizations."""
    rng = np.random.default_rng(seed)
    players = [v for v in e.vertices if v.org != 0]
    labels = _draw_orgs(rng, len(players), n_orgs, alpha)
    relabel = {v.id: int(o) for v, o in zip(players, labels)}
    verts = [Vertex(v.id, relabel.get(v.id, v.org), v.kind, v.donor_blood, v.patient_blood, v.cpra)
             for v in e.vertices]
    return PartitionEconomy(verts, e.arcs, e.delta, n_orgs)


def sample_cohort(e: PartitionEconomy, size: int, seed: int) -> PartitionEconomy:
    """Keep ``size`` player vertices drawn uniformly without replacement (platform kept)."""
    players = [v.id for v in e.vertices if v.org != 0]
    if size > len(players):
        raise InstanceError(f"cohort {size} exceeds {len(players)} player vertices")
    rng = np.random.default_rng(seed)
    chosen = set(int(x) for x in rng.choice(players, size=size, replace=False))
    return restrict_to(e, chosen | set(e.platform))


def generate_typed(n_types: int, n_vertices: int, n_orgs: int, seed: int,
                   arc_prob: float = 0.5, delta: int = 3, mutual: bool = False) -> PartitionEconomy:
    """Random economy whose arcs depend only on vertex types.

    A type-level digraph without loops is drawn first (symmetric when
    ``mutual``); every vertex gets a type, every type is used at least once
    when ``n_vertices >= n_types``, and orgs are uniform.
    """
    rng = np.random.default_rng(seed)
    T = rng.random((n_types, n_types)) < arc_prob
    np.fill_diagonal(T, False)
    if mutual:
        T = np.triu(T, 1)
        T = T | T.T
    base = list(range(min(n_types, n_vertices)))
    types = base + [int(t) for t in rng.integers(0, n_types, size=n_vertices - len(base))]
    types = [int(t) for t in rng.permutation(types)]
    orgs = [int(o) for o in rng.integers(1, n_orgs + 1, size=n_vertices)]
    vertices = [Vertex(k, orgs[k], PAIR) for k in range(n_vertices)]
    arcs = [(u, w) for u in range(n_vertices) for w in range(n_vertices)
            if u != w and T[types[u], types[w]]]
    return PartitionEconomy(vertices, arcs, delta, n_orgs)


# ---------------------------------------------------------------------------
# one-sided economies
# ---------------------------------------------------------------------------

def reduce_one_sided(goods_owner: Sequence[int], positions: Sequence[int],
                     alpha: Sequence) -> PartitionEconomy:
    """Bipartite economy for agents with binary assignment valuations.

    ``goods_owner[g]`` is the agent (1-based) endowed with good ``g``;
    ``positions[i-1]`` is ``|J^i|``; ``alpha[i-1]`` is the 0/1 matrix of
    shape ``(len(goods_owner), positions[i-1])``.  Goods become altruists
    owned by their agent, positions become pairs, and a good and a position
    are mutually compatible iff the matrix entry is 1.
    """
    m = len(goods_owner)
    n = len(positions)
    if len(alpha) != n:
        raise ShapeMismatch(f"{len(alpha)} matrices for {n} agents")
    for g, owner in enumerate(goods_owner):
        if not 1 <= owner <= n:
            raise UnknownOrg(f"good {g} owned by unknown agent {owner}")
    vertices = [Vertex(g, int(goods_owner[g]), ALTRUIST) for g in range(m)]
    arcs = []
    nid = m
    for i in range(n):
        mat = np.asarray(alpha[i], dtype=int).reshape(-1, positions[i]) if m else np.zeros((0, positions[i]))
        if mat.shape != (m, positions[i]):
            raise ShapeMismatch(f"agent {i + 1}: alpha shape {mat.shape}, expected {(m, positions[i])}")
        if not np.isin(mat, (0, 1)).all():
            raise ShapeMismatch(f"agent {i + 1}: alpha must be 0/1")
        for j in range(positions[i]):
            vertices.append(Vertex(nid, i + 1, PAIR))
            arcs.extend((g, nid) for g in range(m) if mat[g, j])
            nid += 1
    return PartitionEconomy(vertices, arcs, 2, n)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def to_json_dict(e: PartitionEconomy) -> dict:
    verts = []
    for v in e.vertices:
        d = {"id": v.id, "org": v.org, "kind": v.kind}
        if v.donor_blood is not None:
            d["donor_blood"] = v.donor_blood
        if v.patient_blood is not None:
            d["patient_blood"] = v.patient_blood
        if v.cpra is not None:
            d["cpra"] = float(v.cpra)
        verts.append(d)
    return {
        "delta": e.delta,
        "n_orgs": e.n_orgs,
        "vertices": verts,
        "arcs": [list(a) for a in sorted(e.arcs)],
    }


def from_json_dict(doc: Mapping) -> PartitionEconomy:
    if not isinstance(doc, Mapping):
        raise SchemaError("", "top level must be an object")
    for key in ("delta", "vertices", "arcs"):
        if key not in doc:
            raise SchemaError(f"/{key}", "missing")
    if not isinstance(doc["delta"], int) or isinstance(doc["delta"], bool):
        raise SchemaError("/delta", "must be an integer")
    if not isinstance(doc["vertices"], list):
        raise SchemaError("/vertices", "must be an array")
    if not isinstance(doc["arcs"], list):
        raise SchemaError("/arcs", "must be an array")
    verts = []
    for k, raw in enumerate(doc["vertices"]):
        ptr = f"/vertices/{k}"
        if not isinstance(raw, Mapping):
            raise SchemaError(ptr, "must be an object")
        for key in ("id", "org", "kind"):
            if key not in raw:
                raise SchemaError(f"{ptr}/{key}", "missing")
        if not isinstance(raw["id"], int):
            raise SchemaError(f"{ptr}/id", "must be an integer")
        if not isinstance(raw["org"], int):
            raise SchemaError(f"{ptr}/org", "must be an integer")
        if raw["kind"] not in KINDS:
            raise SchemaError(f"{ptr}/kind", f"must be one of {KINDS}")
        for key in ("donor_blood", "patient_blood"):
            if raw.get(key) is not None and raw[key] not in BLOOD_TYPES:
                raise SchemaError(f"{ptr}/{key}", f"must be one of {BLOOD_TYPES}")
        if raw.get("cpra") is not None and not isinstance(raw["cpra"], (int, float)):
            raise SchemaError(f"{ptr}/cpra", "must be a number")
        verts.append(raw)
    arcs = []
    for k, arc in enumerate(doc["arcs"]):
        if (not isinstance(arc, list) or len(arc) != 2
                or not all(isinstance(x, int) for x in arc)):
            raise SchemaError(f"/arcs/{k}", "must be a pair of integers")
        arcs.append(tuple(arc))
    n_orgs = doc.get("n_orgs")
    if n_orgs is not None and not isinstance(n_orgs, int):
        raise SchemaError("/n_orgs", "must be an integer")
    return build_instance(verts, arcs, doc["delta"], n_orgs)


def dumps(e: PartitionEconomy) -> str:
    return json.dumps(to_json_dict(e), sort_keys=True, indent=1) + "\n"


def save_json(e: PartitionEconomy, path) -> None:
    Path(path).write_text(dumps(e), encoding="utf-8")


def load_json(path) -> PartitionEconomy:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from exc
    return from_json_dict(doc)
