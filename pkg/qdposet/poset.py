# qdposet/poset.py — the ranked poset QD of quasistable pseudo-divisors

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
from networkx.algorithms import isomorphism

from qdposet.config import max_edges as configured_max_edges
from qdposet.divisors import (
    Divisor,
    Polarization,
    PseudoDivisor,
    canonical_polarization,
    divisor_bounds,
    elementary_specializations,
    is_quasistable_all_subsets,
    pushforward,
    pushforward_polarization,
    quasistability_test,
)
from qdposet.errors import (
    CarrierMismatchError,
    EnumerationLimitError,
    Falsifier,
    InvalidMappingError,
    NonCanonicalPolarizationError,
    PreconditionError,
)
from qdposet.graph import (
    Graph,
    GraphIso,
    biconnected_components,
    bridges_and_nd,
    contract_bridges,
    exceptional_id,
    is_nondisconnecting,
    is_valid_split,
    purify,
)

log = logging.getLogger(__name__)


# ----------------- Abstract Ranked Posets -----------------
@dataclass(frozen=True, eq=False)
class RankedPoset:
    """Elements 0..size-1 with cover pairs (parent, child); rank 0 on minimal elements."""

    size: int
    covers: tuple[tuple[int, int], ...]
    ranks: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    @classmethod
    def from_covers(cls, size: int, covers: Iterable[tuple[int, int]],
                    labels: Sequence[str] | None = None) -> "RankedPoset":
        """Rank is the longest path down to a minimal element; every cover must drop it by one."""
        covers = tuple(sorted(set((int(a), int(b)) for a, b in covers)))
        hasse = nx.DiGraph()
        hasse.add_nodes_from(range(size))
        for parent, child in covers:
            if not (0 <= parent < size and 0 <= child < size):
                raise PreconditionError(f"cover ({parent}, {child}) refers to a missing element")
            hasse.add_edge(parent, child)
        if not nx.is_directed_acyclic_graph(hasse):
            raise PreconditionError("cover relation has a cycle")
        ranks = [0] * size
        for node in reversed(list(nx.topological_sort(hasse))):
            children = list(hasse.successors(node))
            ranks[node] = 1 + max(ranks[c] for c in children) if children else 0
        bad = [(p, c) for p, c in covers if ranks[p] != ranks[c] + 1]
        if bad:
            raise PreconditionError(f"poset is not ranked: cover {bad[0]} skips a rank")
        return cls(size, covers, tuple(ranks), tuple(labels) if labels is not None else None)

    @cached_property
    def hasse(self) -> nx.DiGraph:
        h = nx.DiGraph()
        for i in range(self.size):
            h.add_node(i, rank=self.ranks[i])
        h.add_edges_from(self.covers)
        return h

    def parents(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self.hasse.predecessors(i)))

    def children(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self.hasse.successors(i)))

    @cached_property
    def maxima(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.size) if self.hasse.in_degree(i) == 0)

    @cached_property
    def rank_histogram(self) -> tuple[int, ...]:
        if not self.size:
            return ()
        counts = Counter(self.ranks)
        return tuple(counts[k] for k in range(max(self.ranks) + 1))

    def above(self, i: int) -> frozenset[int]:
        """Elements ≥ i."""
        return frozenset(nx.ancestors(self.hasse, i)) | {i}

    def leq(self, i: int, j: int) -> bool:
        return i == j or i in nx.descendants(self.hasse, j)


@dataclass(frozen=True, eq=False)
class PosetIso:
    """mapping[i] is the image of source element i."""

    source: RankedPoset
    target: RankedPoset
    mapping: tuple[int, ...]

    def __getitem__(self, i: int) -> int:
        return self.mapping[i]

    def inverse(self) -> "PosetIso":
        back = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            back[j] = i
        return PosetIso(self.target, self.source, tuple(back))

    def then(self, other: "PosetIso") -> "PosetIso":
        return PosetIso(self.source, other.target, tuple(other.mapping[j] for j in self.mapping))

    def is_valid(self) -> bool:
        """Bijective, rank-preserving and carrying covers onto covers."""
        if self.source.size != self.target.size or len(self.mapping) != self.source.size:
            return False
        if sorted(self.mapping) != list(range(self.target.size)):
            return False
        if any(self.source.ranks[i] != self.target.ranks[j] for i, j in enumerate(self.mapping)):
            return False
        image = {(self.mapping[a], self.mapping[b]) for a, b in self.source.covers}
        return image == set(self.target.covers)


# ----------------- QD Posets -----------------
@dataclass(frozen=True)
class Cover:
    parent: int
    child: int
    edge: str
    to: str


@dataclass(frozen=True, eq=False)
class QDPoset:
    graph: Graph
    basepoint: str
    polarization: Polarization
    canonical: bool
    elements: tuple[PseudoDivisor, ...]
    covers: tuple[Cover, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def index(self) -> dict[PseudoDivisor, int]:
        return {pd: i for i, pd in enumerate(self.elements)}

    @cached_property
    def ranked(self) -> RankedPoset:
        return RankedPoset(
            len(self.elements),
            tuple((c.parent, c.child) for c in self.covers),
            tuple(pd.rank for pd in self.elements),
        )

    def rank(self, i: int) -> int:
        return self.elements[i].rank

    @cached_property
    def _fibres(self) -> dict[frozenset[str], tuple[int, ...]]:
        fibres = {}
        for i, pd in enumerate(self.elements):
            fibres.setdefault(pd.edges, []).append(i)
        return {E: tuple(ids) for E, ids in fibres.items()}

    def fibre(self, E: Iterable[str]) -> tuple[int, ...]:
        """Indices of QD(Γ, E)."""
        return self._fibres.get(frozenset(E), ())

    def find(self, pd: PseudoDivisor) -> int | None:
        return self.index.get(pd)


def default_basepoint(g: Graph) -> str:
    return min(g.vertex_ids)


def _assemble(g: Graph, v0: str, mu: Polarization, canonical: bool,
              elements: Iterable[PseudoDivisor]) -> QDPoset:
    ordered = tuple(sorted(set(elements), key=lambda pd: pd.sort_key(g)))
    index = {pd: i for i, pd in enumerate(ordered)}
    covers = []
    for i, pd in enumerate(ordered):
        for step in elementary_specializations(g, pd):
            j = index.get(step.target)
            if j is not None:
                covers.append(Cover(i, j, step.edge, step.to))
    covers.sort(key=lambda c: (c.parent, c.child, c.edge, c.to))
    return QDPoset(g, v0, mu, canonical, ordered, tuple(covers))


def _resolve(g: Graph, v0: str | None, mu: Polarization | None) -> tuple[str, Polarization, bool]:
    v0 = default_basepoint(g) if v0 is None else v0
    if not g.has_vertex(v0):
        raise CarrierMismatchError(f"basepoint {v0!r} is not a vertex")
    canonical_mu = canonical_polarization(g)
    if mu is None:
        return v0, canonical_mu, True
    return v0, mu, mu == canonical_mu


def _check_size(g: Graph, cap: int | None):
    cap = configured_max_edges() if cap is None else cap
    if len(g.edges) > cap:
        raise EnumerationLimitError(
            f"graph has {len(g.edges)} edges; exhaustive enumeration is capped at {cap} "
            f"(raise QDPOSET_MAX_EDGES to override)"
        )


def _fibre(g: Graph, v0: str, mu: Polarization, E: frozenset[str]) -> list[PseudoDivisor]:
    """All quasistable D on Γ^E, searched inside the per-vertex bounds."""
    test = quasistability_test(g, v0, mu, E)
    bounds = divisor_bounds(g, mu, E)
    ids = g.vertex_ids
    *free, last = ids
    lo_last, hi_last = bounds[last]
    found = []
    for head in itertools.product(*(range(bounds[v][0], bounds[v][1] + 1) for v in free)):
        tail = test.degree - sum(head)
        if not lo_last <= tail <= hi_last:
            continue
        values = (*head, tail)
        if test.accepts(values):
            found.append(PseudoDivisor.make(E, dict(zip(ids, values))))
    return found


def enumerate_qd(g: Graph, v0: str | None = None, mu: Polarization | None = None,
                 max_edges: int | None = None) -> QDPoset:
    """QD_{v0,μ}(Γ); E runs over nondisconnecting subsets of ND grown level by level."""
    _check_size(g, max_edges)
    v0, mu, canonical = _resolve(g, v0, mu)
    nd = g.sort_edges(bridges_and_nd(g)[1])
    elements = []
    level = [()]
    while level:
        grown = []
        for combo in level:
            elements.extend(_fibre(g, v0, mu, frozenset(nd[i] for i in combo)))
            start = combo[-1] + 1 if combo else 0
            for i in range(start, len(nd)):
                candidate = combo + (i,)
                # supersets of a disconnecting set disconnect too
                if is_nondisconnecting(g, [nd[j] for j in candidate]):
                    grown.append(candidate)
        level = grown
    poset = _assemble(g, v0, mu, canonical, elements)
    log.debug("QD(%d vertices, %d edges, v0=%s): %d elements, ranks %s",
              len(g.vertices), len(g.edges), v0, len(poset), poset.ranked.rank_histogram)
    return poset


def brute_force_qd(g: Graph, v0: str | None = None, mu: Polarization | None = None,
                   max_edges: int | None = None) -> QDPoset:
    """Oracle: every E ⊆ E(Γ), quasistability over all vertex subsets, no pruning."""
    _check_size(g, max_edges)
    v0, mu, canonical = _resolve(g, v0, mu)
    ids = g.vertex_ids
    elements = []
    for size in range(len(g.edges) + 1):
        for E in itertools.combinations(g.edge_ids, size):
            bounds = divisor_bounds(g, mu, E)
            for values in itertools.product(*(range(bounds[v][0], bounds[v][1] + 1) for v in ids)):
                pd = PseudoDivisor.make(E, dict(zip(ids, values)))
                if is_quasistable_all_subsets(g, v0, mu, pd):
                    elements.append(pd)
    return _assemble(g, v0, mu, canonical, elements)


def maximal_elements(p: QDPoset) -> tuple[int, ...]:
    return p.ranked.maxima


# ----------------- Isomorphisms Between QD Posets -----------------
def translate_basepoint(p: QDPoset, v1: str) -> tuple[QDPoset, PosetIso]:
    """(E, D) ↦ (E, D + v0 − v1); defined for the canonical polarization only."""
    if not p.canonical:
        raise NonCanonicalPolarizationError("basepoint translation needs the canonical polarization")
    if not p.graph.has_vertex(v1):
        raise CarrierMismatchError(f"basepoint {v1!r} is not a vertex")
    shift = Divisor.of({p.basepoint: 1}) - Divisor.of({v1: 1})
    images = [PseudoDivisor(pd.edges, pd.divisor + shift) for pd in p.elements]
    q = _assemble(p.graph, v1, p.polarization, True, images)
    iso = PosetIso(p.ranked, q.ranked, tuple(q.index[pd] for pd in images))
    if not iso.is_valid():
        raise Falsifier("Prop one-QD", "basepoint translation is not a poset isomorphism",
                        {"from": p.basepoint, "to": v1})
    return q, iso


def pure_reduction(p: QDPoset) -> tuple[QDPoset, PosetIso]:
    """QD(Γ) → QD(Γ0) for the pure graph Γ0, via (E, D) ↦ (E, D − Σ w(v)·v)."""
    if not p.canonical:
        raise NonCanonicalPolarizationError("pure reduction is stated for the canonical polarization")
    g0 = purify(p.graph)
    weights = Divisor.of({v.id: v.weight for v in p.graph.vertices})
    q = enumerate_qd(g0, p.basepoint)
    return q, _map_elements(p, q, [PseudoDivisor(pd.edges, pd.divisor - weights) for pd in p.elements],
                            "Prop pure-reduction")


def bridge_contraction(p: QDPoset) -> tuple[QDPoset, PosetIso]:
    """Pushforward along Γ → Γ/Bridges(Γ)."""
    spec = contract_bridges(p.graph)
    mu = pushforward_polarization(spec, p.polarization)
    q = enumerate_qd(spec.target, spec.vertex_map[p.basepoint], None if p.canonical else mu)
    return q, _map_elements(p, q, [pushforward(spec, pd) for pd in p.elements], "Remark iso-bridge")


def induced_poset_iso(p: QDPoset, q: QDPoset, iso: GraphIso) -> PosetIso:
    """The poset isomorphism a graph isomorphism induces (composed with translation if needed)."""
    vm, em = iso.vertex_map, iso.edge_map
    shift = Divisor()
    if vm[p.basepoint] != q.basepoint:
        if not (p.canonical and q.canonical):
            raise NonCanonicalPolarizationError("basepoints differ and the polarization is not canonical")
        shift = Divisor.of({vm[p.basepoint]: 1}) - Divisor.of({q.basepoint: 1})
    exceptional = {exceptional_id(e): exceptional_id(em[e]) for e in em}
    images = []
    for pd in p.elements:
        moved = Divisor.of({vm.get(v) or exceptional[v]: k for v, k in pd.divisor.items})
        images.append(PseudoDivisor(frozenset(em[e] for e in pd.edges), moved + shift))
    try:
        return _map_elements(p, q, images, "graph isomorphism")
    except Falsifier as exc:
        raise InvalidMappingError(exc.message) from None


def _map_elements(p: QDPoset, q: QDPoset, images: Sequence[PseudoDivisor], statement: str) -> PosetIso:
    missing = [pd for pd in images if pd not in q.index]
    if missing or len(images) != len(q):
        raise Falsifier(statement, "image is not the target poset",
                        {"missing": len(missing), "source": len(p), "target": len(q)})
    iso = PosetIso(p.ranked, q.ranked, tuple(q.index[pd] for pd in images))
    if not iso.is_valid():
        raise Falsifier(statement, "element map is not a poset isomorphism", {"size": len(p)})
    return iso


# ----------------- Product Decomposition -----------------
def product_poset(p1: RankedPoset, p2: RankedPoset) -> RankedPoset:
    """Componentwise order on pairs; pair (i, j) has index i * |p2| + j."""
    n2 = p2.size
    covers = [(a * n2 + j, b * n2 + j) for a, b in p1.covers for j in range(n2)]
    covers += [(i * n2 + a, i * n2 + b) for i in range(p1.size) for a, b in p2.covers]
    ranks = tuple(p1.ranks[i] + p2.ranks[j] for i in range(p1.size) for j in range(n2))
    labels = tuple(f"({i},{j})" for i in range(p1.size) for j in range(n2))
    return RankedPoset(p1.size * n2, tuple(sorted(covers)), ranks, labels)


def product_split(g: Graph, v0: str, split: tuple[Graph, Graph]) -> PosetIso:
    """σ((E1, D1), (E2, D2)) = (E1 ∪ E2, D1 + D2 + v0) onto QD_{v0}(Γ)."""
    g1, g2 = split
    if not g.is_pure:
        raise PreconditionError("product decomposition needs a pure graph")
    if not is_valid_split(g, v0, g1, g2):
        raise PreconditionError(f"not a split of the graph at {v0!r}")
    p, p1, p2 = enumerate_qd(g, v0), enumerate_qd(g1, v0), enumerate_qd(g2, v0)
    source = product_poset(p1.ranked, p2.ranked)
    glue = Divisor.of({v0: 1})
    mapping = []
    for a in p1.elements:
        for b in p2.elements:
            image = PseudoDivisor(a.edges | b.edges, a.divisor + b.divisor + glue)
            if image not in p.index:
                raise Falsifier("Prop 2-decomposition", "σ leaves QD(Γ)",
                                {"vertex": v0, "edges": sorted(image.edges)})
            mapping.append(p.index[image])
    iso = PosetIso(source, p.ranked, tuple(mapping))
    if not iso.is_valid():
        raise Falsifier("Prop 2-decomposition", "σ is not an order isomorphism",
                        {"vertex": v0, "product": source.size, "target": len(p)})
    return iso


def decomposition_sizes(g: Graph) -> tuple[int, ...]:
    """|QD| of every biconnected component of the pure graph; their product is |QD(Γ)|."""
    return tuple(len(enumerate_qd(purify(c.graph))) for c in biconnected_components(g))


def decomposition_product(g: Graph) -> int:
    return math.prod(decomposition_sizes(g))


# ----------------- Upper Connectedness -----------------
def is_upper_connected(p: QDPoset, i: int, j: int) -> bool:
    """Zig-zag inside QD(Γ, E) through common parents of consecutive elements."""
    E = p.elements[i].edges
    if p.elements[j].edges != E:
        raise PreconditionError("upper connectedness compares elements with the same edge set")
    if i == j:
        return True
    fibre = set(p.fibre(E))
    links = nx.Graph()
    links.add_nodes_from(fibre)
    for k in range(len(p)):
        if p.rank(k) != len(E) + 1:
            continue
        below = [c for c in p.ranked.children(k) if c in fibre]
        links.add_edges_from(itertools.combinations(below, 2))
    return nx.has_path(links, i, j)


# ----------------- Poset Isomorphism -----------------
def _as_ranked(x: "QDPoset | RankedPoset") -> RankedPoset:
    return x.ranked if isinstance(x, QDPoset) else x


def _refine(a: RankedPoset, b: RankedPoset, labels_a, labels_b) -> tuple[list[int], list[int]]:
    """Joint colour refinement: rank, up/down degree, label, then neighbour colour multisets."""
    def initial(x: RankedPoset, labels) -> list:
        return [
            (x.ranks[i], x.hasse.in_degree(i), x.hasse.out_degree(i), labels[i] if labels else 0)
            for i in range(x.size)
        ]

    def compress(sig_a: list, sig_b: list) -> tuple[list[int], list[int]]:
        palette = {s: k for k, s in enumerate(sorted(set(sig_a) | set(sig_b)))}
        return [palette[s] for s in sig_a], [palette[s] for s in sig_b]

    colours_a, colours_b = compress(initial(a, labels_a), initial(b, labels_b))
    while True:
        def signature(x: RankedPoset, colours: list[int]) -> list:
            return [
                (colours[i],
                 tuple(sorted(colours[p] for p in x.hasse.predecessors(i))),
                 tuple(sorted(colours[c] for c in x.hasse.successors(i))))
                for i in range(x.size)
            ]

        next_a, next_b = compress(signature(a, colours_a), signature(b, colours_b))
        if len(set(next_a) | set(next_b)) == len(set(colours_a) | set(colours_b)):
            return next_a, next_b
        colours_a, colours_b = next_a, next_b


def poset_isomorphism(p: "QDPoset | RankedPoset", q: "QDPoset | RankedPoset",
                      labels_p: Sequence | None = None, labels_q: Sequence | None = None) -> PosetIso | None:
    """Partition refinement on the Hasse diagrams, then VF2 backtracking restricted to colour classes."""
    a, b = _as_ranked(p), _as_ranked(q)
    if a.size != b.size or len(a.covers) != len(b.covers) or a.rank_histogram != b.rank_histogram:
        return None
    colours_a, colours_b = _refine(a, b, labels_p, labels_q)
    if Counter(colours_a) != Counter(colours_b):
        return None
    ha, hb = a.hasse.copy(), b.hasse.copy()
    nx.set_node_attributes(ha, dict(enumerate(colours_a)), "colour")
    nx.set_node_attributes(hb, dict(enumerate(colours_b)), "colour")
    matcher = isomorphism.DiGraphMatcher(ha, hb, node_match=isomorphism.categorical_node_match("colour", None))
    found = next(matcher.isomorphisms_iter(), None)
    if found is None:
        return None
    iso = PosetIso(a, b, tuple(found[i] for i in range(a.size)))
    log.debug("poset isomorphism found on %d elements", a.size)
    return iso


# ----------------- Hasse Export -----------------
def element_label(g: Graph, pd: PseudoDivisor) -> str:
    edges = ",".join(sorted(pd.edges))
    carrier = list(g.vertex_ids) + [exceptional_id(e) for e in g.sort_edges(pd.edges)]
    values = " ".join(f"{v}={pd.divisor[v]}" for v in carrier)
    return f"({{{edges}}} | {values})"


def hasse_export(p: QDPoset) -> str:
    """DOT digraph, edges parent → child, stable ordering."""
    lines = ["digraph QD {", "  rankdir=TB;"]
    for i, pd in enumerate(p.elements):
        label = element_label(p.graph, pd).replace('"', '\\"')
        lines.append(f'  n{i} [label="{label}"];')
    for c in p.covers:
        lines.append(f'  n{c.parent} -> n{c.child} [label="{c.edge}/{c.to}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
