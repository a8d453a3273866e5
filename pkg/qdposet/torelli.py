# qdposet/torelli.py — recovering a graph from its poset of quasistable pseudo-divisors

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple

from networkx.algorithms import isomorphism

from qdposet.divisors import (
    Divisor,
    PseudoDivisor,
    elementary_specializations,
    equivalent_divisor,
    normalize_edges,
)
from qdposet.errors import (
    Falsifier,
    HypothesisNotSatisfied,
    InvalidMappingError,
    PreconditionError,
)
from qdposet.graph import (
    Graph,
    GraphIso,
    are_parallel,
    articulation_vertices,
    biconnected_components,
    bond_sides,
    bridges_and_nd,
    contract_bridges,
    exceptional_id,
    graph_isomorphic,
    is_biconnected,
    is_bond,
    is_weak_cyclic_equivalence,
    purify,
    spanning_trees,
    special_pairs,
    verify_graph_isomorphism,
    vertex_subgraph,
)
from qdposet.poset import PosetIso, QDPoset, RankedPoset, enumerate_qd, poset_isomorphism

log = logging.getLogger(__name__)


# ----------------- Model Posets -----------------
@dataclass(frozen=True, eq=False)
class ModelPoset:
    name: str
    labels: tuple[str, ...]
    ranks: tuple[int, ...]
    covers: tuple[tuple[str, str], ...]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @cached_property
    def ranked(self) -> RankedPoset:
        return RankedPoset(
            len(self.labels),
            tuple(sorted((self.index(a), self.index(b)) for a, b in self.covers)),
            self.ranks,
            self.labels,
        )


P = ModelPoset(
    "P",
    ("alpha", "beta", "gamma", "delta"),
    (1, 1, 0, 0),
    (("alpha", "gamma"), ("alpha", "delta"), ("beta", "gamma"), ("beta", "delta")),
)

R = ModelPoset(
    "R",
    ("alpha1", "beta1", "beta2", "beta3", "beta4", "gamma1", "gamma2", "gamma3"),
    (2, 1, 1, 1, 1, 0, 0, 0),
    (
        ("alpha1", "beta1"), ("alpha1", "beta2"), ("alpha1", "beta3"), ("alpha1", "beta4"),
        ("beta1", "gamma1"), ("beta1", "gamma2"), ("beta2", "gamma1"), ("beta2", "gamma2"),
        ("beta3", "gamma2"), ("beta3", "gamma3"), ("beta4", "gamma2"), ("beta4", "gamma3"),
    ),
)


class PImage(NamedTuple):
    case: int
    e1: str
    e2: str
    edges: frozenset[str]
    divisor: Divisor


class RImage(NamedTuple):
    e1: str
    e2: str
    divisor: Divisor


def _check_mapping(p: QDPoset, model: ModelPoset, mapping: Mapping[str, int], rank_preserving: bool):
    if set(mapping) != set(model.labels):
        raise InvalidMappingError(f"mapping must cover exactly {list(model.labels)}")
    images = list(mapping.values())
    if len(set(images)) != len(images):
        raise InvalidMappingError(f"{model.name}-mapping is not injective")
    if any(not 0 <= i < len(p) for i in images):
        raise InvalidMappingError(f"{model.name}-mapping points outside the poset")
    covers = set(p.ranked.covers)
    for a, b in model.covers:
        if (mapping[a], mapping[b]) not in covers:
            raise InvalidMappingError(f"{model.name}-mapping does not send cover {a}>{b} to a cover")
    if rank_preserving and any(p.rank(mapping[x]) != model.ranks[model.index(x)] for x in model.labels):
        raise InvalidMappingError(f"{model.name}-mapping is not rank-preserving")


def find_model_images(p: QDPoset, model: ModelPoset) -> Iterator[dict[str, int]]:
    """Injective cover-preserving copies of P, or rank-preserving copies of R, in the Hasse diagram."""
    rank_preserving = model is R
    matcher = isomorphism.DiGraphMatcher(
        p.ranked.hasse, model.ranked.hasse,
        node_match=isomorphism.categorical_node_match("rank", None) if rank_preserving else None,
    )
    for found in matcher.subgraph_monomorphisms_iter():
        yield {model.labels[m]: i for i, m in found.items()}


# ----------------- P and R Images -----------------
def classify_P_image(p: QDPoset, mapping: Mapping[str, int]) -> PImage:
    """Which of the two families of P-copies the image belongs to, with its witnesses."""
    _check_mapping(p, P, mapping, rank_preserving=False)
    g = p.graph
    a, b, c, d = (p.elements[mapping[x]] for x in P.labels)

    # (1): bottom pair shares E; the top pair adds one parallel edge each
    if c.edges == d.edges and len(a.edges - c.edges) == 1 and len(b.edges - c.edges) == 1:
        E = c.edges
        (e1,), (e2,) = a.edges - E, b.edges - E
        if a.edges > E and b.edges > E and are_parallel(g, e1, e2):
            s, t = g.edge(e1).ends
            D = a.divisor.plus(exceptional_id(e1), -1)
            if b.divisor.plus(exceptional_id(e2), -1) == D and {c.divisor, d.divisor} == {D.plus(s), D.plus(t)}:
                return PImage(1, e1, e2, E, D)

    # (2): top pair shares E ∪ {e1, e2}; the bottom pair drops one of them each
    if a.edges == b.edges and len(a.edges - c.edges) == 1 and len(a.edges - d.edges) == 1:
        top = a.edges
        (e2,), (e1,) = top - c.edges, top - d.edges
        if c.edges < top and d.edges < top and are_parallel(g, e1, e2):
            s, t = g.edge(e1).ends
            E = top - {e1, e2}
            D = c.divisor.plus(exceptional_id(e1), -1)
            lifted = D.plus(exceptional_id(e1)).plus(exceptional_id(e2))
            if (d.divisor.plus(exceptional_id(e2), -1) == D
                    and {a.divisor, b.divisor} == {lifted.plus(t, -1), lifted.plus(s, -1)}):
                return PImage(2, e1, e2, E, D)

    raise Falsifier("Prop P0", "P-image matches neither family", {
        "mapping": dict(mapping),
        "edges": {x: sorted(p.elements[mapping[x]].edges) for x in P.labels},
    })


def r_subposet(g: Graph, e1: str, e2: str, D: Divisor) -> tuple[PseudoDivisor, ...]:
    """R_{e1,e2}(D) in the order alpha1, beta1..beta4, gamma1..gamma3."""
    if not are_parallel(g, e1, e2):
        raise PreconditionError(f"{e1!r} and {e2!r} are not parallel")
    s, t = g.edge(e1).ends
    v1, v2 = exceptional_id(e1), exceptional_id(e2)
    bottom = D.plus(v1, -1).plus(v2, -1)
    return (
        PseudoDivisor(frozenset({e1, e2}), D),
        PseudoDivisor(frozenset({e1}), D.plus(v2, -1).plus(s)),
        PseudoDivisor(frozenset({e2}), D.plus(v1, -1).plus(s)),
        PseudoDivisor(frozenset({e1}), D.plus(v2, -1).plus(t)),
        PseudoDivisor(frozenset({e2}), D.plus(v1, -1).plus(t)),
        PseudoDivisor(frozenset(), bottom.plus(s, 2)),
        PseudoDivisor(frozenset(), bottom.plus(s).plus(t)),
        PseudoDivisor(frozenset(), bottom.plus(t, 2)),
    )


def locate_R_image(p: QDPoset, mapping: Mapping[str, int]) -> RImage:
    _check_mapping(p, R, mapping, rank_preserving=True)
    g = p.graph
    top = p.elements[mapping["alpha1"]]
    e1, e2 = g.sort_edges(top.edges)
    image = {p.elements[i] for i in mapping.values()}
    if not are_parallel(g, e1, e2) or image != set(r_subposet(g, e1, e2, top.divisor)):
        raise Falsifier("Prop image_parallel", "R-image is not R_{e1,e2}(D)", {
            "mapping": dict(mapping), "top_edges": [e1, e2],
        })
    return RImage(e1, e2, top.divisor)


def check_parallel_lemma(g: Graph, pd: PseudoDivisor, e: str, e0: str) -> bool:
    """Whether both specializations of pd over e share a lower bound over e0; if so e ∥ e0."""
    if e not in pd.edges or g.edge(e).is_loop:
        raise PreconditionError(f"{e!r} must be a non-loop edge of the pseudo-divisor")
    if e0 not in pd.edges or e0 == e:
        raise PreconditionError(f"{e0!r} must be another edge of the pseudo-divisor")
    first, second = (step.target for step in elementary_specializations(g, pd) if step.edge == e)

    def below(x: PseudoDivisor) -> set[PseudoDivisor]:
        return {step.target for step in elementary_specializations(g, x) if step.edge == e0}

    common = below(first) & below(second)
    if common and not are_parallel(g, e, e0):
        raise Falsifier("Lemma parallel_edges", "common lower bound over non-parallel edges",
                        {"edges": sorted(pd.edges), "e": e, "e0": e0})
    return bool(common)


# ----------------- Edge Map f_E -----------------
@dataclass(frozen=True, eq=False)
class EdgeMap:
    mapping: Mapping[str, str]
    source_pairs: tuple[tuple[str, str], ...] = ()
    target_pairs: tuple[tuple[str, str], ...] = ()
    assignments: tuple[tuple[tuple[str, str], tuple[str, str]], ...] = field(default=())

    def __getitem__(self, e: str) -> str:
        return self.mapping[e]

    def __call__(self, edges: Iterable[str]) -> frozenset[str]:
        return frozenset(self.mapping[e] for e in edges)


def induce_edge_map(p: QDPoset, q: QDPoset, f: PosetIso) -> EdgeMap:
    """f_E read off single-edge fibres; special pairs are matched as pairs and assigned by id."""
    g, g2 = p.graph, q.graph
    if bridges_and_nd(g)[0] or bridges_and_nd(g2)[0]:
        raise PreconditionError("edge maps are read from bridgeless graphs; contract bridges first")
    if not f.is_valid():
        raise InvalidMappingError("f is not a poset isomorphism")

    pairs = special_pairs(g)
    paired = {e for pair in pairs for e in pair}
    mapping = {}
    for e in g.edge_ids:
        if e in paired:
            continue
        images = {q.elements[f[i]].edges for i in p.fibre({e})}
        if len(images) != 1 or len(next(iter(images))) != 1:
            raise Falsifier("Cor special", f"edge {e!r} has no single image edge",
                            {"edge": e, "images": sorted(sorted(x) for x in images)})
        (mapping[e],) = images.pop()

    target_pairs = {frozenset(pair) for pair in special_pairs(g2)}
    assignments = []
    for pair in pairs:
        images = {q.elements[f[i]].edges for i in p.fibre(pair)}
        if len(images) != 1 or len(next(iter(images))) != 2:
            raise Falsifier("Cor special", f"special pair {list(pair)} has no single image pair",
                            {"pair": list(pair), "images": sorted(sorted(x) for x in images)})
        image = images.pop()
        if image not in target_pairs:
            raise Falsifier("Lemma P1_special_pair", "image of a special pair is not special",
                            {"pair": list(pair), "image": sorted(image)})
        source, target = tuple(sorted(pair)), tuple(sorted(image))
        mapping.update(zip(source, target))
        assignments.append((source, target))

    if len(set(mapping.values())) != len(mapping) or set(mapping.values()) != set(g2.edge_ids):
        raise Falsifier("Prop fE", "f_E is not a bijection", {"mapping": mapping})
    if not is_weak_cyclic_equivalence(mapping, g, g2):
        raise Falsifier("Prop fE", "f_E is not a weak cyclic equivalence", {"mapping": mapping})
    return EdgeMap(mapping, pairs, special_pairs(g2), tuple(assignments))


def normalize_iso(p: QDPoset, q: QDPoset, f: PosetIso, fE: EdgeMap) -> PosetIso:
    """h_f(E, D) = (f_E(E), D′) with D′ the divisor equivalent to f(E, D)."""
    g2 = q.graph
    mapping = []
    for i, pd in enumerate(p.elements):
        wanted = fE(pd.edges)
        actual = q.elements[f[i]]
        if normalize_edges(g2, actual.edges) != normalize_edges(g2, wanted):
            raise Falsifier("Prop fE", "f(E, D) is not equivalent to an element over f_E(E)",
                            {"element": i, "edges": sorted(actual.edges), "expected": sorted(wanted)})
        j = q.find(equivalent_divisor(g2, actual, wanted))
        if j is None:
            raise Falsifier("Prop fE", "the equivalent divisor is not quasistable",
                            {"element": i, "edges": sorted(wanted)})
        mapping.append(j)
    h = PosetIso(p.ranked, q.ranked, tuple(mapping))
    if not h.is_valid():
        raise Falsifier("Prop hf", "h_f is not a ranked-poset isomorphism", {"size": len(p)})
    return h


# ----------------- Vertex Stars and Bonds -----------------
class VertexStar(NamedTuple):
    vertex: str
    edges: frozenset[str]
    index: int
    extensions: dict[frozenset[str], int]


def _complements_of_trees(sub: Graph) -> list[frozenset[str]]:
    every = frozenset(sub.edge_ids)
    return [every - tree for tree in spanning_trees(sub)]


def recover_vertex_star(p: QDPoset, v1: str) -> VertexStar:
    """The unique (E1, D1) with D1(v1) = val(v1) − 1 (− 2 at v0), and the unique D_S above it."""
    g, v0 = p.graph, p.basepoint
    if not g.is_pure:
        raise PreconditionError("vertex stars are recovered on pure graphs")
    if v1 in articulation_vertices(g):
        raise PreconditionError(f"{v1!r} is an articulation vertex")
    if len(g.vertices) < 2:
        raise PreconditionError("vertex stars need at least two vertices")
    rest = vertex_subgraph(g, set(g.vertex_ids) - {v1})
    E1 = min(_complements_of_trees(rest), key=lambda S: tuple(sorted(S)))
    target = g.valence(v1) - (2 if v1 == v0 else 1)
    matches = [i for i in p.fibre(E1) if p.elements[i].divisor[v1] == target]
    if len(matches) != 1:
        raise Falsifier("Lemma vertex", f"{len(matches)} divisors D1 with D1({v1}) = {target}",
                        {"vertex": v1, "basepoint": v0, "edges": sorted(E1)})
    (d1,) = matches
    above = p.ranked.above(d1)
    star = g.incident_edges(v1)
    extensions = {}
    for size in range(len(star)):
        for S in itertools.combinations(star, size):
            hits = [i for i in p.fibre(E1 | set(S)) if i in above]
            if len(hits) != 1:
                raise Falsifier("Lemma vertex", f"{len(hits)} divisors D_S above D1",
                                {"vertex": v1, "basepoint": v0, "S": sorted(S)})
            extensions[frozenset(S)] = hits[0]
    return VertexStar(v1, frozenset(star), d1, extensions)


def bond_vertex_test(q: QDPoset, pd: PseudoDivisor, bond: Iterable[str]) -> str:
    """A vertex incident to every edge of the bond, given the uniqueness hypothesis at pd."""
    g = q.graph
    bond = frozenset(bond)
    if not is_bond(g, bond):
        raise PreconditionError(f"{sorted(bond)} is not a bond")
    V, Vc = bond_sides(g, bond)
    inner, outer = vertex_subgraph(g, V), vertex_subgraph(g, Vc)
    E = pd.edges
    E1, E2 = E & set(inner.edge_ids), E & set(outer.edge_ids)
    if E1 | E2 != E or E1 not in _complements_of_trees(inner) or E2 not in _complements_of_trees(outer):
        raise HypothesisNotSatisfied("edge set is not maximally nondisconnecting on both sides of the bond")
    base = q.find(pd)
    if base is None:
        raise HypothesisNotSatisfied("pseudo-divisor is not quasistable")
    above = q.ranked.above(base)
    for size in range(len(bond)):
        for S in itertools.combinations(sorted(bond), size):
            hits = [i for i in q.fibre(E | set(S)) if i in above]
            if len(hits) != 1:
                raise HypothesisNotSatisfied(f"{len(hits)} divisors above the base for S = {list(S)}")
    candidates = [v for v in g.vertex_ids if bond <= set(g.incident_edges(v))]
    if not candidates:
        raise Falsifier("Lemma bond", "no vertex meets the whole bond", {"bond": sorted(bond)})
    return candidates[0]


# ----------------- Reconstruction -----------------
def _check_reconstructible(g: Graph):
    if not g.is_pure:
        raise PreconditionError("reconstruction works on pure graphs")
    if not is_biconnected(g):
        raise PreconditionError("reconstruction works on biconnected graphs")


def reconstruct_biconnected(p: QDPoset, q: QDPoset, f: PosetIso) -> GraphIso:
    """Graph isomorphism Γ → Γ′ built from f: edges via f_E, vertices via their stars."""
    g, g2 = p.graph, q.graph
    _check_reconstructible(g)
    _check_reconstructible(g2)
    fE = induce_edge_map(p, q, f)
    h = normalize_iso(p, q, f, fE)

    if len(g.vertices) <= 2 or len(g2.vertices) <= 2:
        if len(g.vertices) != len(g2.vertices):
            raise Falsifier("Thm main1-biconnected", "small cases differ in vertex count",
                            {"vertices": [len(g.vertices), len(g2.vertices)]})
        iso = GraphIso(dict(zip(g.vertex_ids, g2.vertex_ids)), dict(fE.mapping))
    else:
        vertex_map = {}
        for v1 in g.vertex_ids:
            star = recover_vertex_star(p, v1)
            image = fE(star.edges)
            if not is_bond(g2, image):
                raise Falsifier("Thm main1-biconnected", "image of a vertex star is not a bond",
                                {"vertex": v1, "image": sorted(image)})
            try:
                w = bond_vertex_test(q, q.elements[h[star.index]], image)
            except HypothesisNotSatisfied as exc:
                raise Falsifier("Lemma bond", f"hypothesis fails on the image of a star: {exc.message}",
                                {"vertex": v1, "image": sorted(image)}) from None
            if frozenset(g2.incident_edges(w)) != image:
                raise Falsifier("Thm main1-biconnected", "star image is not a vertex star",
                                {"vertex": v1, "found": w})
            vertex_map[v1] = w
        iso = GraphIso(vertex_map, dict(fE.mapping))

    if not verify_graph_isomorphism(g, g2, iso):
        raise Falsifier("Thm main1-biconnected", "reconstructed maps are not a graph isomorphism",
                        {"vertices": dict(iso.vertex_map), "edges": dict(iso.edge_map)})
    return iso


# ----------------- Comparison -----------------
@dataclass(frozen=True)
class Verdict:
    """Both sides of a Torelli comparison.

    With equivalence=False only "posets isomorphic implies components match" is
    claimed, so matching components over non-isomorphic posets still agree.
    """

    poset_isomorphic: bool
    components_match: bool
    witness: dict = field(default_factory=dict, compare=False)
    equivalence: bool = True

    @property
    def agree(self) -> bool:
        if self.equivalence:
            return self.poset_isomorphic == self.components_match
        return self.components_match or not self.poset_isomorphic

    def to_json(self) -> dict:
        return {
            "poset_isomorphic": self.poset_isomorphic,
            "components_match": self.components_match,
            "agree": self.agree,
            "claim": "equivalence" if self.equivalence else "implication",
            "witness": self.witness,
        }

    def require_agreement(self, statement: str):
        if not self.agree:
            raise Falsifier(statement, "poset side and graph side disagree", self.to_json())


def match_components(first: list[Graph], second: list[Graph], metric: bool = False) -> bool:
    """Multiset equality up to isomorphism; greedy is exact since isomorphism is an equivalence."""
    if len(first) != len(second):
        return False
    unmatched = list(second)
    for component in first:
        partner = next((c for c in unmatched if graph_isomorphic(component, c, metric) is not None), None)
        if partner is None:
            return False
        unmatched.remove(partner)
    return True


def reduce_graph(g: Graph) -> Graph:
    """Pure graph with all bridges contracted."""
    return contract_bridges(purify(g)).target


def torelli_compare(g: Graph, g2: Graph) -> Verdict:
    a, b = reduce_graph(g), reduce_graph(g2)
    p, q = enumerate_qd(a), enumerate_qd(b)
    f = poset_isomorphism(p, q)
    parts_a = [c.graph for c in biconnected_components(a)]
    parts_b = [c.graph for c in biconnected_components(b)]
    witness = {
        "elements": [len(p), len(q)],
        "ranks": [list(p.ranked.rank_histogram), list(q.ranked.rank_histogram)],
        "components": [len(parts_a), len(parts_b)],
    }
    if f is not None and is_biconnected(a) and is_biconnected(b):
        iso = reconstruct_biconnected(p, q, f)
        witness["reconstruction"] = {
            "vertices": dict(sorted(iso.vertex_map.items())),
            "edges": dict(sorted(iso.edge_map.items())),
        }
    verdict = Verdict(f is not None, match_components(parts_a, parts_b), witness)
    log.info("torelli: poset_isomorphic=%s components_match=%s", verdict.poset_isomorphic, verdict.components_match)
    return verdict
