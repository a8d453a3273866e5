# qdposet/graph.py — multigraphs with loops, vertex weights and ordered edge ends

import itertools
import logging
import operator
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, NamedTuple

import networkx as nx
import numpy as np
from networkx.algorithms import isomorphism
from networkx.utils import UnionFind

from qdposet.errors import DisconnectedGraphError, GraphError, PreconditionError

log = logging.getLogger(__name__)

EXCEPTIONAL_PREFIX = "v@"


# ----------------- Id Scheme -----------------
def exceptional_id(edge_id: str) -> str:
    return f"{EXCEPTIONAL_PREFIX}{edge_id}"


def half_edge_ids(edge_id: str) -> tuple[str, str]:
    return f"{edge_id}:0", f"{edge_id}:1"


# ----------------- Domain Types -----------------
@dataclass(frozen=True)
class Vertex:
    id: str
    weight: int = 0


@dataclass(frozen=True)
class Edge:
    id: str
    ends: tuple[str, str]
    length: Fraction | None = None

    @property
    def end0(self) -> str:
        return self.ends[0]

    @property
    def end1(self) -> str:
        return self.ends[1]

    @property
    def is_loop(self) -> bool:
        return self.ends[0] == self.ends[1]

    def other(self, v: str) -> str:
        return self.ends[1] if self.ends[0] == v else self.ends[0]


@dataclass(frozen=True)
class Graph:
    """Connected multigraph; edge-end order is part of the data."""

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    allow_disconnected: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.vertices:
            raise GraphError("a graph needs at least one vertex")
        seen = set()
        for v in self.vertices:
            if v.id in seen:
                raise GraphError(f"duplicate vertex id {v.id!r}")
            if not isinstance(v.weight, int) or v.weight < 0:
                raise GraphError(f"vertex {v.id!r} has invalid weight {v.weight!r}")
            seen.add(v.id)
        edge_ids = set()
        for e in self.edges:
            if e.id in edge_ids:
                raise GraphError(f"duplicate edge id {e.id!r}")
            edge_ids.add(e.id)
            for end in e.ends:
                if end not in seen:
                    raise GraphError(f"edge {e.id!r} references unknown vertex {end!r}")
        if not self.allow_disconnected and not nx.is_connected(self.nx_graph):
            raise DisconnectedGraphError("graph is disconnected")

    # ----- lookups -----
    @cached_property
    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    @cached_property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    @cached_property
    def _vertex_by_id(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def _edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def edge_position(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    @cached_property
    def vertex_position(self) -> dict[str, int]:
        return {v.id: i for i, v in enumerate(self.vertices)}

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edge_by_id[edge_id]
        except KeyError:
            raise GraphError(f"unknown edge id {edge_id!r}") from None

    def weight(self, vertex_id: str) -> int:
        try:
            return self._vertex_by_id[vertex_id].weight
        except KeyError:
            raise GraphError(f"unknown vertex id {vertex_id!r}") from None

    def has_vertex(self, vertex_id: str) -> bool:
        return vertex_id in self._vertex_by_id

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._edge_by_id

    @property
    def is_pure(self) -> bool:
        return all(v.weight == 0 for v in self.vertices)

    @property
    def total_weight(self) -> int:
        return sum(v.weight for v in self.vertices)

    @cached_property
    def nx_graph(self) -> nx.MultiGraph:
        h = nx.MultiGraph()
        for v in self.vertices:
            h.add_node(v.id, weight=v.weight)
        for e in self.edges:
            h.add_edge(e.end0, e.end1, key=e.id, length=e.length)
        return h

    # ----- incidence -----
    def incident_edges(self, v: str) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges if v in e.ends)

    def valence(self, v: str) -> int:
        """Edge ends at v; loops count twice."""
        return sum((e.end0 == v) + (e.end1 == v) for e in self.edges)

    def loops_at(self, v: str) -> int:
        return sum(1 for e in self.edges if e.is_loop and e.end0 == v)

    def nonloop_valence(self, v: str) -> int:
        return sum(1 for e in self.edges if not e.is_loop and v in e.ends)

    def sort_edges(self, edge_ids: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(edge_ids, key=self.edge_position.__getitem__))

    def sort_vertices(self, vertex_ids: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(vertex_ids, key=self.vertex_position.__getitem__))

    def _check_edges(self, edge_ids: Iterable[str]) -> frozenset[str]:
        edge_ids = frozenset(edge_ids)
        unknown = [e for e in edge_ids if e not in self._edge_by_id]
        if unknown:
            raise GraphError(f"unknown edge ids {sorted(unknown)}")
        return edge_ids

    def _check_vertices(self, vertex_ids: Iterable[str]) -> frozenset[str]:
        vertex_ids = frozenset(vertex_ids)
        unknown = [v for v in vertex_ids if v not in self._vertex_by_id]
        if unknown:
            raise GraphError(f"unknown vertex ids {sorted(unknown)}")
        return vertex_ids


class CutData(NamedTuple):
    cuts: frozenset
    bonds: frozenset
    hemispheres: frozenset


class Component(NamedTuple):
    graph: Graph
    vertex_ids: tuple[str, ...]
    edge_ids: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class SpecializationMap:
    """ι: source → target; edge_section maps target edges back to the source edges they come from."""

    source: Graph
    target: Graph
    vertex_map: Mapping[str, str]
    edge_section: Mapping[str, str]

    def __post_init__(self):
        if set(self.vertex_map) != set(self.source.vertex_ids):
            raise GraphError("vertex map must be total on the source")
        if set(self.edge_section) != set(self.target.edge_ids):
            raise GraphError("edge section must be defined on every target edge")
        if len(set(self.edge_section.values())) != len(self.edge_section):
            raise GraphError("edge section must be injective")
        vm = self.vertex_map
        for t_id, s_id in self.edge_section.items():
            s, t = self.source.edge(s_id), self.target.edge(t_id)
            if (vm[s.end0], vm[s.end1]) != t.ends:
                raise GraphError(f"edge {t_id!r} does not commute with the vertex map")
        for s_id in self.contracted_edges:
            s = self.source.edge(s_id)
            if vm[s.end0] != vm[s.end1]:
                raise GraphError(f"contracted edge {s_id!r} has distinct end images")

    @cached_property
    def contracted_edges(self) -> frozenset[str]:
        return frozenset(self.source.edge_ids) - frozenset(self.edge_section.values())

    @cached_property
    def edge_image(self) -> dict[str, str]:
        """Source edge → target edge, for edges that survive."""
        return {s: t for t, s in self.edge_section.items()}


@dataclass(frozen=True, eq=False)
class GraphIso:
    vertex_map: Mapping[str, str]
    edge_map: Mapping[str, str]


# ----------------- Genus -----------------
def genus(g: Graph) -> int:
    return len(g.edges) - len(g.vertices) + nx.number_connected_components(g.nx_graph) + g.total_weight


def vertex_subgraph(g: Graph, V: Iterable[str]) -> Graph:
    """Γ(V): the vertices V and the edges E(V,V); may be disconnected."""
    V = g._check_vertices(V)
    return Graph(
        tuple(v for v in g.vertices if v.id in V),
        tuple(e for e in g.edges if e.end0 in V and e.end1 in V),
        allow_disconnected=True,
    )


def subgraph_genus(g: Graph, V: Iterable[str]) -> int:
    V = frozenset(V)
    if not V:
        raise PreconditionError("subgraph genus needs a nonempty vertex set")
    return genus(vertex_subgraph(g, V))


def purify(g: Graph) -> Graph:
    return Graph(tuple(Vertex(v.id, 0) for v in g.vertices), g.edges, allow_disconnected=g.allow_disconnected)


# ----------------- Cuts / Bonds / Hemispheres -----------------
def cut(g: Graph, V: Iterable[str]) -> frozenset[str]:
    """E(V, V^c)."""
    V = frozenset(V)
    return frozenset(e.id for e in g.edges if (e.end0 in V) != (e.end1 in V))


def delta(g: Graph, V: Iterable[str]) -> int:
    return len(cut(g, V))


def induces_connected(g: Graph, V: Iterable[str]) -> bool:
    """Γ(V) connected; Γ(∅) counts as connected."""
    V = list(V)
    if not V:
        return True
    return nx.is_connected(g.nx_graph.subgraph(V))


def _proper_subsets(g: Graph):
    ids = g.vertex_ids
    n = len(ids)
    for mask in range(1, (1 << n) - 1):
        yield frozenset(ids[i] for i in range(n) if mask >> i & 1)


@lru_cache(maxsize=4096)
def hemispheres(g: Graph) -> tuple[frozenset[str], ...]:
    """Nonempty proper V with Γ(V) and Γ(V^c) connected, in vertex-bitmask order."""
    everything = frozenset(g.vertex_ids)
    return tuple(
        V for V in _proper_subsets(g)
        if induces_connected(g, V) and induces_connected(g, everything - V)
    )


def cut_and_bond_enumeration(g: Graph) -> CutData:
    cuts = frozenset(cut(g, V) for V in _proper_subsets(g))
    nonempty = [c for c in cuts if c]
    bonds = frozenset(c for c in nonempty if not any(other < c for other in nonempty))
    return CutData(cuts, bonds, frozenset(hemispheres(g)))


# ----------------- Spanning Trees -----------------
def _is_forest(g: Graph, edge_ids: Iterable[str]) -> bool:
    forest = UnionFind(g.vertex_ids)
    for e_id in edge_ids:
        e = g.edge(e_id)
        if forest[e.end0] == forest[e.end1]:
            return False
        forest.union(e.end0, e.end1)
    return True


@lru_cache(maxsize=1024)
def spanning_trees(g: Graph) -> tuple[frozenset[str], ...]:
    candidates = [e.id for e in g.edges if not e.is_loop]
    size = len(g.vertices) - 1
    return tuple(
        frozenset(tree) for tree in itertools.combinations(candidates, size)
        if _is_forest(g, tree)
    )


def spanning_tree_count(g: Graph) -> int:
    """Kirchhoff matrix-tree count; independent of spanning_trees."""
    n = len(g.vertices)
    if n == 1:
        return 1
    index = g.vertex_position
    laplacian = np.zeros((n, n))
    for e in g.edges:
        if e.is_loop:
            continue
        i, j = index[e.end0], index[e.end1]
        laplacian[i, i] += 1
        laplacian[j, j] += 1
        laplacian[i, j] -= 1
        laplacian[j, i] -= 1
    return int(round(np.linalg.det(laplacian[1:, 1:])))


# ----------------- Bridges -----------------
@lru_cache(maxsize=1024)
def bridges_and_nd(g: Graph) -> tuple[frozenset[str], frozenset[str]]:
    by_pair = defaultdict(list)
    for e in g.edges:
        by_pair[frozenset(e.ends)].append(e.id)
    loopless = g.nx_graph.copy()
    loopless.remove_edges_from(list(nx.selfloop_edges(loopless, keys=True)))
    bridges = set()
    for u, v in nx.bridges(loopless):
        parallel = by_pair[frozenset((u, v))]
        if len(parallel) == 1:
            bridges.add(parallel[0])
    bridges = frozenset(bridges)
    return bridges, frozenset(g.edge_ids) - bridges


def maximally_nondisconnecting_sets(g: Graph) -> tuple[frozenset[str], ...]:
    """ND-complements of the spanning trees of Γ/Bridges."""
    bridges, nd = bridges_and_nd(g)
    reduced = contract_edges(g, bridges).target
    return tuple(nd - tree for tree in spanning_trees(reduced))


# ----------------- Biconnected Structure -----------------
@lru_cache(maxsize=1024)
def biconnected_components(g: Graph) -> tuple[Component, ...]:
    """Blocks, with a single loop and a single bridge each forming their own component."""
    simple = nx.Graph()
    simple.add_nodes_from(g.vertex_ids)
    simple.add_edges_from(e.ends for e in g.edges if not e.is_loop)
    groups = []
    for block in nx.biconnected_component_edges(simple):
        pairs = {frozenset(pair) for pair in block}
        groups.append([e.id for e in g.edges if not e.is_loop and frozenset(e.ends) in pairs])
    groups.extend([e.id] for e in g.edges if e.is_loop)
    groups.sort(key=lambda ids: min(g.edge_position[e] for e in ids))

    components = []
    for ids in groups:
        edge_ids = g.sort_edges(ids)
        vertex_ids = g.sort_vertices({end for e in edge_ids for end in g.edge(e).ends})
        sub = Graph(
            tuple(v for v in g.vertices if v.id in vertex_ids),
            tuple(g.edge(e) for e in edge_ids),
        )
        components.append(Component(sub, vertex_ids, edge_ids))
    return tuple(components)


def articulation_vertices(g: Graph) -> tuple[str, ...]:
    counts = defaultdict(int)
    for component in biconnected_components(g):
        for v in component.vertex_ids:
            counts[v] += 1
    return g.sort_vertices(v for v, k in counts.items() if k >= 2)


def is_biconnected(g: Graph) -> bool:
    return len(biconnected_components(g)) <= 1


# ----------------- Subdivision / Deletion / Contraction -----------------
@lru_cache(maxsize=8192)
def _subdivide(g: Graph, E0: frozenset[str]) -> tuple[Graph, dict[str, str]]:
    vertices = list(g.vertices)
    edges = []
    mapping = {}
    for e in g.edges:
        if e.id not in E0:
            edges.append(e)
            continue
        middle = exceptional_id(e.id)
        mapping[e.id] = middle
        vertices.append(Vertex(middle, 0))
        first, second = half_edge_ids(e.id)
        edges.append(Edge(first, (e.end0, middle)))
        edges.append(Edge(second, (middle, e.end1)))
    return Graph(tuple(vertices), tuple(edges), allow_disconnected=g.allow_disconnected), mapping


def subdivide(g: Graph, E0: Iterable[str]) -> tuple[Graph, dict[str, str]]:
    """Γ^E: each e in E0 becomes e:0 (end0 → v@e) and e:1 (v@e → end1)."""
    sub, mapping = _subdivide(g, g._check_edges(E0))
    return sub, dict(mapping)


@lru_cache(maxsize=8192)
def _delete(g: Graph, E0: frozenset[str]) -> Graph:
    return Graph(g.vertices, tuple(e for e in g.edges if e.id not in E0), allow_disconnected=True)


def delete_edges(g: Graph, E0: Iterable[str], require_connected: bool = False) -> Graph:
    """Γ_E: all vertices kept."""
    result = _delete(g, g._check_edges(E0))
    if require_connected and not nx.is_connected(result.nx_graph):
        raise DisconnectedGraphError(f"removing {sorted(E0)} disconnects the graph")
    return result


def is_nondisconnecting(g: Graph, E0: Iterable[str]) -> bool:
    return nx.is_connected(_delete(g, g._check_edges(E0)).nx_graph)


def contract_edges(g: Graph, E0: Iterable[str]) -> SpecializationMap:
    """Γ/E0; a contracted loop simply disappears. Each class keeps its first vertex id."""
    E0 = g._check_edges(E0)
    classes = UnionFind(g.vertex_ids)
    for e_id in g.sort_edges(E0):
        e = g.edge(e_id)
        classes.union(e.end0, e.end1)
    representative = {}
    weights = defaultdict(int)
    for v in g.vertices:
        root = classes[v.id]
        representative.setdefault(root, v.id)
        weights[representative[root]] += v.weight
    vertex_map = {v: representative[classes[v]] for v in g.vertex_ids}
    target_vertices = tuple(Vertex(v, weights[v]) for v in dict.fromkeys(vertex_map.values()))
    target_edges = tuple(
        Edge(e.id, (vertex_map[e.end0], vertex_map[e.end1]), e.length)
        for e in g.edges if e.id not in E0
    )
    target = Graph(target_vertices, target_edges, allow_disconnected=g.allow_disconnected)
    return SpecializationMap(g, target, vertex_map, {e.id: e.id for e in target_edges})


def contract_bridges(g: Graph) -> SpecializationMap:
    return contract_edges(g, bridges_and_nd(g)[0])


# ----------------- Special Pairs -----------------
@lru_cache(maxsize=1024)
def special_pairs(g: Graph) -> tuple[tuple[str, str], ...]:
    """Parallel pairs with no third parallel edge whose joint removal keeps Γ connected."""
    classes = defaultdict(list)
    for e in g.edges:
        if not e.is_loop:
            classes[frozenset(e.ends)].append(e.id)
    pairs = [
        tuple(ids) for ids in classes.values()
        if len(ids) == 2 and is_nondisconnecting(g, ids)
    ]
    return tuple(sorted(pairs, key=lambda p: g.edge_position[p[0]]))


def are_parallel(g: Graph, e1: str, e2: str) -> bool:
    a, b = g.edge(e1), g.edge(e2)
    return e1 != e2 and not a.is_loop and not b.is_loop and frozenset(a.ends) == frozenset(b.ends)


# ----------------- Splits -----------------
def is_valid_split(g: Graph, v0: str, g1: Graph, g2: Graph) -> bool:
    V1, V2 = set(g1.vertex_ids), set(g2.vertex_ids)
    E1, E2 = set(g1.edge_ids), set(g2.edge_ids)
    return (
        V1 | V2 == set(g.vertex_ids) and V1 & V2 == {v0}
        and E1 | E2 == set(g.edge_ids) and not E1 & E2
        and bool(E1) and bool(E2)
        and all(g1.edge(e).ends == g.edge(e).ends for e in E1)
        and all(g2.edge(e).ends == g.edge(e).ends for e in E2)
    )


def split_at_articulation(g: Graph, v0: str) -> tuple[Graph, Graph]:
    """Γ1 is the branch at v0 holding the earliest edge; Γ2 is everything else."""
    g._check_vertices([v0])
    rest = g.nx_graph.copy()
    rest.remove_node(v0)
    branch_of = {}
    for i, branch in enumerate(nx.connected_components(rest)):
        for v in branch:
            branch_of[v] = i
    groups = defaultdict(list)
    for e in g.edges:
        if e.is_loop and e.end0 == v0:
            groups[("loop", e.id)].append(e.id)
        else:
            w = e.end1 if e.end0 == v0 else e.end0
            groups[("branch", branch_of[w])].append(e.id)
    if len(groups) < 2:
        raise PreconditionError(f"{v0!r} is not an articulation vertex")
    ordered = sorted(groups.values(), key=lambda ids: g.edge_position[ids[0]])
    first = set(ordered[0])
    second = {e for ids in ordered[1:] for e in ids}

    def _side(edge_ids: set[str], keep_weight: bool) -> Graph:
        vertex_ids = {v0} | {end for e in edge_ids for end in g.edge(e).ends}
        return Graph(
            tuple(Vertex(v.id, v.weight if (v.id != v0 or keep_weight) else 0)
                  for v in g.vertices if v.id in vertex_ids),
            tuple(e for e in g.edges if e.id in edge_ids),
        )

    return _side(first, True), _side(second, False)


# ----------------- Cyclic Equivalence -----------------
def is_weak_cyclic_equivalence(f: Mapping[str, str], g: Graph, g2: Graph) -> bool:
    nd1 = bridges_and_nd(g)[1]
    nd2 = bridges_and_nd(g2)[1]
    if set(f) != nd1 or set(f.values()) != nd2 or len(set(f.values())) != len(f):
        raise PreconditionError("edge map is not a bijection ND(Γ) → ND(Γ′)")
    mapped = {frozenset(f[e] for e in S) for S in maximally_nondisconnecting_sets(g)}
    return mapped == set(maximally_nondisconnecting_sets(g2))


# ----------------- Isomorphism -----------------
def graph_isomorphic(g: Graph, g2: Graph, metric: bool = False) -> GraphIso | None:
    """Weight-preserving (and with metric=True, length-preserving) multigraph isomorphism."""
    if (len(g.vertices), len(g.edges)) != (len(g2.vertices), len(g2.edges)):
        return None
    matcher = isomorphism.MultiGraphMatcher(
        g.nx_graph, g2.nx_graph,
        node_match=isomorphism.categorical_node_match("weight", 0),
        edge_match=isomorphism.generic_multiedge_match("length", None, operator.eq) if metric else None,
    )
    for vertex_map in matcher.isomorphisms_iter():
        edge_map = _match_edges(g, g2, vertex_map, metric)
        if edge_map is not None:
            return GraphIso(dict(vertex_map), edge_map)
    return None


def _match_edges(g: Graph, g2: Graph, vertex_map: Mapping[str, str], metric: bool) -> dict[str, str] | None:
    free = defaultdict(list)
    for e in g2.edges:
        free[frozenset(e.ends)].append(e)
    edge_map = {}
    for e in g.edges:
        bucket = free[frozenset(vertex_map[v] for v in e.ends)]
        pick = next((c for c in bucket if not metric or c.length == e.length), None)
        if pick is None:
            return None
        bucket.remove(pick)
        edge_map[e.id] = pick.id
    return edge_map


def verify_graph_isomorphism(g: Graph, g2: Graph, iso: GraphIso, metric: bool = False) -> bool:
    vm, em = iso.vertex_map, iso.edge_map
    if set(vm) != set(g.vertex_ids) or set(vm.values()) != set(g2.vertex_ids):
        return False
    if set(em) != set(g.edge_ids) or set(em.values()) != set(g2.edge_ids):
        return False
    if len(set(vm.values())) != len(vm) or len(set(em.values())) != len(em):
        return False
    if any(g.weight(v) != g2.weight(vm[v]) for v in g.vertex_ids):
        return False
    for e in g.edges:
        image = g2.edge(em[e.id])
        if sorted(vm[v] for v in e.ends) != sorted(image.ends):
            return False
        if metric and e.length != image.length:
            return False
    return True


def is_bond(g: Graph, edge_ids: Iterable[str]) -> bool:
    """A minimal cut: removal leaves two components and every edge crosses between them."""
    edge_ids = g._check_edges(edge_ids)
    if not edge_ids:
        return False
    parts = list(nx.connected_components(_delete(g, edge_ids).nx_graph))
    if len(parts) != 2:
        return False
    return cut(g, parts[0]) == edge_ids


def bond_sides(g: Graph, edge_ids: Iterable[str]) -> tuple[frozenset[str], frozenset[str]]:
    """(V, V^c) of a bond; V holds the earliest vertex."""
    if not is_bond(g, edge_ids):
        raise PreconditionError(f"{sorted(edge_ids)} is not a bond")
    first, second = (frozenset(c) for c in nx.connected_components(_delete(g, frozenset(edge_ids)).nx_graph))
    if g.vertex_ids[0] in second:
        first, second = second, first
    return first, second
