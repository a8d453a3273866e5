# qdposet/corpus.py — the named small graphs used by tests, the verify suite and corpus/

import itertools
import logging
from collections import defaultdict
from typing import Iterable, Sequence

import networkx as nx

from qdposet.graph import Edge, Graph, Vertex, graph_isomorphic
from qdposet.helpers import parse_fraction

log = logging.getLogger(__name__)


def build(vertices: Iterable[str], edges: Iterable[tuple[str, str, str]],
          weights: dict[str, int] | None = None, lengths: Sequence | None = None) -> Graph:
    """edges are (id, end0, end1); lengths, when given, follow the edge order."""
    weights = weights or {}
    edges = list(edges)
    if lengths is not None and len(lengths) != len(edges):
        raise ValueError("one length per edge")
    return Graph(
        tuple(Vertex(v, weights.get(v, 0)) for v in vertices),
        tuple(
            Edge(eid, (u, v), None if lengths is None else parse_fraction(lengths[k]))
            for k, (eid, u, v) in enumerate(edges)
        ),
    )


def relabel(g: Graph, vertex_names: dict[str, str], edge_names: dict[str, str] | None = None) -> Graph:
    edge_names = edge_names or {}
    return Graph(
        tuple(Vertex(vertex_names.get(v.id, v.id), v.weight) for v in g.vertices),
        tuple(
            Edge(edge_names.get(e.id, e.id), tuple(vertex_names.get(x, x) for x in e.ends), e.length)
            for e in g.edges
        ),
    )


# ----------------- Named Graphs -----------------
def loop() -> Graph:
    return build(["u"], [("a", "u", "u")])


def path2(weight: int = 0) -> Graph:
    return build(["u", "v"], [("b", "u", "v")], {"u": weight})


def twocyc(lengths: Sequence | None = None) -> Graph:
    return build(["s", "t"], [("e1", "s", "t"), ("e2", "s", "t")], lengths=lengths)


def theta(lengths: Sequence | None = None) -> Graph:
    return build(["s", "t"], [("e1", "s", "t"), ("e2", "s", "t"), ("e3", "s", "t")], lengths=lengths)


def quad() -> Graph:
    return build(["s", "t"], [(f"e{k}", "s", "t") for k in range(1, 5)])


def triangle(lengths: Sequence | None = None) -> Graph:
    return build(["x", "y", "z"], [("xy", "x", "y"), ("yz", "y", "z"), ("zx", "z", "x")], lengths=lengths)


def dumb() -> Graph:
    return build(["s", "t", "u"], [("e1", "s", "t"), ("e2", "s", "t"), ("p1", "s", "u"), ("p2", "u", "t")])


def triangle_pendant(at: str = "x") -> Graph:
    return build(["x", "y", "z", "w"],
                 [("xy", "x", "y"), ("yz", "y", "z"), ("zx", "z", "x"), ("p", at, "w")])


def loop_pendant() -> Graph:
    return build(["u", "v"], [("a", "u", "u"), ("b", "u", "v")])


def three_loops() -> Graph:
    return build(["u"], [("l1", "u", "u"), ("l2", "u", "u"), ("l3", "u", "u")])


def two_triangles() -> Graph:
    """Two triangles glued at the articulation vertex c."""
    return build(
        ["c", "x", "y", "z", "w"],
        [("cx", "c", "x"), ("xy", "x", "y"), ("yc", "y", "c"),
         ("cz", "c", "z"), ("zw", "z", "w"), ("wc", "w", "c")],
    )


def k4() -> Graph:
    names = "abcd"
    return build(list(names), [(u + v, u, v) for u, v in itertools.combinations(names, 2)])


def four_cycle() -> Graph:
    return build(list("abcd"), [("ab", "a", "b"), ("bc", "b", "c"), ("cd", "c", "d"), ("da", "d", "a")])


def whitney_pair() -> tuple[Graph, Graph]:
    """Two biconnected graphs with the same cycles under the identity edge map, not isomorphic."""
    a = build(["a", "x", "b", "y"],
              [("e1", "a", "x"), ("e2", "a", "x"), ("e3", "x", "b"),
               ("e4", "a", "y"), ("e5", "a", "y"), ("e6", "y", "b")])
    b = build(["a", "x", "b", "y"],
              [("e1", "a", "x"), ("e2", "a", "x"), ("e3", "x", "b"),
               ("e4", "b", "y"), ("e5", "b", "y"), ("e6", "y", "a")])
    return a, b


def named_graphs() -> dict[str, Graph]:
    """The corpus in a fixed order."""
    whitney_a, whitney_b = whitney_pair()
    return {
        "loop": loop(),
        "path2": path2(),
        "twocyc": twocyc(),
        "theta": theta(),
        "triangle": triangle(),
        "dumb": dumb(),
        "quad": quad(),
        "triangle_pendant": triangle_pendant("x"),
        "triangle_pendant_y": triangle_pendant("y"),
        "loop_pendant": loop_pendant(),
        "three_loops": three_loops(),
        "two_triangles": two_triangles(),
        "k4": k4(),
        "four_cycle": four_cycle(),
        "whitney_a": whitney_a,
        "whitney_b": whitney_b,
    }


def metric_graphs() -> dict[str, Graph]:
    return {
        "twocyc_3_5": twocyc(("3", "5")),
        "theta_1_1_1": theta(("1", "1", "1")),
        "theta_1_2_3": theta(("1", "2", "3")),
        "triangle_1_1_1": triangle(("1", "1", "1")),
        "triangle_1_2_3": triangle(("1", "2", "3")),
    }


# ----------------- Exhaustive Families -----------------
def trees(max_vertices: int = 6) -> list[Graph]:
    """Every tree up to isomorphism with 1..max_vertices vertices."""
    found = [build(["v0"], [])]
    for n in range(2, max_vertices + 1):
        for t in nx.nonisomorphic_trees(n):
            names = {i: f"v{i}" for i in t.nodes}
            found.append(build(
                [names[i] for i in sorted(t.nodes)],
                [(f"e{k + 1}", names[u], names[v]) for k, (u, v) in enumerate(sorted(t.edges))],
            ))
    return found


def _invariant(g: Graph) -> tuple:
    return (
        len(g.edges),
        len(g.vertices),
        tuple(sorted(g.valence(v) for v in g.vertex_ids)),
        tuple(sorted(g.loops_at(v) for v in g.vertex_ids)),
    )


def small_graphs(max_edges: int = 4) -> list[Graph]:
    """Connected pure multigraphs with 1..max_edges edges, one per isomorphism class."""
    classes: dict[tuple, list[Graph]] = defaultdict(list)
    found = []
    for m in range(1, max_edges + 1):
        for n in range(1, m + 2):
            names = [f"v{i}" for i in range(n)]
            slots = list(itertools.combinations_with_replacement(range(n), 2))
            for chosen in itertools.combinations_with_replacement(slots, m):
                h = nx.MultiGraph()
                h.add_nodes_from(range(n))
                h.add_edges_from(chosen)
                if not nx.is_connected(h):
                    continue
                g = build(names, [(f"e{k + 1}", names[u], names[v]) for k, (u, v) in enumerate(chosen)])
                bucket = classes[_invariant(g)]
                if any(graph_isomorphic(g, other) is not None for other in bucket):
                    continue
                bucket.append(g)
                found.append(g)
    log.debug("small graphs with at most %d edges: %d classes", max_edges, len(found))
    return found
