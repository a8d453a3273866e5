# qdposet/tropical.py — metric graphs and the cell-complex model of their Jacobian

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, NamedTuple

from qdposet.errors import BridgedCurveError, GraphError, PreconditionError
from qdposet.graph import Edge, Graph, biconnected_components, bridges_and_nd
from qdposet.poset import QDPoset, enumerate_qd, poset_isomorphism
from qdposet.torelli import Verdict, match_components

log = logging.getLogger(__name__)


# ----------------- Metric Graphs -----------------
@dataclass(frozen=True, eq=False)
class MetricGraph:
    graph: Graph
    lengths: Mapping[str, Fraction]

    def __post_init__(self):
        lengths = {e: Fraction(q) for e, q in self.lengths.items()}
        if set(lengths) != set(self.graph.edge_ids):
            raise GraphError("every edge needs exactly one length")
        bad = sorted(e for e, q in lengths.items() if q <= 0)
        if bad:
            raise GraphError(f"edge lengths must be positive: {bad}")
        g = self.graph
        edges = tuple(Edge(e.id, e.ends, lengths[e.id]) for e in g.edges)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "graph", Graph(g.vertices, edges, allow_disconnected=g.allow_disconnected))

    @classmethod
    def from_graph(cls, g: Graph) -> "MetricGraph":
        missing = [e.id for e in g.edges if e.length is None]
        if missing:
            raise GraphError(f"edges without a length: {missing}")
        return cls(g, {e.id: e.length for e in g.edges})

    @property
    def total_length(self) -> Fraction:
        return sum(self.lengths.values(), Fraction(0))


def canonical_model(x: MetricGraph) -> MetricGraph:
    """Suppress weight-0 vertices of valence 2; a lone loop on one vertex stays."""
    vertices = list(x.graph.vertices)
    edges = list(x.graph.edges)
    while True:
        for v in vertices:
            if v.weight:
                continue
            incident = [e for e in edges if v.id in e.ends]
            if len(incident) != 2 or any(e.is_loop for e in incident):
                continue
            a, b = incident
            merged = Edge(a.id, (a.other(v.id), b.other(v.id)), a.length + b.length)
            edges[edges.index(a)] = merged
            edges.remove(b)
            vertices.remove(v)
            break
        else:
            break
    g = Graph(tuple(vertices), tuple(edges))
    return MetricGraph(g, {e.id: e.length for e in edges})


# ----------------- Jacobian Complex -----------------
class Cell(NamedTuple):
    element: int
    dim: int
    sides: tuple[tuple[str, Fraction], ...]
    volume: Fraction


class Attachment(NamedTuple):
    parent: int
    child: int
    edge: str
    side: int


@dataclass(frozen=True, eq=False)
class JacobianComplex:
    curve: MetricGraph
    poset: QDPoset
    cells: tuple[Cell, ...]
    attachments: tuple[Attachment, ...]

    @cached_property
    def f_vector(self) -> tuple[int, ...]:
        if not self.cells:
            return ()
        top = max(c.dim for c in self.cells)
        return tuple(sum(1 for c in self.cells if c.dim == k) for k in range(top + 1))

    def cell_shape(self, i: int) -> tuple[Fraction, ...]:
        return tuple(sorted(q for _, q in self.cells[i].sides))


def build_jacobian_complex(x: MetricGraph, v0: str | None = None) -> JacobianComplex:
    """One box ∏[0, ℓ(e)] per QD element; a cover to end0 glues at x_e = 0, to end1 at x_e = ℓ(e)."""
    curve = canonical_model(x)
    g = curve.graph
    if not g.is_pure:
        raise PreconditionError("the Jacobian complex is built on pure metric graphs")
    if v0 is not None and not g.has_vertex(v0):
        raise PreconditionError(f"basepoint {v0!r} is suppressed by the canonical model")
    p = enumerate_qd(g, v0)
    cells = tuple(
        Cell(
            i,
            pd.rank,
            tuple((e, curve.lengths[e]) for e in g.sort_edges(pd.edges)),
            math.prod((curve.lengths[e] for e in pd.edges), start=Fraction(1)),
        )
        for i, pd in enumerate(p.elements)
    )
    attachments = tuple(
        Attachment(c.parent, c.child, c.edge, 0 if c.to == g.edge(c.edge).end0 else 1)
        for c in p.covers
    )
    log.debug("Jacobian complex: %d cells, %d attachments", len(cells), len(attachments))
    return JacobianComplex(curve, p, cells, attachments)


def top_volume(j: JacobianComplex) -> Fraction:
    """Σ over maximal cells of ∏ ℓ(e), i.e. Σ over spanning trees of the product off the tree."""
    return sum((j.cells[i].volume for i in j.poset.ranked.maxima), Fraction(0))


# ----------------- Comparison -----------------
def _curve_components(x: MetricGraph) -> list[Graph]:
    return [canonical_model(MetricGraph.from_graph(c.graph)).graph for c in biconnected_components(x.graph)]


def tropical_torelli_compare(x: MetricGraph, x2: MetricGraph) -> Verdict:
    """Complex side: poset iso matching cell shapes. Curve side: components isomorphic as metric graphs.

    Only the direction complex-isomorphic => components-match is a theorem; the
    cell structure sees the whole curve, so equal components can still give
    different complexes.
    """
    for curve in (x, x2):
        bridges = bridges_and_nd(curve.graph)[0]
        if bridges:
            raise BridgedCurveError(f"tropical comparison needs bridgeless curves; bridges {sorted(bridges)}")
    ja, jb = build_jacobian_complex(x), build_jacobian_complex(x2)
    shapes_a = [ja.cell_shape(i) for i in range(len(ja.cells))]
    shapes_b = [jb.cell_shape(i) for i in range(len(jb.cells))]
    f = poset_isomorphism(ja.poset, jb.poset, shapes_a, shapes_b)
    match = match_components(_curve_components(ja.curve), _curve_components(jb.curve), metric=True)
    witness = {
        "volumes": [str(top_volume(ja)), str(top_volume(jb))],
        "fvectors": [list(ja.f_vector), list(jb.f_vector)],
    }
    return Verdict(f is not None, match, witness, equivalence=False)
