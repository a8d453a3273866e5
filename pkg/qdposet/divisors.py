# qdposet/divisors.py — divisors, pseudo-divisors, polarizations and quasistability

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

from qdposet.errors import CarrierMismatchError, PolarizationError, PreconditionError
from qdposet.graph import (
    Graph,
    SpecializationMap,
    delta,
    exceptional_id,
    hemispheres,
    special_pairs,
    subdivide,
)

log = logging.getLogger(__name__)


# ----------------- Domain Types -----------------
@dataclass(frozen=True)
class Divisor:
    """Integer vertex function; stored sparse and sorted so equal divisors hash equal."""

    items: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(cls, values: Mapping[str, int]) -> "Divisor":
        return cls(tuple(sorted((v, int(k)) for v, k in values.items() if k)))

    def __getitem__(self, v: str) -> int:
        return self.as_dict().get(v, 0)

    def as_dict(self) -> dict[str, int]:
        return dict(self.items)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.items)

    @property
    def degree(self) -> int:
        return sum(k for _, k in self.items)

    def on(self, V: Iterable[str]) -> int:
        values = self.as_dict()
        return sum(values.get(v, 0) for v in V)

    def plus(self, v: str, k: int = 1) -> "Divisor":
        values = self.as_dict()
        values[v] = values.get(v, 0) + k
        return Divisor.of(values)

    def __add__(self, other: "Divisor") -> "Divisor":
        values = self.as_dict()
        for v, k in other.items:
            values[v] = values.get(v, 0) + k
        return Divisor.of(values)

    def __neg__(self) -> "Divisor":
        return Divisor(tuple((v, -k) for v, k in self.items))

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)


@dataclass(frozen=True)
class Polarization:
    items: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        if self.total.denominator != 1:
            raise PolarizationError(f"polarization degree {self.total} is not an integer")

    @classmethod
    def of(cls, values: Mapping[str, Fraction | int]) -> "Polarization":
        return cls(tuple(sorted((v, Fraction(q)) for v, q in values.items() if q)))

    def __getitem__(self, v: str) -> Fraction:
        return dict(self.items).get(v, Fraction(0))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.items)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.items)

    @property
    def total(self) -> Fraction:
        return sum((q for _, q in self.items), Fraction(0))

    @property
    def degree(self) -> int:
        return int(self.total)

    def on(self, V: Iterable[str]) -> Fraction:
        values = self.as_dict()
        return sum((values.get(v, Fraction(0)) for v in V), Fraction(0))


@dataclass(frozen=True)
class PseudoDivisor:
    """(E, D): D lives on Γ^E and is 1 on every exceptional vertex v@e, e ∈ E."""

    edges: frozenset[str]
    divisor: Divisor

    @classmethod
    def make(cls, edges: Iterable[str], vertex_values: Mapping[str, int]) -> "PseudoDivisor":
        edges = frozenset(edges)
        values = dict(vertex_values)
        for e in edges:
            values[exceptional_id(e)] = 1
        return cls(edges, Divisor.of(values))

    @property
    def rank(self) -> int:
        return len(self.edges)

    def vertex_values(self, g: Graph) -> tuple[int, ...]:
        values = self.divisor.as_dict()
        return tuple(values.get(v, 0) for v in g.vertex_ids)

    def sort_key(self, g: Graph) -> tuple:
        return len(self.edges), tuple(sorted(self.edges)), self.vertex_values(g)

    def check(self, g: Graph):
        unknown = [e for e in self.edges if not g.has_edge(e)]
        if unknown:
            raise CarrierMismatchError(f"pseudo-divisor uses unknown edges {sorted(unknown)}")
        carrier = set(g.vertex_ids) | {exceptional_id(e) for e in self.edges}
        stray = self.divisor.support - carrier
        if stray:
            raise CarrierMismatchError(f"divisor support {sorted(stray)} is outside Γ^E")
        for e in self.edges:
            if self.divisor[exceptional_id(e)] != 1:
                raise CarrierMismatchError(f"exceptional vertex {exceptional_id(e)!r} must carry 1")


class Specialization(NamedTuple):
    edge: str
    to: str
    target: PseudoDivisor


# ----------------- β and Polarizations -----------------
def beta(g: Graph, D: Divisor, mu: Polarization, V: Iterable[str]) -> Fraction:
    """β(V) = D(V) − μ(V) + δ_V/2, exact."""
    V = frozenset(V)
    vertices = set(g.vertex_ids)
    if not V <= vertices or not D.support <= vertices or not mu.support <= vertices:
        raise CarrierMismatchError("divisor, polarization and vertex set must live on the same graph")
    return D.on(V) - mu.on(V) + Fraction(delta(g, V), 2)


@lru_cache(maxsize=1024)
def canonical_polarization(g: Graph) -> Polarization:
    """μ_can(v) = w(v) + #loops(v) − 1 + val_nonloop(v)/2; degree g − 1."""
    return Polarization.of({
        v.id: v.weight + g.loops_at(v.id) - 1 + Fraction(g.nonloop_valence(v.id), 2)
        for v in g.vertices
    })


def induced_polarizations(g: Graph, mu: Polarization, E0: Iterable[str]) -> tuple[Polarization, Polarization]:
    """(μ^E on Γ^E, μ_E on Γ_E)."""
    E0 = g._check_edges(E0)
    values = mu.as_dict()
    for e_id in E0:
        e = g.edge(e_id)
        for end in e.ends:
            values[end] = values.get(end, Fraction(0)) - Fraction(1, 2)
    return mu, Polarization.of(values)


def pushforward_polarization(spec: SpecializationMap, mu: Polarization) -> Polarization:
    values = defaultdict(Fraction)
    for v, q in mu.items:
        values[spec.vertex_map[v]] += q
    return Polarization.of(values)


# ----------------- Quasistability -----------------
@dataclass(frozen=True)
class QuasistabilityTest:
    """Hemisphere constraints of Γ^E reduced to sums over original-vertex values."""

    vertex_ids: tuple[str, ...]
    degree: int
    constraints: tuple[tuple[tuple[int, ...], Fraction, bool], ...]

    def accepts(self, values: Sequence[int]) -> bool:
        if sum(values) != self.degree:
            return False
        for indices, constant, strict in self.constraints:
            b = sum(values[i] for i in indices) + constant
            if b < 0 or (strict and b == 0):
                return False
        return True


@lru_cache(maxsize=8192)
def _compile(g: Graph, v0: str, mu: Polarization, E: frozenset[str]) -> QuasistabilityTest:
    sub, exceptional = subdivide(g, E)
    position = g.vertex_position
    constraints = []
    for V in hemispheres(sub):
        indices = tuple(sorted(position[v] for v in V if v in position))
        n_exceptional = len(V) - len(indices)
        constant = n_exceptional - mu.on(V) + Fraction(delta(sub, V), 2)
        constraints.append((indices, constant, v0 not in V))
    return QuasistabilityTest(g.vertex_ids, mu.degree - len(exceptional), tuple(constraints))


def quasistability_test(g: Graph, v0: str, mu: Polarization, E: Iterable[str]) -> QuasistabilityTest:
    if not g.has_vertex(v0):
        raise CarrierMismatchError(f"basepoint {v0!r} is not a vertex")
    if not mu.support <= set(g.vertex_ids):
        raise CarrierMismatchError("polarization lives on another graph")
    return _compile(g, v0, mu, g._check_edges(E))


def is_quasistable(g: Graph, v0: str, mu: Polarization, pd: PseudoDivisor) -> bool:
    """β ≥ 0 on every hemisphere of Γ^E, strictly when v0 ∉ V."""
    pd.check(g)
    if pd.divisor.degree != mu.degree:
        return False
    return quasistability_test(g, v0, mu, pd.edges).accepts(pd.vertex_values(g))


def is_quasistable_all_subsets(g: Graph, v0: str, mu: Polarization, pd: PseudoDivisor) -> bool:
    """The definition itself: every nonempty V ⊆ V(Γ^E)."""
    pd.check(g)
    if pd.divisor.degree != mu.degree:
        return False
    sub, _ = subdivide(g, pd.edges)
    ids = sub.vertex_ids
    for size in range(1, len(ids) + 1):
        for V in itertools.combinations(ids, size):
            b = beta(sub, pd.divisor, mu, V)
            if b < 0 or (v0 not in V and b == 0):
                return False
    return True


def divisor_bounds(g: Graph, mu: Polarization, E: Iterable[str]) -> dict[str, tuple[int, int]]:
    """μ^E(v) − δ_v/2 ≤ D(v) ≤ μ^E(v) + δ_v/2 + 1 for each original vertex."""
    sub, _ = subdivide(g, E)
    bounds = {}
    for v in g.vertex_ids:
        spread = Fraction(delta(sub, [v]), 2)
        bounds[v] = (math.ceil(mu[v] - spread), math.floor(mu[v] + spread + 1))
    return bounds


# ----------------- Specializations -----------------
def pushforward(spec: SpecializationMap, pd: PseudoDivisor) -> PseudoDivisor:
    """ι_*(E, D): surviving edges keep their exceptional unit, contracted ones drop it on their end."""
    pd.check(spec.source)
    source_vertices = set(spec.source.vertex_ids)
    exceptional_edge = {exceptional_id(e): e for e in pd.edges}
    edges = frozenset(spec.edge_image[e] for e in pd.edges if e in spec.edge_image)
    values = defaultdict(int)
    for v, k in pd.divisor.items:
        if v in source_vertices:
            values[spec.vertex_map[v]] += k
            continue
        e = exceptional_edge[v]
        if e in spec.edge_image:
            values[exceptional_id(spec.edge_image[e])] += k
        else:
            values[spec.vertex_map[spec.source.edge(e).end0]] += k
    return PseudoDivisor(edges, Divisor.of(values))


def elementary_specializations(g: Graph, pd: PseudoDivisor) -> tuple[Specialization, ...]:
    """Per edge of E in graph order: end0 target first; loops have one target."""
    result = []
    for e_id in g.sort_edges(pd.edges):
        e = g.edge(e_id)
        rest = pd.edges - {e_id}
        lowered = pd.divisor.plus(exceptional_id(e_id), -1)
        for end in (e.end0,) if e.is_loop else e.ends:
            result.append(Specialization(e_id, end, PseudoDivisor(rest, lowered.plus(end))))
    return tuple(result)


def specializes(g: Graph, pd1: PseudoDivisor, pd2: PseudoDivisor) -> bool:
    """pd1 ≥ pd2: pd2 reachable from pd1 by elementary specializations."""
    if pd1 == pd2:
        return True
    if not pd2.edges < pd1.edges or pd1.divisor.degree != pd2.divisor.degree:
        return False
    frontier = {pd1}
    for _ in range(len(pd1.edges) - len(pd2.edges)):
        frontier = {
            step.target
            for pd in frontier
            for step in elementary_specializations(g, pd)
            if step.edge not in pd2.edges
        }
    return pd2 in frontier


# ----------------- Equivalence -----------------
def normalize_edges(g: Graph, E: Iterable[str]) -> frozenset[str]:
    """Within each special pair, a lone member is replaced by the pair's first edge."""
    E = set(E)
    for first, second in special_pairs(g):
        if (first in E) != (second in E):
            E -= {first, second}
            E.add(first)
    return frozenset(E)


def equivalent_pseudo_divisors(g: Graph, pd1: PseudoDivisor, pd2: PseudoDivisor) -> bool:
    return (
        pd1.vertex_values(g) == pd2.vertex_values(g)
        and normalize_edges(g, pd1.edges) == normalize_edges(g, pd2.edges)
    )


def equivalent_divisor(g: Graph, pd: PseudoDivisor, E2: Iterable[str]) -> PseudoDivisor:
    """The unique pseudo-divisor on Γ^{E2} equivalent to pd."""
    E2 = frozenset(E2)
    if normalize_edges(g, E2) != normalize_edges(g, pd.edges):
        raise PreconditionError(f"edge sets {sorted(pd.edges)} and {sorted(E2)} are not equivalent")
    return PseudoDivisor.make(E2, dict(zip(g.vertex_ids, pd.vertex_values(g))))
