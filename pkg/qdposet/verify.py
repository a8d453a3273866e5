# qdposet/verify.py — the invariant suite behind `verify`: per-graph checks and pairwise comparisons

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from qdposet.config import RunConfig, load_config
from qdposet.divisors import (
    PseudoDivisor,
    divisor_bounds,
    is_quasistable,
    is_quasistable_all_subsets,
)
from qdposet.errors import Falsifier, PreconditionError, QDPosetError
from qdposet.graph import (
    Graph,
    articulation_vertices,
    bridges_and_nd,
    genus,
    is_biconnected,
    maximally_nondisconnecting_sets,
    purify,
    spanning_tree_count,
    split_at_articulation,
)
from qdposet.io import dump_poset, load_graph, read_text
from qdposet.poset import (
    QDPoset,
    bridge_contraction,
    brute_force_qd,
    decomposition_product,
    decomposition_sizes,
    enumerate_qd,
    is_upper_connected,
    product_split,
    pure_reduction,
    translate_basepoint,
)
from qdposet.torelli import P, R, classify_P_image, find_model_images, locate_R_image, recover_vertex_star, torelli_compare
from qdposet.tropical import MetricGraph, build_jacobian_complex, top_volume, tropical_torelli_compare

log = logging.getLogger(__name__)

BRUTE_FORCE_MAX_EDGES = 5


# ----------------- Subjects and Results -----------------
@dataclass(frozen=True)
class Subject:
    name: str
    graph: Graph
    cached_poset: Path | None = None

    @property
    def is_metric(self) -> bool:
        return bool(self.graph.edges) and all(e.length is not None for e in self.graph.edges)


class CheckResult(NamedTuple):
    check: str
    subject: str
    passed: bool
    failure: Falsifier | None = None

    @property
    def row(self) -> str:
        return f"{self.check}\t{self.subject}\t{'PASS' if self.passed else 'FAIL'}"


@dataclass
class Report:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def first_failure(self) -> CheckResult | None:
        return next((r for r in self.results if not r.passed), None)

    def table(self) -> str:
        return "".join(r.row + "\n" for r in self.results)


@dataclass
class Context:
    """Per-subject state shared by its checks; posets are built once per basepoint."""

    subject: Subject
    seed: int
    crosscheck_max_vertices: int
    random_sweeps: int
    _posets: dict = field(default_factory=dict)

    @property
    def graph(self) -> Graph:
        return self.subject.graph

    def poset(self, v0: str | None = None) -> QDPoset:
        if v0 not in self._posets:
            self._posets[v0] = enumerate_qd(self.graph, v0)
        return self._posets[v0]


def _fail(statement: str, message: str, **instance):
    raise Falsifier(statement, message, instance)


# ----------------- Per-graph Checks -----------------
def check_cardinality(ctx: Context):
    g = ctx.graph
    expected = 2 ** genus(purify(g)) * spanning_tree_count(g)
    if len(ctx.poset()) != expected:
        _fail("Prop 2-decomposition", "|QD| differs from 2^g times the spanning-tree count",
              elements=len(ctx.poset()), expected=expected)


def check_oracle(ctx: Context):
    if len(ctx.graph.edges) > BRUTE_FORCE_MAX_EDGES:
        return
    p = ctx.poset()
    oracle = brute_force_qd(ctx.graph, p.basepoint)
    if oracle.elements != p.elements or oracle.covers != p.covers:
        _fail("QD enumeration", "pruned enumeration differs from the brute-force oracle",
              elements=len(p), oracle=len(oracle))


def check_maxima(ctx: Context):
    p = ctx.poset()
    maxima = {p.elements[i].edges for i in p.ranked.maxima}
    if len(p.ranked.maxima) != spanning_tree_count(ctx.graph) or maxima != set(maximally_nondisconnecting_sets(ctx.graph)):
        _fail("Remark maximal", "maximal elements do not match the maximally nondisconnecting sets",
              maxima=len(p.ranked.maxima))


def check_tree(ctx: Context):
    g = purify(ctx.graph)
    if genus(g) != 0:
        return
    p = enumerate_qd(g)
    expected = PseudoDivisor.make((), {p.basepoint: -1})
    if p.elements != (expected,):
        _fail("Lemma tree", "a tree must give the single element -v0", elements=len(p))


def check_basepoints(ctx: Context):
    ids = ctx.graph.vertex_ids
    for v0, v1 in itertools.permutations(ids, 2):
        q, iso = translate_basepoint(ctx.poset(v0), v1)
        if q.elements != ctx.poset(v1).elements:
            _fail("Prop one-QD", "translated poset is not QD at the new basepoint", source=v0, target=v1)


def check_upper_connected(ctx: Context):
    p = ctx.poset()
    for E in {pd.edges for pd in p.elements}:
        fibre = p.fibre(E)
        for i, j in itertools.combinations(fibre, 2):
            if not is_upper_connected(p, i, j):
                _fail("Prop upper-connected", "same-E elements are not upper-connected",
                      edges=sorted(E), pair=[i, j])


def check_p_images(ctx: Context):
    p = ctx.poset()
    count = 0
    for mapping in find_model_images(p, P):
        classify_P_image(p, mapping)
        count += 1
    log.debug("%s: %d P-images classified", ctx.subject.name, count)


def check_r_images(ctx: Context):
    p = ctx.poset()
    count = 0
    for mapping in find_model_images(p, R):
        locate_R_image(p, mapping)
        count += 1
    log.debug("%s: %d R-images located", ctx.subject.name, count)


def check_quasistability(ctx: Context):
    """Hemisphere test against the all-subsets definition, on QD and on random divisors."""
    g = ctx.graph
    if len(g.vertices) > ctx.crosscheck_max_vertices:
        return
    p = ctx.poset()
    for pd in p.elements:
        if not is_quasistable_all_subsets(g, p.basepoint, p.polarization, pd):
            _fail("quasistability", "enumerated element fails the all-subsets definition",
                  edges=sorted(pd.edges))
    rng = np.random.default_rng(ctx.seed)
    nd = g.sort_edges(bridges_and_nd(g)[1])
    for _ in range(ctx.random_sweeps):
        E = [e for e in nd if rng.integers(2)]
        bounds = divisor_bounds(g, p.polarization, E)
        values = {v: int(rng.integers(lo, hi + 1)) for v, (lo, hi) in bounds.items()}
        pd = PseudoDivisor.make(E, values)
        fast = is_quasistable(g, p.basepoint, p.polarization, pd)
        if fast != is_quasistable_all_subsets(g, p.basepoint, p.polarization, pd):
            _fail("quasistability", "hemisphere test disagrees with the definition",
                  edges=sorted(E), divisor=values)


def check_decomposition(ctx: Context):
    g = purify(ctx.graph)
    p = enumerate_qd(g)
    if decomposition_product(g) != len(p):
        _fail("Cor decomposition", "|QD| is not the product over biconnected components",
              sizes=list(decomposition_sizes(g)), elements=len(p))
    for v in articulation_vertices(g):
        product_split(g, v, split_at_articulation(g, v))


def check_reductions(ctx: Context):
    p = ctx.poset()
    if not ctx.graph.is_pure:
        pure_reduction(p)
    if bridges_and_nd(ctx.graph)[0]:
        bridge_contraction(p)


def check_vertex_stars(ctx: Context):
    g = ctx.graph
    if not g.is_pure or len(g.vertices) < 2 or not is_biconnected(g):
        return
    p = ctx.poset()
    for v in g.vertex_ids:
        recover_vertex_star(p, v)


def check_cached_poset(ctx: Context):
    path = ctx.subject.cached_poset
    if path is None:
        return
    if read_text(path) != dump_poset(ctx.poset()):
        _fail("cached poset", f"{path.name} differs from a fresh build", path=str(path))


def check_tropical(ctx: Context):
    if not ctx.subject.is_metric or bridges_and_nd(ctx.graph)[0]:
        return
    j = build_jacobian_complex(MetricGraph.from_graph(ctx.graph))
    if j.f_vector != j.poset.ranked.rank_histogram:
        _fail("Thm main2", "f-vector differs from the rank histogram", fvector=list(j.f_vector))
    lengths = j.curve.lengths
    expected = sum((math.prod((lengths[e] for e in S), start=Fraction(1))
                    for S in maximally_nondisconnecting_sets(j.curve.graph)), Fraction(0))
    if top_volume(j) != expected:
        _fail("Thm main2", "top volume differs from the spanning-tree sum",
              volume=str(top_volume(j)), expected=str(expected))
    for v in j.curve.graph.vertex_ids[1:]:
        other = build_jacobian_complex(j.curve, v)
        if (other.f_vector, top_volume(other)) != (j.f_vector, top_volume(j)):
            _fail("Thm main2", "the complex depends on the basepoint", vertex=v,
                  fvector=list(other.f_vector), volume=str(top_volume(other)))


CHECKS: dict[str, Callable[[Context], None]] = {
    "basepoint": check_basepoints,
    "cached-poset": check_cached_poset,
    "cardinality": check_cardinality,
    "decomposition": check_decomposition,
    "maxima": check_maxima,
    "oracle": check_oracle,
    "p-images": check_p_images,
    "quasistability": check_quasistability,
    "r-images": check_r_images,
    "reductions": check_reductions,
    "tree": check_tree,
    "tropical": check_tropical,
    "upper-connected": check_upper_connected,
    "vertex-star": check_vertex_stars,
}


def _run(check: str, subject: str, body: Callable[[], None]) -> CheckResult:
    try:
        body()
    except Falsifier as e:
        log.error("%s on %s: %s", check, subject, e)
        return CheckResult(check, subject, False, e)
    except QDPosetError as e:
        log.error("%s on %s: %s", check, subject, e.message)
        return CheckResult(check, subject, False, Falsifier(check, e.message, {"subject": subject}))
    return CheckResult(check, subject, True)


def run_subject(subject: Subject, seed: int = 0, crosscheck_max_vertices: int = 6,
                random_sweeps: int = 25) -> list[CheckResult]:
    ctx = Context(subject, seed, crosscheck_max_vertices, random_sweeps)
    results = [_run(name, subject.name, lambda fn=fn: fn(ctx)) for name, fn in CHECKS.items()]
    log.info("%s: %d/%d checks passed", subject.name, sum(r.passed for r in results), len(results))
    return results


# ----------------- Pairwise Checks -----------------
def _compare(pair: tuple[Subject, Subject]) -> CheckResult:
    a, b = pair
    name = f"{a.name}~{b.name}"
    if a.is_metric and b.is_metric:
        curves = MetricGraph.from_graph(a.graph), MetricGraph.from_graph(b.graph)
        return _run("tropical-torelli", name,
                    lambda: tropical_torelli_compare(*curves).require_agreement("Thm main2"))
    return _run("torelli", name, lambda: torelli_compare(a.graph, b.graph).require_agreement("Thm main1"))


def comparable_pairs(subjects: list[Subject]) -> list[tuple[Subject, Subject]]:
    """Ordered pairs of combinatorial graphs, and of bridgeless metric graphs."""
    plain = [s for s in subjects if not s.is_metric]
    metric = [s for s in subjects if s.is_metric and not bridges_and_nd(s.graph)[0]]
    return list(itertools.permutations(plain, 2)) + list(itertools.permutations(metric, 2))


# ----------------- Corpus -----------------
def load_corpus(directory: str | Path, cap: int) -> list[Subject]:
    """Graph files (*.json, *.txt) sorted by name; *.poset.json are cached builds of their stem."""
    directory = Path(directory)
    if not directory.is_dir():
        raise PreconditionError(f"{directory} is not a directory")
    files = sorted(
        f for f in directory.iterdir()
        if f.is_file() and f.suffix in (".json", ".txt") and not f.name.endswith(".poset.json")
    )
    subjects = []
    for f in files:
        g = load_graph(f)
        if len(g.edges) > cap:
            log.warning("skipping %s: %d edges exceed the cap of %d", f.name, len(g.edges), cap)
            continue
        cached = f.with_name(f.stem + ".poset.json")
        subjects.append(Subject(f.stem, g, cached if cached.is_file() else None))
    if not subjects:
        raise PreconditionError(f"no graph files in {directory}")
    return subjects


def verify_subjects(subjects: list[Subject], config: RunConfig) -> Report:
    settings = load_config()
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        per_subject = list(pool.map(
            lambda s: run_subject(s, config.seed, settings["quasistability_crosscheck_max_vertices"],
                                  settings["random_sweeps"]),
            subjects,
        ))
        pairwise = list(pool.map(_compare, comparable_pairs(subjects)))
    results = [r for batch in per_subject for r in batch] + pairwise
    results.sort(key=lambda r: (r.subject, r.check))
    return Report(results)


def verify_corpus(directory: str | Path, config: RunConfig) -> Report:
    subjects = load_corpus(directory, config.max_edges)
    log.info("verifying %d graphs from %s", len(subjects), directory)
    return verify_subjects(subjects, config)
