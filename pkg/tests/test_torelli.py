import pytest

from qdposet import corpus
from qdposet.divisors import PseudoDivisor
from qdposet.errors import Falsifier, HypothesisNotSatisfied, InvalidMappingError, PreconditionError
from qdposet.graph import are_parallel, verify_graph_isomorphism
from qdposet.poset import PosetIso, enumerate_qd, poset_isomorphism
from qdposet.torelli import (
    P,
    R,
    Verdict,
    bond_vertex_test,
    check_parallel_lemma,
    classify_P_image,
    find_model_images,
    induce_edge_map,
    locate_R_image,
    match_components,
    normalize_iso,
    r_subposet,
    reconstruct_biconnected,
    recover_vertex_star,
    reduce_graph,
    torelli_compare,
)


def pd(edges, **values):
    return PseudoDivisor.make(edges, values)


def identity(p):
    return PosetIso(p.ranked, p.ranked, tuple(range(len(p))))


# ----------------- P and R images -----------------
def test_p_images_of_twocyc(twocyc):
    p = enumerate_qd(twocyc, "s")
    images = [classify_P_image(p, m) for m in find_model_images(p, P)]
    assert len(images) == 4
    assert {x.case for x in images} == {1}
    assert {frozenset((x.e1, x.e2)) for x in images} == {frozenset({"e1", "e2"})}
    assert all(x.edges == frozenset() for x in images)


def test_quad_has_both_families(quad):
    p = enumerate_qd(quad)
    cases = {classify_P_image(p, m).case for m in find_model_images(p, P)}
    assert cases == {1, 2}


def test_triangle_has_no_model_images(triangle):
    p = enumerate_qd(triangle)
    assert list(find_model_images(p, P)) == []
    assert list(find_model_images(p, R)) == []


def test_r_images_of_theta(theta):
    p = enumerate_qd(theta)
    mappings = list(find_model_images(p, R))
    assert mappings
    for m in mappings:
        image = locate_R_image(p, m)
        assert are_parallel(theta, image.e1, image.e2)
        assert {p.elements[i] for i in m.values()} == set(r_subposet(theta, image.e1, image.e2, image.divisor))


def test_model_mapping_is_checked(twocyc):
    p = enumerate_qd(twocyc)
    with pytest.raises(InvalidMappingError, match="cover exactly"):
        classify_P_image(p, {"alpha": 2})
    with pytest.raises(InvalidMappingError, match="injective"):
        classify_P_image(p, {"alpha": 2, "beta": 2, "gamma": 0, "delta": 1})
    with pytest.raises(InvalidMappingError, match="cover"):
        classify_P_image(p, {"alpha": 0, "beta": 1, "gamma": 2, "delta": 3})


def test_r_subposet_needs_parallel_edges(triangle):
    with pytest.raises(PreconditionError):
        r_subposet(triangle, "xy", "yz", pd(()).divisor)


def test_parallel_lemma(theta, dumb):
    p = enumerate_qd(theta)
    m = next(find_model_images(p, R))
    top = p.elements[m["alpha1"]]
    e1, e2 = sorted(top.edges)
    assert check_parallel_lemma(theta, top, e1, e2)
    q = enumerate_qd(dumb)
    for x in q.elements:
        if x.edges == {"e1", "p1"}:
            assert not check_parallel_lemma(dumb, x, "p1", "e1")
    (outside,) = set(theta.edge_ids) - top.edges
    with pytest.raises(PreconditionError):
        check_parallel_lemma(theta, top, outside, e1)


# ----------------- edge maps -----------------
def test_induce_edge_map_twocyc(twocyc):
    relabeled = corpus.relabel(twocyc, {}, {"e1": "A", "e2": "B"})
    p, q = enumerate_qd(twocyc), enumerate_qd(relabeled)
    fE = induce_edge_map(p, q, poset_isomorphism(p, q))
    assert set(fE.mapping) == {"e1", "e2"}
    assert set(fE.mapping.values()) == {"A", "B"}
    assert fE.source_pairs == ()


def test_special_pair_assignment_is_by_id(dumb):
    p = enumerate_qd(dumb)
    fE = induce_edge_map(p, p, identity(p))
    assert dict(fE.mapping) == {"e1": "e1", "e2": "e2", "p1": "p1", "p2": "p2"}
    assert fE.assignments == ((("e1", "e2"), ("e1", "e2")),)
    assert fE({"e2", "p1"}) == {"e2", "p1"}


def test_edge_map_needs_bridgeless_graphs():
    p = enumerate_qd(corpus.triangle_pendant())
    with pytest.raises(PreconditionError):
        induce_edge_map(p, p, identity(p))


def test_normalize_iso_of_identity(dumb):
    p = enumerate_qd(dumb)
    h = normalize_iso(p, p, identity(p), induce_edge_map(p, p, identity(p)))
    assert h.mapping == tuple(range(len(p)))


# ----------------- vertex stars and bonds -----------------
def test_recover_vertex_star(triangle):
    p = enumerate_qd(triangle, "x")
    star = recover_vertex_star(p, "y")
    assert star.index == p.find(pd((), x=-1, y=1))
    assert star.edges == {"xy", "yz"}
    assert len(star.extensions) == 3
    assert star.extensions[frozenset()] == star.index
    assert recover_vertex_star(p, "x").index == p.find(pd(()))


def test_vertex_star_preconditions(two_triangles):
    with pytest.raises(PreconditionError):
        recover_vertex_star(enumerate_qd(two_triangles), "c")
    with pytest.raises(PreconditionError):
        recover_vertex_star(enumerate_qd(corpus.path2(weight=1)), "u")


def test_bond_vertex_test(triangle):
    q = enumerate_qd(triangle, "x")
    assert bond_vertex_test(q, pd((), x=-1, y=1), {"xy", "yz"}) == "y"
    with pytest.raises(PreconditionError):
        bond_vertex_test(q, pd(()), {"xy"})


def test_bond_hypothesis_can_fail():
    g = corpus.four_cycle()
    q = enumerate_qd(g)
    for i in q.fibre(()):
        with pytest.raises(HypothesisNotSatisfied):
            bond_vertex_test(q, q.elements[i], {"ab", "cd"})


# ----------------- reconstruction -----------------
@pytest.mark.parametrize("g", [corpus.triangle(), corpus.theta(), corpus.dumb(), corpus.k4()])
def test_reconstruct_relabeled(g):
    names = {v: v.upper() for v in g.vertex_ids}
    edges = {e: f"E_{e}" for e in g.edge_ids}
    h = corpus.relabel(g, names, edges)
    p, q = enumerate_qd(g), enumerate_qd(h)
    iso = reconstruct_biconnected(p, q, poset_isomorphism(p, q))
    assert verify_graph_isomorphism(g, h, iso)


@pytest.mark.parametrize("g, v0, v1", [
    (corpus.triangle(), "x", "z"),
    (corpus.dumb(), "s", "u"),
    (corpus.k4(), "a", "d"),
])
def test_star_recovery_does_not_depend_on_the_basepoint(g, v0, v1):
    h = corpus.relabel(g, {v: v.upper() for v in g.vertex_ids}, {e: f"E_{e}" for e in g.edge_ids})
    p, p1 = enumerate_qd(g, v0), enumerate_qd(g, v1)
    for w in g.vertex_ids:
        a, b = recover_vertex_star(p, w), recover_vertex_star(p1, w)
        assert a.edges == b.edges
        assert a.extensions.keys() == b.extensions.keys()
    q = enumerate_qd(h, v0.upper())
    isos = [reconstruct_biconnected(x, q, poset_isomorphism(x, q)) for x in (p, p1)]
    assert all(verify_graph_isomorphism(g, h, iso) for iso in isos)
    assert isos[0].vertex_map.keys() == isos[1].vertex_map.keys() == set(g.vertex_ids)


def test_reconstruct_needs_biconnected(two_triangles):
    p = enumerate_qd(two_triangles)
    with pytest.raises(PreconditionError):
        reconstruct_biconnected(p, p, identity(p))


# ----------------- comparison -----------------
def test_pendant_position_does_not_matter():
    verdict = torelli_compare(corpus.triangle_pendant("x"), corpus.triangle_pendant("y"))
    assert verdict.poset_isomorphic and verdict.components_match and verdict.agree
    assert "reconstruction" in verdict.witness


def test_triangle_and_theta_differ(triangle, theta):
    verdict = torelli_compare(triangle, theta)
    assert not verdict.poset_isomorphic
    assert not verdict.components_match
    assert verdict.agree


def test_whitney_pair_is_separated(whitney):
    verdict = torelli_compare(*whitney)
    assert (verdict.poset_isomorphic, verdict.components_match) == (False, False)


def test_glued_components_match(two_triangles):
    other = corpus.relabel(two_triangles, {"c": "hub"})
    verdict = torelli_compare(two_triangles, other)
    assert verdict.poset_isomorphic and verdict.components_match
    assert verdict.witness["components"] == [2, 2]
    assert "reconstruction" not in verdict.witness


def test_reduce_graph():
    g = reduce_graph(corpus.path2(weight=3))
    assert len(g.vertices) == 1 and not g.edges and g.is_pure


def test_match_components(triangle, theta):
    assert match_components([triangle, theta], [theta, triangle])
    assert not match_components([triangle, triangle], [triangle, theta])
    assert not match_components([triangle], [])


def test_verdict_disagreement_raises():
    verdict = Verdict(True, False, {"elements": [4, 4]})
    assert not verdict.agree
    assert verdict.to_json()["agree"] is False
    with pytest.raises(Falsifier) as info:
        verdict.require_agreement("Thm main1")
    assert info.value.exit_code == 4
    assert info.value.instance["witness"] == {"elements": [4, 4]}


def test_one_way_verdict():
    assert Verdict(False, True, equivalence=False).agree
    assert Verdict(False, False, equivalence=False).agree
    assert not Verdict(True, False, equivalence=False).agree
    assert not Verdict(False, True).agree


def test_falsifier_report_names_the_statement_once():
    failure = Falsifier("Thm main1", "poset side and graph side disagree")
    assert str(failure) == "Thm main1: poset side and graph side disagree"
    assert failure.to_report()["message"] == "poset side and graph side disagree"
