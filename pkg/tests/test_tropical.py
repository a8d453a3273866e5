from fractions import Fraction

import pytest

from qdposet import corpus
from qdposet.errors import BridgedCurveError, GraphError, PreconditionError
from qdposet.tropical import (
    MetricGraph,
    build_jacobian_complex,
    canonical_model,
    top_volume,
    tropical_torelli_compare,
)


def curve(g):
    return MetricGraph.from_graph(g)


# ----------------- metric graphs -----------------
def test_lengths_are_required_and_positive(twocyc):
    with pytest.raises(GraphError, match="without a length"):
        MetricGraph.from_graph(twocyc)
    with pytest.raises(GraphError, match="exactly one length"):
        MetricGraph(twocyc, {"e1": 1})
    with pytest.raises(GraphError, match="positive"):
        MetricGraph(twocyc, {"e1": 1, "e2": 0})


def test_lengths_are_exact(twocyc):
    x = MetricGraph(twocyc, {"e1": "1/3", "e2": 2})
    assert x.total_length == Fraction(7, 3)
    assert x.graph.edge("e1").length == Fraction(1, 3)


# ----------------- canonical model -----------------
def test_two_cycle_becomes_a_loop():
    model = canonical_model(curve(corpus.twocyc(("3", "5"))))
    assert model.graph.vertex_ids == ("t",)
    assert model.graph.edge_ids == ("e1",)
    assert model.graph.edge("e1").is_loop
    assert model.lengths == {"e1": 8}


def test_triangle_becomes_a_loop():
    model = canonical_model(curve(corpus.triangle(("1", "2", "3"))))
    assert len(model.graph.vertices) == 1
    assert model.total_length == 6


def test_trivalent_vertices_stay():
    x = curve(corpus.theta(("1", "2", "3")))
    assert canonical_model(x).graph == x.graph


def test_weighted_vertices_stay():
    g = corpus.build(["x", "y", "z"], [("xy", "x", "y"), ("yz", "y", "z"), ("zx", "z", "x")], {"x": 1},
                     lengths=("1", "1", "1"))
    model = canonical_model(curve(g))
    assert model.graph.vertex_ids == ("x",)
    assert model.total_length == 3


# ----------------- Jacobian complex -----------------
@pytest.mark.parametrize("lengths, volume", [
    (("3", "5"), 8),
    (("1/2", "1/3"), Fraction(5, 6)),
])
def test_two_cycle_complex(lengths, volume):
    j = build_jacobian_complex(curve(corpus.twocyc(lengths)))
    assert j.f_vector == (1, 1)
    assert top_volume(j) == volume
    assert [a.side for a in j.attachments] == [0]


@pytest.mark.parametrize("lengths, volume", [
    (("1", "1", "1"), 3),
    (("1", "2", "3"), 11),
])
def test_theta_complex(lengths, volume):
    j = build_jacobian_complex(curve(corpus.theta(lengths)))
    assert j.f_vector == (3, 6, 3)
    assert top_volume(j) == volume
    assert {a.side for a in j.attachments} == {0, 1}
    top = j.poset.ranked.maxima[0]
    assert len(j.cell_shape(top)) == 2


@pytest.mark.parametrize("name", sorted(corpus.metric_graphs()))
def test_f_vector_is_the_rank_histogram(name):
    j = build_jacobian_complex(curve(corpus.metric_graphs()[name]))
    assert j.f_vector == j.poset.ranked.rank_histogram
    assert len(j.cells) == len(j.poset)


def test_tree_is_a_point():
    j = build_jacobian_complex(curve(corpus.build(["u", "v"], [("b", "u", "v")], lengths=("1",))))
    assert j.f_vector == (1,)
    assert top_volume(j) == 1


def test_complex_preconditions():
    weighted = corpus.build(["u", "v"], [("b", "u", "v")], {"u": 1}, lengths=("1",))
    with pytest.raises(PreconditionError, match="pure"):
        build_jacobian_complex(curve(weighted))
    with pytest.raises(PreconditionError, match="suppressed"):
        build_jacobian_complex(curve(corpus.twocyc(("3", "5"))), "s")


# ----------------- comparison -----------------
def test_permuted_lengths_agree():
    verdict = tropical_torelli_compare(curve(corpus.theta(("1", "2", "3"))), curve(corpus.theta(("3", "1", "2"))))
    assert verdict.poset_isomorphic and verdict.components_match
    assert verdict.witness["volumes"] == ["11", "11"]


def test_lengths_separate_combinatorially_equal_curves():
    verdict = tropical_torelli_compare(curve(corpus.theta(("1", "1", "1"))), curve(corpus.theta(("1", "1", "2"))))
    assert (verdict.poset_isomorphic, verdict.components_match) == (False, False)
    assert verdict.agree


def test_circles_of_equal_length_agree():
    verdict = tropical_torelli_compare(curve(corpus.triangle(("1", "2", "3"))), curve(corpus.twocyc(("2", "4"))))
    assert verdict.poset_isomorphic and verdict.components_match
    assert verdict.witness["fvectors"] == [[1, 1], [1, 1]]


def test_bridges_are_rejected():
    bridged = corpus.build(["u", "v"], [("b", "u", "v")], lengths=("1",))
    with pytest.raises(BridgedCurveError) as info:
        tropical_torelli_compare(curve(bridged), curve(corpus.theta(("1", "1", "1"))))
    assert info.value.exit_code == 5


def two_loops_and_a_triangle(lengths):
    return corpus.build(
        ["v0", "v1", "v2"],
        [("e1", "v0", "v0"), ("e2", "v0", "v1"), ("e3", "v0", "v2"), ("e4", "v1", "v1"), ("e5", "v1", "v2")],
        lengths=lengths,
    )


def test_matching_components_need_not_give_isomorphic_complexes():
    x = curve(two_loops_and_a_triangle(("3", "1", "2", "2", "3")))
    y = curve(two_loops_and_a_triangle(("3", "2", "2", "2", "2")))
    verdict = tropical_torelli_compare(x, y)
    assert (verdict.poset_isomorphic, verdict.components_match) == (False, True)
    assert verdict.agree
    assert verdict.to_json()["claim"] == "implication"
    assert verdict.witness["volumes"] == ["36", "36"]
    verdict.require_agreement("Thm main2")
