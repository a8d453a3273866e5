import json
from fractions import Fraction

import pytest

from qdposet import corpus
from qdposet.divisors import Polarization, PseudoDivisor
from qdposet.errors import CarrierMismatchError, DisconnectedGraphError, GraphFileError, ParseError
from qdposet.io import (
    complex_to_json,
    dump_poset,
    graph_to_json,
    load_graph,
    load_metric_graph,
    parse_edge_list,
    parse_graph_json,
    parse_polarization,
    parse_pseudo_divisor,
    parse_ranked_poset,
    polarization_to_json,
    poset_to_json,
    pseudo_divisor_to_json,
    read_text,
)
from qdposet.poset import enumerate_qd
from qdposet.tropical import build_jacobian_complex


# ----------------- graph JSON -----------------
def test_shipped_graphs_match_named_graphs(corpus_dir):
    named = corpus.named_graphs()
    for name in ("loop", "path2", "twocyc", "theta", "triangle", "dumb", "two_triangles"):
        assert load_graph(corpus_dir / f"{name}.json") == named[name]


def test_graph_json_errors_name_the_json_path():
    with pytest.raises(ParseError, match=r"\$\.vertices\[1\]: duplicate vertex id 'u' \(first at \$\.vertices\[0\]\)"):
        parse_graph_json('{"vertices": [{"id": "u"}, {"id": "u"}]}')
    with pytest.raises(ParseError, match=r"\$: missing 'vertices'"):
        parse_graph_json('{"edges": []}')
    with pytest.raises(ParseError, match=r"\$\.edges\[0\]\.ends"):
        parse_graph_json('{"vertices": [{"id": "u"}], "edges": [{"id": "a", "ends": ["u"]}]}')
    with pytest.raises(ParseError, match="weight"):
        parse_graph_json('{"vertices": [{"id": "u", "weight": -1}]}')


def test_graph_json_rejects_wrong_container_types():
    with pytest.raises(ParseError, match=r"\$\.edges: expected list"):
        parse_graph_json('{"vertices": [{"id": "u"}], "edges": 5}')
    with pytest.raises(ParseError, match=r"\$\.edges\[0\]: expected object"):
        parse_graph_json('{"vertices": [{"id": "u"}], "edges": [7]}')
    with pytest.raises(ParseError, match=r"\$\.vertices\[0\]: expected object"):
        parse_graph_json('{"vertices": ["u"]}')


def test_graph_json_syntax_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_graph_json('{"vertices": [\n  {"id": }]}', path="bad.json")
    assert info.value.line == 2
    assert info.value.path == "bad.json"
    assert str(info.value).startswith("bad.json, line 2, column")


def test_graph_json_structure_errors():
    with pytest.raises(ParseError, match="unknown vertex"):
        parse_graph_json('{"vertices": [{"id": "u"}], "edges": [{"id": "a", "ends": ["u", "w"]}]}')
    with pytest.raises(DisconnectedGraphError):
        parse_graph_json('{"vertices": [{"id": "u"}, {"id": "v"}]}')
    g = parse_graph_json('{"vertices": [{"id": "u"}, {"id": "v"}]}', allow_disconnected=True)
    assert g.vertex_ids == ("u", "v")


def test_lengths_must_be_exact():
    doc = '{"vertices": [{"id": "u"}], "edges": [{"id": "a", "ends": ["u", "u"], "length": %s}]}'
    assert parse_graph_json(doc % '"3/2"').edge("a").length == Fraction(3, 2)
    with pytest.raises(ParseError, match="exact rational"):
        parse_graph_json(doc % "1.5")


def test_graph_to_json_reads_back(triangle):
    assert parse_graph_json(json.dumps(graph_to_json(triangle))) == triangle


# ----------------- edge lists -----------------
def test_edge_list(corpus_dir):
    g = load_graph(corpus_dir / "triangle_pendant_y.txt")
    assert g == corpus.triangle_pendant("y")


def test_edge_list_default_ids_and_comments():
    g = parse_edge_list("# two parallel edges\ns t\ns t  # second\n")
    assert g.edge_ids == ("e1", "e2")
    assert g.vertex_ids == ("s", "t")


def test_edge_list_errors_have_line_and_column():
    with pytest.raises(ParseError) as info:
        parse_edge_list("a b x\nb c x\n", path="g.txt")
    assert (info.value.line, info.value.column) == (2, 5)
    assert "first on line 1" in str(info.value)
    with pytest.raises(ParseError) as info:
        parse_edge_list("a b\n  a b c d\n")
    assert (info.value.line, info.value.column) == (2, 3)
    with pytest.raises(ParseError, match="empty"):
        parse_edge_list("# nothing\n")


def test_missing_file(tmp_path):
    with pytest.raises(GraphFileError, match="no such file") as info:
        read_text(tmp_path / "absent.json")
    assert info.value.exit_code == 2


def test_metric_graph_file(corpus_dir):
    x = load_metric_graph(corpus_dir / "twocyc_3_5.json")
    assert x.lengths == {"e1": 3, "e2": 5}
    with pytest.raises(ParseError, match="without a length"):
        load_metric_graph(corpus_dir / "twocyc.json")


# ----------------- polarizations and pseudo-divisors -----------------
def test_polarization(twocyc):
    mu = parse_polarization('{"s": "1/2", "t": "-1/2"}', twocyc)
    assert mu == Polarization.of({"s": Fraction(1, 2), "t": Fraction(-1, 2)})
    assert polarization_to_json(mu) == {"s": "1/2", "t": "-1/2"}
    with pytest.raises(CarrierMismatchError):
        parse_polarization('{"q": 1}', twocyc)
    with pytest.raises(ParseError):
        parse_polarization('[1, 2]', twocyc)


def test_pseudo_divisor_documents(twocyc):
    pd = PseudoDivisor.make({"e1"}, {"s": -1})
    doc = pseudo_divisor_to_json(twocyc, pd)
    assert doc == {"edges": ["e1"], "divisor": {"s": -1, "t": 0, "v@e1": 1}}
    assert parse_pseudo_divisor(doc, twocyc) == pd
    with pytest.raises(CarrierMismatchError):
        parse_pseudo_divisor({"edges": ["e1"], "divisor": {"s": -1}}, twocyc)
    with pytest.raises(ParseError, match="integer"):
        parse_pseudo_divisor({"edges": [], "divisor": {"s": "1"}}, twocyc)


# ----------------- posets -----------------
def test_cached_poset_is_byte_stable(twocyc, corpus_dir):
    assert dump_poset(enumerate_qd(twocyc, "s")) == read_text(corpus_dir / "twocyc.poset.json")


def test_poset_json_shape(triangle):
    doc = poset_to_json(enumerate_qd(triangle))
    assert doc["basepoint"] == "x"
    assert len(doc["elements"]) == 6
    assert all(len(c) == 3 and set(c[2]) == {"edge", "to"} for c in doc["covers"])


def test_parse_ranked_poset(twocyc):
    r = parse_ranked_poset(dump_poset(enumerate_qd(twocyc)))
    assert r.size == 4
    assert r.rank_histogram == (2, 2)
    r = parse_ranked_poset('{"size": 3, "covers": [[2, 0], [2, 1]]}')
    assert r.maxima == (2,)
    with pytest.raises(ParseError, match=r"\$\.covers\[0\]"):
        parse_ranked_poset('{"size": 2, "covers": [["a", 0]]}')


# ----------------- complexes -----------------
def test_complex_json(corpus_dir):
    j = build_jacobian_complex(load_metric_graph(corpus_dir / "theta_1_1_1.json"))
    doc = complex_to_json(j)
    assert len(doc["cells"]) == 12
    assert doc["cells"][-1]["volume"] == "1"
    assert doc["cells"][-1]["sides"] == {"e2": "1", "e3": "1"}
    assert {a[2]["side"] for a in doc["attachments"]} == {"0", "1"}
