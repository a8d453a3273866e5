# qdposet/io.py — JSON and edge-list codecs for graphs, divisors, posets and complexes

import json
import logging
import re
from pathlib import Path

from qdposet.divisors import Divisor, Polarization, PseudoDivisor
from qdposet.errors import CarrierMismatchError, GraphError, GraphFileError, ParseError, PolarizationError
from qdposet.graph import Edge, Graph, Vertex, exceptional_id
from qdposet.helpers import dump_json, format_fraction, parse_fraction
from qdposet.poset import QDPoset, RankedPoset
from qdposet.tropical import JacobianComplex, MetricGraph

log = logging.getLogger(__name__)

TOKEN = re.compile(r"\S+")


# ----------------- Files -----------------
def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise GraphFileError("no such file", path=str(path)) from None
    except (OSError, UnicodeDecodeError) as e:
        raise GraphFileError(f"cannot read file ({e})", path=str(path)) from None


def _load_json(text: str, path: str | None) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno, path) from None


def _require(doc, key: str, kind: type, where: str, path: str | None):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"{where}: missing {key!r}", path=path)
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise ParseError(f"{where}.{key}: expected {kind.__name__}", path=path)
    return value


def _require_object(doc, where: str, path: str | None):
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected object", path=path)


# ----------------- Graphs -----------------
def parse_graph_json(text: str, path: str | None = None, allow_disconnected: bool = False) -> Graph:
    doc = _load_json(text, path)
    vertices, edges = [], []
    vertex_ids: dict[str, str] = {}
    for i, raw in enumerate(_require(doc, "vertices", list, "$", path)):
        where = f"$.vertices[{i}]"
        _require_object(raw, where, path)
        vid = _require(raw, "id", str, where, path)
        weight = raw.get("weight", 0)
        if not isinstance(weight, int) or isinstance(weight, bool) or weight < 0:
            raise ParseError(f"{where}.weight: expected a non-negative integer", path=path)
        if vid in vertex_ids:
            raise ParseError(f"{where}: duplicate vertex id {vid!r} (first at {vertex_ids[vid]})", path=path)
        vertex_ids[vid] = where
        vertices.append(Vertex(vid, weight))
    edge_ids: dict[str, str] = {}
    raw_edges = _require(doc, "edges", list, "$", path) if "edges" in doc else []
    for i, raw in enumerate(raw_edges):
        where = f"$.edges[{i}]"
        _require_object(raw, where, path)
        eid = _require(raw, "id", str, where, path)
        ends = _require(raw, "ends", list, where, path)
        if len(ends) != 2 or not all(isinstance(v, str) for v in ends):
            raise ParseError(f"{where}.ends: expected two vertex ids", path=path)
        if eid in edge_ids:
            raise ParseError(f"{where}: duplicate edge id {eid!r} (first at {edge_ids[eid]})", path=path)
        edge_ids[eid] = where
        length = None
        if raw.get("length") is not None:
            try:
                length = parse_fraction(raw["length"])
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"{where}.length: not an exact rational {raw['length']!r}", path=path) from None
        edges.append(Edge(eid, (ends[0], ends[1]), length))
    try:
        return Graph(tuple(vertices), tuple(edges), allow_disconnected=allow_disconnected)
    except GraphError as e:
        if type(e) is GraphError:
            raise ParseError(e.message, path=path) from None
        raise


def parse_edge_list(text: str, path: str | None = None) -> Graph:
    """One "u v [edge-id]" per line; "#" starts a comment; unnamed edges become e1, e2, ..."""
    vertices: dict[str, None] = {}
    edges: list[Edge] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = list(TOKEN.finditer(line.split("#", 1)[0]))
        if not tokens:
            continue
        if len(tokens) not in (2, 3):
            raise ParseError("expected 'u v [edge-id]'", lineno, tokens[0].start() + 1, path)
        u, v = tokens[0].group(), tokens[1].group()
        if len(tokens) == 3:
            eid, column = tokens[2].group(), tokens[2].start() + 1
        else:
            eid, column = f"e{len(edges) + 1}", tokens[0].start() + 1
        if eid in seen:
            raise ParseError(f"duplicate edge id {eid!r} (first on line {seen[eid]})", lineno, column, path)
        seen[eid] = lineno
        vertices.setdefault(u)
        vertices.setdefault(v)
        edges.append(Edge(eid, (u, v)))
    if not edges:
        raise ParseError("edge list is empty", path=path)
    return Graph(tuple(Vertex(v) for v in vertices), tuple(edges))


def load_graph(path: str | Path) -> Graph:
    """JSON for *.json, edge list otherwise."""
    text = read_text(path)
    if Path(path).suffix == ".json":
        g = parse_graph_json(text, str(path))
    else:
        g = parse_edge_list(text, str(path))
    log.info("loaded %s: %d vertices, %d edges", path, len(g.vertices), len(g.edges))
    return g


def load_metric_graph(path: str | Path) -> MetricGraph:
    g = load_graph(path)
    try:
        return MetricGraph.from_graph(g)
    except GraphError as e:
        raise ParseError(e.message, path=str(path)) from None


def graph_to_json(g: Graph) -> dict:
    edges = []
    for e in g.edges:
        entry = {"id": e.id, "ends": list(e.ends)}
        if e.length is not None:
            entry["length"] = format_fraction(e.length)
        edges.append(entry)
    return {"vertices": [{"id": v.id, "weight": v.weight} for v in g.vertices], "edges": edges}


# ----------------- Polarizations and Pseudo-divisors -----------------
def parse_polarization(text: str, g: Graph, path: str | None = None) -> Polarization:
    doc = _load_json(text, path)
    if not isinstance(doc, dict):
        raise ParseError("polarization must be an object {vertex-id: \"p/q\"}", path=path)
    values = {}
    for v, raw in doc.items():
        if not g.has_vertex(v):
            raise CarrierMismatchError(f"polarization names unknown vertex {v!r}")
        try:
            values[v] = parse_fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"$.{v}: not an exact rational {raw!r}", path=path) from None
    return Polarization.of(values)


def load_polarization(path: str | Path, g: Graph) -> Polarization:
    try:
        return parse_polarization(read_text(path), g, str(path))
    except PolarizationError as e:
        log.error("%s: %s", path, e.message)
        raise


def polarization_to_json(mu: Polarization) -> dict:
    return {v: format_fraction(q) for v, q in mu.items}


def pseudo_divisor_to_json(g: Graph, pd: PseudoDivisor) -> dict:
    edges = g.sort_edges(pd.edges)
    carrier = list(g.vertex_ids) + [exceptional_id(e) for e in edges]
    return {"edges": list(edges), "divisor": {v: pd.divisor[v] for v in carrier}}


def parse_pseudo_divisor(doc, g: Graph, where: str = "$", path: str | None = None) -> PseudoDivisor:
    edges = _require(doc, "edges", list, where, path)
    divisor = _require(doc, "divisor", dict, where, path)
    values = {}
    for v, k in divisor.items():
        if not isinstance(k, int) or isinstance(k, bool):
            raise ParseError(f"{where}.divisor.{v}: expected an integer", path=path)
        values[v] = k
    pd = PseudoDivisor(frozenset(edges), Divisor.of(values))
    pd.check(g)
    return pd


# ----------------- Posets -----------------
def poset_to_json(p: QDPoset) -> dict:
    return {
        "elements": [pseudo_divisor_to_json(p.graph, pd) for pd in p.elements],
        "covers": [[c.parent, c.child, {"edge": c.edge, "to": c.to}] for c in p.covers],
        "basepoint": p.basepoint,
    }


def dump_poset(p: QDPoset) -> str:
    return dump_json(poset_to_json(p))


def parse_ranked_poset(text: str, path: str | None = None) -> RankedPoset:
    """Poset JSON or covers-only JSON {"size": n, "covers": [[parent, child], ...]}."""
    doc = _load_json(text, path)
    covers = _require(doc, "covers", list, "$", path)
    if "size" in doc:
        size = _require(doc, "size", int, "$", path)
    else:
        size = len(_require(doc, "elements", list, "$", path))
    pairs = []
    for i, raw in enumerate(covers):
        if not isinstance(raw, list) or len(raw) < 2 or not all(isinstance(x, int) for x in raw[:2]):
            raise ParseError(f"$.covers[{i}]: expected [parent, child, ...]", path=path)
        pairs.append((raw[0], raw[1]))
    return RankedPoset.from_covers(size, pairs)


# ----------------- Complexes -----------------
def complex_to_json(j: JacobianComplex) -> dict:
    return {
        "cells": [
            {
                "element": c.element,
                "dim": c.dim,
                "sides": {e: format_fraction(q) for e, q in c.sides},
                "volume": format_fraction(c.volume),
            }
            for c in j.cells
        ],
        "attachments": [[a.parent, a.child, {"edge": a.edge, "side": str(a.side)}] for a in j.attachments],
    }

