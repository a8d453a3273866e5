# routes/torelli_routes.py — iso and torelli commands

import json
import logging

import click

from qdposet.config import RunConfig
from qdposet.errors import Falsifier
from qdposet.helpers import dump_json, guarded, setup_logging, write_report
from qdposet.io import load_graph, parse_ranked_poset, read_text
from qdposet.poset import RankedPoset, enumerate_qd, poset_isomorphism
from qdposet.torelli import torelli_compare

log = logging.getLogger("qdposet.routes.torelli")


def load_poset_or_graph(path: str, max_edges: int) -> RankedPoset:
    """Poset JSON (anything with "covers") is taken as given; graphs are enumerated."""
    text = read_text(path)
    if path.endswith(".json"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            doc = None
        if isinstance(doc, dict) and "covers" in doc:
            return parse_ranked_poset(text, path)
    return enumerate_qd(load_graph(path), max_edges=max_edges).ranked


# ----------------- Iso -----------------
@click.command("iso")
@click.option("-g", "--graph", "first", required=True, type=click.Path())
@click.option("-h2", "--graph2", "second", required=True, type=click.Path())
@click.option("-v", "--verbose", count=True)
@guarded
def iso(first, second, verbose):
    """Decide whether two QD posets (or covers-only posets) are isomorphic."""
    setup_logging(verbose)
    config = RunConfig.resolve("iso", graphs=(first, second), verbosity=verbose)
    p = load_poset_or_graph(first, config.max_edges)
    q = load_poset_or_graph(second, config.max_edges)
    f = poset_isomorphism(p, q)
    click.echo(dump_json({"isomorphic": f is not None, "mapping": list(f.mapping) if f else []}), nl=False)
    return 0


# ----------------- Torelli -----------------
@click.command("torelli")
@click.option("-g", "--graph", "first", required=True, type=click.Path())
@click.option("-h2", "--graph2", "second", required=True, type=click.Path())
@click.option("-o", "--out", default=None, type=click.Path(), help="Falsifier report path.")
@click.option("-v", "--verbose", count=True)
@guarded
def torelli(first, second, out, verbose):
    """Compare QD(Γ) ≅ QD(Γ′) with the biconnected components of the reduced graphs."""
    setup_logging(verbose)
    config = RunConfig.resolve("torelli", graphs=(first, second), out=out, verbosity=verbose)
    g, g2 = load_graph(first), load_graph(second)
    try:
        verdict = torelli_compare(g, g2)
        click.echo(dump_json(verdict.to_json()), nl=False)
        verdict.require_agreement("Thm main1")
    except Falsifier as e:
        write_report(e, config.out or config.report_path)
        raise
    return 0


torelli_commands = [iso, torelli]
