# routes/build_routes.py — build and oracle commands

import logging
from pathlib import Path

import click

from qdposet.config import RunConfig
from qdposet.errors import Falsifier
from qdposet.helpers import format_int_list, guarded, setup_logging, write_report
from qdposet.io import dump_poset, load_graph, load_polarization, read_text
from qdposet.poset import brute_force_qd, enumerate_qd, hasse_export

log = logging.getLogger("qdposet.routes.build")


def summary_line(p) -> str:
    return f"elements={len(p)} maxima={len(p.ranked.maxima)} ranks={format_int_list(p.ranked.rank_histogram)}"


# ----------------- Build -----------------
@click.command("build")
@click.option("-g", "--graph", "graph_path", required=True, type=click.Path(), help="Graph JSON or edge list.")
@click.option("--base", default=None, help="Basepoint vertex id (default: least id).")
@click.option("--polarization", default=None, help='"canonical" or a polarization JSON file.')
@click.option("-o", "--out", default=None, type=click.Path(), help="Write the poset here.")
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default=None)
@click.option("-v", "--verbose", count=True)
@guarded
def build(graph_path, base, polarization, out, fmt, verbose):
    """Enumerate QD(Γ) and print its summary line."""
    setup_logging(verbose)
    config = RunConfig.resolve("build", graphs=(graph_path,), base=base, polarization=polarization,
                               out=out, format=fmt, verbosity=verbose)
    g = load_graph(graph_path)
    mu = None if config.polarization == "canonical" else load_polarization(config.polarization, g)
    p = enumerate_qd(g, config.base, mu, max_edges=config.max_edges)
    if config.out:
        text = hasse_export(p) if config.format == "dot" else dump_poset(p)
        Path(config.out).write_text(text, encoding="utf-8")
        log.info("wrote %s", config.out)
    click.echo(summary_line(p))
    return 0


# ----------------- Oracle -----------------
@click.command("oracle")
@click.option("-g", "--graph", "graph_path", required=True, type=click.Path())
@click.option("--base", default=None)
@click.option("-o", "--out", "cached", default=None, type=click.Path(), help="Cached poset JSON to check.")
@click.option("-v", "--verbose", count=True)
@guarded
def oracle(graph_path, base, cached, verbose):
    """Recompute QD(Γ) by brute force and compare it with the fast build or a cached file."""
    setup_logging(verbose)
    config = RunConfig.resolve("oracle", graphs=(graph_path,), base=base, out=cached, verbosity=verbose)
    g = load_graph(graph_path)
    slow = brute_force_qd(g, config.base, max_edges=config.max_edges)
    if config.out:
        same = read_text(config.out) == dump_poset(slow)
        against = config.out
    else:
        fast = enumerate_qd(g, config.base, max_edges=config.max_edges)
        same = fast.elements == slow.elements and fast.covers == slow.covers
        against = "enumerate_qd"
    if not same:
        failure = Falsifier("QD enumeration", f"brute-force poset differs from {against}",
                            {"graph": str(graph_path), "elements": len(slow)})
        write_report(failure, config.report_path)
        raise failure
    click.echo(f"oracle {summary_line(slow)} match")
    return 0


build_commands = [build, oracle]
