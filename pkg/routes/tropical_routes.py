# routes/tropical_routes.py — the tropical command

import logging
from pathlib import Path

import click

from qdposet.config import RunConfig
from qdposet.errors import Falsifier
from qdposet.helpers import dump_json, format_fraction, format_int_list, guarded, setup_logging, write_report
from qdposet.io import complex_to_json, load_metric_graph
from qdposet.tropical import build_jacobian_complex, top_volume, tropical_torelli_compare

log = logging.getLogger("qdposet.routes.tropical")


@click.command("tropical")
@click.option("-g", "--graph", "first", required=True, type=click.Path(), help="Metric graph JSON.")
@click.option("-h2", "--graph2", "second", default=None, type=click.Path(), help="Compare with this curve.")
@click.option("--base", default=None)
@click.option("-o", "--out", default=None, type=click.Path())
@click.option("-v", "--verbose", count=True)
@guarded
def tropical(first, second, base, out, verbose):
    """Build the cell complex of the tropical Jacobian, or compare two curves."""
    setup_logging(verbose)
    config = RunConfig.resolve("tropical", graphs=tuple(p for p in (first, second) if p), base=base,
                               out=out, verbosity=verbose)
    x = load_metric_graph(first)
    if second is not None:
        x2 = load_metric_graph(second)
        try:
            verdict = tropical_torelli_compare(x, x2)
            click.echo(dump_json(verdict.to_json()), nl=False)
            verdict.require_agreement("Thm main2")
        except Falsifier as e:
            write_report(e, config.out or config.report_path)
            raise
        return 0
    j = build_jacobian_complex(x, config.base)
    if config.out:
        Path(config.out).write_text(dump_json(complex_to_json(j)), encoding="utf-8")
        log.info("wrote %s", config.out)
    click.echo(f"volume={format_fraction(top_volume(j))} fvector={format_int_list(j.f_vector)}")
    return 0


tropical_commands = [tropical]
