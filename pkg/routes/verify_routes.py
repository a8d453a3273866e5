# routes/verify_routes.py — the verify command

import logging

import click

from qdposet.config import RunConfig
from qdposet.helpers import guarded, setup_logging, write_report
from qdposet.verify import verify_corpus

log = logging.getLogger("qdposet.routes.verify")


@click.command("verify")
@click.argument("corpus_dir", type=click.Path())
@click.option("--seed", type=int, default=None, help="Seed for the random quasistability sweeps.")
@click.option("--workers", type=int, default=None)
@click.option("-o", "--out", default=None, type=click.Path(), help="Falsifier report path.")
@click.option("-v", "--verbose", count=True)
@guarded
def verify(corpus_dir, seed, workers, out, verbose):
    """Run the invariant suite over a corpus directory; prints check<TAB>subject<TAB>PASS|FAIL."""
    setup_logging(verbose)
    config = RunConfig.resolve("verify", graphs=(corpus_dir,), seed=seed, workers=workers, out=out,
                               verbosity=verbose)
    report = verify_corpus(corpus_dir, config)
    click.echo(report.table(), nl=False)
    failed = report.first_failure
    if failed is None:
        return 0
    log.error("%s failed on %s", failed.check, failed.subject)
    write_report(failed.failure, config.out or config.report_path)
    return failed.failure.exit_code


verify_commands = [verify]
