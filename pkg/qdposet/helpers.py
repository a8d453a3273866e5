# qdposet/helpers.py — common helpers: logging, exact rationals, stable JSON

import functools
import json
import logging
import sys
import traceback
from fractions import Fraction
from pathlib import Path

import click

from qdposet.config import load_config
from qdposet.errors import Falsifier, QDPosetError

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(name)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
VERBOSITY_LEVELS = {0: None, 1: logging.INFO, 2: logging.DEBUG}


# ----------------- Logging -----------------
def setup_logging(verbosity: int = 0) -> logging.Logger:
    """Point the package logger at the current stderr; stdout carries results only."""
    level = VERBOSITY_LEVELS.get(min(verbosity, 2))
    if level is None:
        level = getattr(logging, str(load_config()["log_level"]).upper(), logging.WARNING)
    root = logging.getLogger("qdposet")
    for old in list(root.handlers):
        root.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
    root.addHandler(handler)
    root.propagate = False
    root.setLevel(level)
    return root


# ----------------- Exact Rationals -----------------
def parse_fraction(value) -> Fraction:
    """Accept "p/q", "p", ints and Fractions; floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"not an exact rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(str(value).strip())


def format_fraction(value: Fraction) -> str:
    return str(Fraction(value))


# ----------------- Output -----------------
def dump_json(document) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def format_int_list(values) -> str:
    return "[" + ",".join(str(v) for v in values) + "]"


# ----------------- Command Plumbing -----------------
def write_report(failure: Falsifier, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dump_json(failure.to_report()), encoding="utf-8")
    click.echo(f"falsifier report written to {path}", err=True)
    return path


def guarded(command):
    """Run a command body; QDPosetError becomes "Error: ..." on stderr and its exit code."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            code = command(*args, **kwargs)
        except QDPosetError as e:
            logging.getLogger("qdposet").error("%s: %s", type(e).__name__, e)
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except Exception:
            traceback.print_exc()
            sys.exit(1)
        if code:
            sys.exit(code)

    return wrapper
