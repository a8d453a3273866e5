import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from qdposet import corpus

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture
def loop():
    return corpus.loop()


@pytest.fixture
def path2():
    return corpus.path2()


@pytest.fixture
def twocyc():
    return corpus.twocyc()


@pytest.fixture
def theta():
    return corpus.theta()


@pytest.fixture
def triangle():
    return corpus.triangle()


@pytest.fixture
def dumb():
    return corpus.dumb()


@pytest.fixture
def quad():
    return corpus.quad()


@pytest.fixture
def two_triangles():
    return corpus.two_triangles()


@pytest.fixture
def whitney():
    return corpus.whitney_pair()


@pytest.fixture
def corpus_dir():
    return CORPUS_DIR


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def small_corpus(tmp_path):
    """A copy of a few shipped files, safe to corrupt."""
    for name in ("loop.json", "twocyc.json", "twocyc.poset.json", "triangle.json"):
        shutil.copy(CORPUS_DIR / name, tmp_path / name)
    return tmp_path
