import json

import pytest

from qdposet.config import DEFAULT_CONFIG, MAX_EDGES_ENV, RunConfig, load_config, max_edges
from qdposet.errors import ParseError


def test_defaults_when_file_is_missing(tmp_path, monkeypatch):
    monkeypatch.delenv(MAX_EDGES_ENV, raising=False)
    assert load_config(tmp_path / "none.json") == DEFAULT_CONFIG


def test_file_overrides_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv(MAX_EDGES_ENV, raising=False)
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 7, "workers": 1}))
    config = load_config(path)
    assert (config["seed"], config["workers"], config["max_edges"]) == (7, 1, 14)


def test_env_overrides_edge_cap(tmp_path, monkeypatch):
    monkeypatch.setenv(MAX_EDGES_ENV, "9")
    assert load_config(tmp_path / "none.json")["max_edges"] == 9
    assert max_edges() == 9


def test_env_edge_cap_must_be_an_integer(tmp_path, monkeypatch):
    monkeypatch.setenv(MAX_EDGES_ENV, "abc")
    with pytest.raises(ParseError, match="QDPOSET_MAX_EDGES must be an integer") as info:
        load_config(tmp_path / "none.json")
    assert info.value.exit_code == 2


def test_resolve_prefers_options(monkeypatch):
    monkeypatch.delenv(MAX_EDGES_ENV, raising=False)
    config = RunConfig.resolve("verify", seed=5, workers=None, out=None)
    assert config.command == "verify"
    assert config.seed == 5
    assert config.workers == DEFAULT_CONFIG["workers"]
    assert config.out is None
    assert config.polarization == "canonical"
