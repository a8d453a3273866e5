# qdposet/config.py — config.json loading and per-command run configuration

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from qdposet.errors import ParseError

CONFIG_FILE = Path(__file__).resolve().parent.parent / "config.json"
MAX_EDGES_ENV = "QDPOSET_MAX_EDGES"

DEFAULT_CONFIG = {
    "max_edges": 14,
    "seed": 0,
    "workers": 4,
    "log_level": "WARNING",
    "report_path": "falsifier_report.json",
    "quasistability_crosscheck_max_vertices": 6,
    "random_sweeps": 25,
}


# ----------------- Config Helpers -----------------
def load_config(path: str | Path | None = None) -> dict:
    config = dict(DEFAULT_CONFIG)
    try:
        with open(path or CONFIG_FILE) as f:
            config.update(json.load(f))
    except FileNotFoundError:
        pass
    env_cap = os.environ.get(MAX_EDGES_ENV)
    if env_cap:
        try:
            config["max_edges"] = int(env_cap)
        except ValueError:
            raise ParseError(f"{MAX_EDGES_ENV} must be an integer, got {env_cap!r}") from None
    return config


def max_edges() -> int:
    """Edge cap for exhaustive enumeration (config, then QDPOSET_MAX_EDGES)."""
    return int(load_config()["max_edges"])


# ----------------- Run Config -----------------
@dataclass(frozen=True)
class RunConfig:
    command: str
    graphs: tuple[str, ...] = ()
    base: str | None = None
    polarization: str = "canonical"
    out: str | None = None
    format: str = "json"
    verbosity: int = 0
    seed: int = 0
    max_edges: int = 14
    workers: int = 4
    report_path: str = "falsifier_report.json"
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def resolve(cls, command: str, **options) -> "RunConfig":
        """Merge CLI options over config.json; None options fall back to the file."""
        cfg = load_config()
        values = {
            "seed": cfg["seed"],
            "max_edges": cfg["max_edges"],
            "workers": cfg["workers"],
            "report_path": cfg["report_path"],
        }
        values.update({k: v for k, v in options.items() if v is not None})
        return cls(command=command, **values)
