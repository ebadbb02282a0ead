"""Grid-based chain recurrence and attractor analysis for semigroup actions."""

import json
import os

from ._core import (
    BudgetError,
    ConfigError,
    InvariantError,
    ParseError,
    __version__,
    config_hash,
    eval_box,
    eval_point,
    exact_chain_components,
    normalize_map,
)
from . import _core

__all__ = [
    "BudgetError",
    "ConfigError",
    "InvariantError",
    "ParseError",
    "__version__",
    "config_hash",
    "eval_box",
    "eval_point",
    "exact_chain_components",
    "normalize_map",
    "oracle_seed_report",
    "oracle_sweep",
    "run",
]


def run(stage, scenario, out_dir, seed=0, export_graph=False):
    """Run a stage ("cr", "attractors" or "duality") and return its report.

    `scenario` is a path to a scenario file or an already decoded dict.
    """
    out_dir = os.fspath(out_dir)
    if isinstance(scenario, dict):
        text = _core.run_scenario_json(stage, json.dumps(scenario), out_dir, seed, export_graph)
    else:
        text = _core.run_scenario_file(stage, os.fspath(scenario), out_dir, seed, export_graph)
    return json.loads(text)


def oracle_sweep(seeds, n_max=6, abelian_only=True, base_seed=0, out_dir="out/oracle"):
    return json.loads(_core.oracle_sweep(seeds, n_max, abelian_only, base_seed, os.fspath(out_dir)))


def oracle_seed_report(seed, n_max=6, abelian_only=True):
    return json.loads(_core.oracle_seed_report(seed, n_max, abelian_only))
