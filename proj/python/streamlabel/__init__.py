"""Streaming auto-labeling with novel-label discovery, plus a heterogeneous
scheduling simulator. Thin Python layer over the C++ core."""

import json

from . import _core
from ._core import (
    ConfigError,
    ContractError,
    DataError,
    Division,
    KernelSpec,
    MetricError,
    accuracy,
    division_time,
    f_beta,
    f_new,
    generate_synthetic,
    m_new,
    optimal_division,
    optimal_threads,
    parallel_time,
    serial_time,
    speedup,
)

__version__ = _core.__version__

STRATEGIES = ["ST.1", "ST.2", "ST.3", "ST.4", "ST.5", "ST.6"]


def config_defaults():
    """Default run configuration, keyed by config name."""
    return dict(_core.config_defaults())


def label(labeled_x, labeled_y, stream_x, stream_y=None, stream_ids=None, **config):
    """Label a stream. Keyword arguments are config keys (num_hf, tau, seed, ...).

    Returns a dict with ``decisions`` (list of dicts), ``summary`` (dict) and
    ``n_labels`` (label count after each chunk)."""
    overrides = {k: _config_str(v) for k, v in config.items()}
    out = _core.label(labeled_x, list(labeled_y), stream_x,
                      None if stream_y is None else list(stream_y),
                      None if stream_ids is None else list(stream_ids), overrides)
    return {
        "decisions": [json.loads(line) for line in out["decisions"]],
        "decision_lines": list(out["decisions"]),
        "summary": json.loads(out["summary"]),
        "n_labels": list(out["n_labels"]),
    }


def evaluate(decision_lines, truth, seed_labels):
    """Score a decision log (JSON lines) against ``{id: true_label}``."""
    return json.loads(_core.evaluate(list(decision_lines), dict(truth), set(seed_labels)))


def simulate(strategy="ST.6", steps=100, n_l_start=1, n_l_end=10, n_l=None, scenario=None, schedule=False):
    """Simulate one strategy; returns the report as a dict."""
    return json.loads(_core.simulate(strategy, steps, n_l_start, n_l_end,
                                     None if n_l is None else list(n_l),
                                     None if scenario is None else str(scenario), schedule))


def _config_str(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


__all__ = [
    "ConfigError", "ContractError", "DataError", "Division", "KernelSpec", "MetricError",
    "STRATEGIES", "accuracy", "config_defaults", "division_time", "evaluate", "f_beta", "f_new",
    "generate_synthetic", "label", "m_new", "optimal_division", "optimal_threads", "parallel_time",
    "serial_time", "simulate", "speedup",
]
