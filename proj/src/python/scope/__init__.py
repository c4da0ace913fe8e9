"""Rubric-based evaluation of tool-using conversational agents.

Records are plain dicts in the JSONL layout used on disk. Operations that
talk to a model take a Gateway: the offline simulated provider, a recorded
mock script, or a remote endpoint configured through the environment.
"""

from ._scope import (
    ConfigError,
    Gateway,
    GatewayError,
    ParseError,
    ScopeError,
    aggregate,
    classify_subset,
    compute_metrics,
    evaluate,
    judge,
    learn,
    load_dataset,
    make_or_break_dominance_bound,
    make_splits,
    render_report,
    run_cli,
    run_experiment,
    situations,
    spur_decide,
    tools,
)

__all__ = [
    "ConfigError",
    "Gateway",
    "GatewayError",
    "ParseError",
    "ScopeError",
    "aggregate",
    "classify_subset",
    "compute_metrics",
    "evaluate",
    "judge",
    "learn",
    "load_dataset",
    "make_or_break_dominance_bound",
    "make_splits",
    "render_report",
    "run_cli",
    "run_experiment",
    "situations",
    "spur_decide",
    "tools",
]
