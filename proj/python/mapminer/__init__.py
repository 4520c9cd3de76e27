"""Process-map mining from event logs with hidden Markov models."""

from ._core import (
    MapMinerError,
    eagle_cluster,
    extended_modularity,
    forward,
    maximal_cliques,
    network_metrics,
    prune_transitions,
    run_cli,
    sample,
    train,
    viterbi,
)

__all__ = [
    "MapMinerError",
    "eagle_cluster",
    "extended_modularity",
    "forward",
    "maximal_cliques",
    "network_metrics",
    "prune_transitions",
    "run_cli",
    "sample",
    "train",
    "viterbi",
]
