"""Python bindings for the newsky observatory core."""

from ._core import (
    Api,
    RatingTable,
    edge_weight,
    ingest_replay,
    k_core,
    log_odds_delta,
    louvain,
    max_k_core,
    normalize_domain,
    parse_replay_line,
    registrable_domain,
    run_audiences,
)

__all__ = [
    "Api",
    "RatingTable",
    "edge_weight",
    "ingest_replay",
    "k_core",
    "log_odds_delta",
    "louvain",
    "max_k_core",
    "normalize_domain",
    "parse_replay_line",
    "registrable_domain",
    "run_audiences",
]
