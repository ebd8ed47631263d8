"""Two-step estimation of strategic network formation with latent blocks."""
from .graph import CovariateSet, Graph, common_neighbors, feature_adjacency, graph_stats
from .model import (
    BlockAssignment,
    ModelParams,
    change_stats,
    direct_utility,
    exact_stationary,
    potential,
)

__version__ = "0.1.0"
