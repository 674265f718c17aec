"""Exact reconstruction of hidden random graphs through a distance oracle."""

__version__ = "0.1.0"

from .distance_oracle import DistanceOracle, QueryLedger
from .errors import (
    ConnectivityError,
    DisconnectedGraphError,
    InexactReconstructionError,
    NearPairError,
    OracleReconError,
)
from .graph_core import Graph, GraphParams, bfs_distances, gnp_generate
from .reconstructor import (
    LandmarkPlan,
    ReconstructionReport,
    pseudo_edges,
    reconstruct,
    reconstruct_exhaustive,
    sample_landmarks,
)

__all__ = [
    "ConnectivityError", "DisconnectedGraphError", "DistanceOracle", "Graph",
    "GraphParams", "InexactReconstructionError", "LandmarkPlan", "NearPairError",
    "OracleReconError", "QueryLedger", "ReconstructionReport", "bfs_distances",
    "gnp_generate", "pseudo_edges", "reconstruct", "reconstruct_exhaustive",
    "sample_landmarks",
]
