from .concentration import (
    DegreeConcentrationReport,
    IsolatedVertexReport,
    chernoff_tail,
    degree_concentration_check,
    isolated_vertex_check,
)
from .partition import (
    PartitionCensus,
    SphereLayer,
    SpherePartition,
    isolated_non_witnesses,
    isolated_clean_vertices,
    partition_census,
    sphere_partition,
)
from .witnesses import (
    ProfileCensus,
    WitnessCensus,
    WitnessProfile,
    common_sphere,
    near_pair_count,
    profile_census,
    sample_non_edges,
    witness_census,
    witness_mask,
    witness_set,
)

__all__ = [
    "DegreeConcentrationReport", "IsolatedVertexReport", "PartitionCensus",
    "ProfileCensus", "SphereLayer", "SpherePartition", "WitnessCensus",
    "WitnessProfile", "chernoff_tail", "isolated_non_witnesses", "common_sphere",
    "degree_concentration_check", "isolated_clean_vertices", "isolated_vertex_check",
    "near_pair_count", "partition_census", "profile_census", "sample_non_edges",
    "sphere_partition", "witness_census", "witness_mask", "witness_set",
]
