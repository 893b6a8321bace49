"""Distances and consensus for clusterings, computed on kernel embeddings of their clusters."""

__version__ = "0.1.0"

from .kernels import (
    DimensionError,
    FeatureMap,
    Kernel,
    LiftConfig,
    build_feature_map,
    derive_seed,
    discrete,
    gaussian,
    kernel_eval,
    kernel_matrix,
    lift_point,
    lift_points,
    median_bandwidth,
    rho_for,
)
from .partitions import DataSet, Partition, PartitionError, check, cluster_mass, cluster_masses, harden, validate
from .embed import (
    ClusterVector,
    DegenerateEmbeddingError,
    cluster_distance_approx,
    embed_cluster,
    embed_partition,
    exact_gamma,
    normalize,
)
from .transport import TransportPlan, solve_transport
from .distances import LiftContext, WeightedVectorSet, lift_emd, lift_h, lift_kd, overlap_plan, to_weighted_set, transportation
from .metrics import accuracy, contingency, jaccard_distance, nmi, rand_distance, variation_of_information
from .consensus import (
    ConsensusConfig,
    ConsensusResult,
    assign_points,
    consensus_hac,
    consensus_kmeans,
    lift_ssd,
    pool,
    run_consensus,
)
