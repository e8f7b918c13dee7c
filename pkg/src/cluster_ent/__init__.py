"""Genuine multipartite entanglement of four-qubit cluster-diagonal states."""

from .classify import REGIONS, RegionLabel, bisep_surface, classify, classify_quad, region_grid, thresholds
from .criteria import CriteriaReport, biseparable_verdict, raw_criteria, reduced_criteria
from .errors import ClusterEntError
from .graph_basis import build_cluster_graph, cluster_basis, stabilizer_generators, twirl_to_fvector
from .oracle_solver import solve_min_relent, verify
from .ree_analytic import REEResult, closest_state, genuine_ree, relative_entropy
from .state_model import BlockParams, NoiseSpec, block_params, dephasing_state, sample_random, validate

__all__ = [
    "REGIONS",
    "BlockParams",
    "ClusterEntError",
    "CriteriaReport",
    "NoiseSpec",
    "REEResult",
    "RegionLabel",
    "biseparable_verdict",
    "bisep_surface",
    "block_params",
    "build_cluster_graph",
    "classify",
    "classify_quad",
    "closest_state",
    "cluster_basis",
    "dephasing_state",
    "genuine_ree",
    "raw_criteria",
    "reduced_criteria",
    "region_grid",
    "relative_entropy",
    "sample_random",
    "solve_min_relent",
    "stabilizer_generators",
    "thresholds",
    "twirl_to_fvector",
    "validate",
    "verify",
]
