"""Certified lower bounds for k-equipartition and graph bisection.

The bound is the doubly nonnegative relaxation of the partition problem,
facially reduced, strengthened with polyhedral cutting planes, solved by
ADMM with a cyclic Dykstra projection, and certified by a safe dual
post-processing step that stays valid at any accuracy.
"""

from .admm import (AdmmConfig, AdmmState, InnerInfo, init_state, run_inner,
                   step_R, step_X, step_Z, update_sigma)
from .bounds import (BoundCertificate, enumerate_optimum,
                     heuristic_upper_bound, safe_lower_bound,
                     solve_lp_over_XT)
from .cuts import (Cut, CutClustering, bqp_cut, cluster_cuts, indep_set_cut,
                   project_bqp, project_indepset, project_triangle,
                   separate_bqp, separate_indepset_exact,
                   separate_indepset_greedy, separate_indepset_prob,
                   separate_triangles, triangle_cut)
from .driver import BoundReport, OuterRecord, SolveConfig, solve
from .dykstra import DykstraEngine, dykstra_project
from .graph import (GraphInstance, PartitionSpec, gen_gnp_degree,
                    gen_spinglass, gen_unit_disk, laplacian,
                    partition_cut_weight, read_edge_list, write_edge_list)
from .linalg import eig_sym, lambda_max, orthonormal_basis, project_psd
from .relaxation import (BaseSetDescriptor, Relaxation, build_relaxation,
                         project_base_bp, project_base_ep,
                         project_capped_simplex)

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig", "AdmmState", "InnerInfo", "init_state", "run_inner",
    "step_R", "step_X", "step_Z", "update_sigma",
    "BoundCertificate", "enumerate_optimum", "heuristic_upper_bound",
    "safe_lower_bound", "solve_lp_over_XT",
    "Cut", "CutClustering", "bqp_cut", "cluster_cuts", "indep_set_cut",
    "project_bqp", "project_indepset", "project_triangle", "separate_bqp",
    "separate_indepset_exact", "separate_indepset_greedy",
    "separate_indepset_prob", "separate_triangles", "triangle_cut",
    "BoundReport", "OuterRecord", "SolveConfig", "solve",
    "DykstraEngine", "dykstra_project",
    "GraphInstance", "PartitionSpec", "gen_gnp_degree", "gen_spinglass",
    "gen_unit_disk", "laplacian", "partition_cut_weight", "read_edge_list",
    "write_edge_list",
    "eig_sym", "lambda_max", "orthonormal_basis", "project_psd",
    "BaseSetDescriptor", "Relaxation", "build_relaxation",
    "project_base_bp", "project_base_ep", "project_capped_simplex",
    "__version__",
]
