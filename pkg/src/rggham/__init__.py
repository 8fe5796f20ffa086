"""Random geometric graphs: hitting radii, exact small-instance oracles,
and a constructive Hamilton-cycle builder with a pancyclic extension."""

from . import _kernels as kernels
from .builder import (BuilderConstants, BuildResult, SpanningTreePlan, ball_sector_partition,
                      bounded_degree_spanning_tree, build_hamilton_cycle, cleanup_path,
                      double_traversal_walk, verify_cycle)
from .dissection import (AuditConstants, Dissection, StructureGraphs, audit_properties,
                         build_dissection, chernoff_upper_bound, classify_and_extract,
                         entropy_H)
from .errors import (CapacityError, EmptyInputError, InfeasibleError,
                     UnsatisfiablePropertyError)
from .experiments import (TrialConfig, TrialRecord, evaluate_point_set, ks_distance,
                          limit_probability, run_trials)
from .geometry import (GridIndex, NormSpec, grid_build, grid_neighbors, lp_distance,
                       mix_seed, sample_uniform_points)
from .graph import (EdgeProcess, GeometricGraph, build_edge_process, connected_components,
                    geometric_graph, graph_at_radius, graph_at_rank, kth_nearest_distance,
                    min_degree)
from .hitting import (HittingReport, compute_hitting_report, rho_hamiltonian_exact,
                      rho_k_connected, rho_min_degree, rho_property, x_statistic)
from .oracles import (PathPair, cycle_length_spectrum, find_cycle_of_length,
                      has_cycle_of_length, is_hamiltonian_exact, two_disjoint_paths,
                      vertex_connectivity_at_least)
from .pancyclic import PancyclicFamily, build_pancyclic_family

__version__ = "0.1.0"
