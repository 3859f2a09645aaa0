"""Weighted-graph semilinear wave toolkit.

Graph Laplacians, pseudo-metric geometry, space-time cut-off families with
empirical scaling bounds, volume-growth nonexistence criteria, and a
coupled-wave-system simulator with blow-up detection and weak-form checks.
"""

from .graphs import (
    GraphFormatError, ValidationIssue, ValidationReport, WeightedGraph,
    validate_graph, laplacian_apply, weighted_degree,
    generate_lattice, generate_tree, generate_path, lattice_origin,
    load_graph, loads_graph, save_graph, dumps_graph, graphs_equal,
)
from .geometry import (
    TruncationError, PseudoMetric, distance, distances_from, jump_size,
    ball, laplacian_of_distance, interior_mask,
    MetricStructureReport, metric_structure_report, AlphaFit, fit_alpha,
)
from .cutoffs import (
    smoothstep, smoothstep_d1, smoothstep_d2,
    phi, phi_d1, phi_d2, eta, eta_d1, eta_d2, psi, psi_d1, psi_d2,
    SpaceTimeRegion, region_membership, region_time_interval,
    TestFunction, testfun_eval, default_power,
    CutoffBoundReport, compact_cutoff_constants, exp_cutoff_constants,
)
from .potentials import Potential
from .criterion import (
    SystemParams, critical_volume_exponent, single_inequality_exponent,
    region_integral, growth_exponent_estimate, CriterionVerdict,
    annulus_criterion, single_criterion, expweight_criterion,
    VolumeTerms, weighted_volume_terms, exp_weighted_norm,
    InitialDataReport, initial_data_conditions, annulus_covering_check,
    default_r_grid,
)
from .dynamics import (
    SupportError, WaveSystemProblem, Trajectory, cfl_dt, simulate,
    WeakFormReport, weak_residual, energy_diagnostic,
    trajectory_to_csv, save_trajectory_csv, blowup_event_json,
)

__version__ = "0.1.0"
