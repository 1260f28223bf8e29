"""Simulation laboratory for uniform spanning trees on 2-D lattices,
Poissonian cutting dynamics, structure-graph gluing chains, and
scaling-exponent estimation."""

from .dynamics import (
    CutSchedule,
    cut_out_length,
    cut_rate,
    first_cut_on_branch,
    forest_at,
    interface_cycle,
    interface_length,
    sample_cut_schedule,
)
from .errors import (
    ComponentError,
    ConfigError,
    DegenerateFitError,
    DisconnectedGraphError,
    DomainTooSmallError,
    EdgeNotFoundError,
    GeometryError,
    InsufficientInputError,
    PreconditionError,
    SolverError,
    TooLargeError,
    UnreachableTargetError,
    UstLabError,
)
from .estimators import (
    EstimateReport,
    detect_four_arm,
    edge_marginal_monotonicity_check,
    estimate_es,
    estimate_k_statistic,
    fit_loglog_slope,
    four_arm_rate,
    lerw_length_scaling,
    monotonicity_corpus,
    time_reversal_tv_test,
    weight_scaling_signature,
)
from .graph import (
    Edge,
    WeightedGraph,
    contract_edge,
    edge_ust_probability,
    edge_ust_probability_exact,
    effective_resistance,
    effective_resistance_exact,
    enumerate_spanning_trees,
    spanning_tree_count,
)
from .lattice import (
    OUTER,
    WIRED,
    LatticeDomain,
    annulus_rings,
    build_box_domain,
    build_disc_domain,
    build_rect_domain,
)
from .render import render_forest, render_structure, render_svg
from .rng import kernel_seed, spawn_kernel_seeds, stream
from .sampling import (
    LENGTH_EXPONENT,
    LerwPath,
    SpanningForest,
    boundary_ust,
    dual_tree,
    loop_erased_walk,
    tree_branch,
    wilson_ust,
)
from .structure import (
    GlueEvent,
    GluingTrajectory,
    Site,
    StructureGraph,
    collapse,
    extract_structure_graph,
    glue_homogeneous,
    glue_resistance_rates,
    glue_uniform,
    truncate,
)

__version__ = "0.1.0"
