"""Cluster measures with inhomogeneous fields on finite graphs.

Exact enumeration oracles for spin, edge, and coupled measures, a field-aware
cluster Monte Carlo sampler, lattice/ratio/domination inequality checkers, and
a boundary-influence scan driver for power-law decaying fields.
"""

__version__ = "0.1.0"

from .errors import (
    CapExceededError,
    ClusterFieldError,
    ConfigError,
    DomainMismatchError,
)
from .graph import (
    ClusterDecomposition,
    EdgeConfig,
    FiniteGraph,
    Region,
    Vertex,
    connected_components,
    edge,
    free_region,
    load_graph,
    make_lattice_box,
    subregion,
)
from .fields import (
    CouplingConstants,
    EdgeWeights,
    FieldSpec,
    field_leq,
    field_summary,
    ising_field,
    load_field,
    make_power_law_field,
    zero_field,
)
from .model import ModelSpec
from .spins import (
    ExactDistribution,
    SpinBoundary,
    SpinConfig,
    exact_spin_measure,
    magnetization,
    spin_correlation,
    two_point_tau,
)
from .randomcluster import (
    GRCBoundary,
    WeightTable,
    connectivity,
    domain_edges,
    exact_edge_measure,
    percolation,
    rc_weight_q2,
)
from .coupling import (
    JointConfig,
    joint_distribution,
    run_verification_suite,
    verify_partition_identities,
)
from .inequalities import (
    DominationCertificate,
    FKGReport,
    HolleyReport,
    UpSetFamily,
    domination_report,
    fkg_lattice_check,
    holley_check,
    strassen_domination,
)
from .sampler import (
    ChainState,
    EstimatorSeries,
    es_sweep,
    estimate,
    glauber_sweep,
    initial_state,
)
from .scan import (
    ScanConfig,
    ScanRecord,
    gap_trend,
    m_event_probability,
    run_scan,
)
from .corpus import corpus
