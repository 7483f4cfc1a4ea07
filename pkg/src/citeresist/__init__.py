"""Effective-resistance distances between papers in citation networks."""

__version__ = "0.1.0"

from .errors import (
    CiteResistError,
    ContractError,
    DisconnectedError,
    DomainError,
    InputError,
    NodeLookupError,
    NumericError,
    ParseError,
    SizeCapError,
)
from .graph import (
    CitationGraph,
    NodeKind,
    PruneReport,
    Weighting,
    build_graph,
    connected_component_of,
    load_graph,
    parse_edge_list,
    prune_singleton_sources,
    read_edge_list,
    weigh,
)
from .matrix import DistanceMatrix
from .resistance import (
    ResistanceResult,
    SolverConfig,
    Sweep,
    VoltageState,
    all_pairs_resistance,
    current_bounds,
    iterate_voltages,
    resistance_between,
)
from .exact import exact_all_pairs, exact_resistance, laplacian
from .sampling import (
    SampleEstimate,
    SamplerConfig,
    estimate_distribution,
    shuffle_pairs,
    update_estimate,
)
from .coupling import (
    CouplingResult,
    cosine_coupling,
    coupling_unweighted,
    coupling_weighted,
    first_iteration_current,
)
from .analysis import (
    Dendrogram,
    Linkage,
    RankingResult,
    TopicSet,
    agglomerate,
    log_histogram,
    median_distance,
    precision_recall,
    rank_by_topic,
)
