"""Node hierarchy and centrality measures on undirected graphs, and tools to compare them."""
from .graph import Graph, GraphError, ParseError, ParseOptions, graph_stats, load_edge_list, largest_connected_component
from .hierarchy import HIERARCHY_KINDS, HierarchyScores, all_hierarchies
from .centrality import CENTRALITY_KINDS, CentralityScores, NumericalError, ParameterError, all_centralities
from .evaluation import EVAL_MEASURES, EvalParams, evaluate, kendall_tau_b, pearson, rbo, spearman, jaccard_topk
from .analysis import (
    CombinationMatrix,
    MeasureParams,
    binarize_and_rank,
    combination_matrix,
    compute_measures,
    kmeans,
    network_correlation_matrix,
    schulze,
    schulze_rank,
)

__version__ = "0.1.0"
