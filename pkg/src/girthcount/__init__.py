"""Approximate and exact counting of independent sets and proper colorings
on graphs of large girth, with certified intervals from tree recursions."""

from .graph import INFINITE, Graph, GraphMetrics, compute_metrics, extract_ball, parse_graph, format_graph, rewire
from .oracle import OracleResult, independence_polynomial, count_proper_colorings
from .cavity import CountEstimate, count_independent_sets, count_colorings

__version__ = "0.1.0"
