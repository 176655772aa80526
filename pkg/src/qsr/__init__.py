"""Q-SR traffic engineering: FPTAS, online admission and an exact oracle for segment routing."""

__version__ = "0.1.0"

from .errors import QsrError  # noqa: E402
from .fptas import FptasParams, params_from_omega, run_fptas  # noqa: E402
from .intra_segment import apply_adjacency_override, build_intra_table, compute_ecmp_split  # noqa: E402
from .online import OnlineParams, competitive_audit, process_request, run_trace  # noqa: E402
from .sr_path import AuxGraph, build_aux_graph, mincost_sr_path, min_cost_sr_path  # noqa: E402
from .topology import Link, Network, Request, load_network, load_requests  # noqa: E402

__all__ = [
    "QsrError", "FptasParams", "params_from_omega", "run_fptas",
    "apply_adjacency_override", "build_intra_table", "compute_ecmp_split",
    "OnlineParams", "competitive_audit", "process_request", "run_trace",
    "AuxGraph", "build_aux_graph", "mincost_sr_path", "min_cost_sr_path",
    "Link", "Network", "Request", "load_network", "load_requests",
]
