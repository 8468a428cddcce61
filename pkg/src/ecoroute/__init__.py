"""PHEV eco-routing: minimum-energy-cost routes and power-train switching."""

from .energy import (DEFAULT_PARAMS, CostBreakdown, EnergyParams, cd_cost, cdf_link_cost,
                     cs_cost, evaluate_route, savings_rate)
from .errors import (CapacityError, EcoRouteError, NoRouteError, ParameterError,
                     ParseError)
from .netmodel import (Link, Network, TrafficCategory, categorize_link,
                       generate_synthetic, load_network, load_network_csv,
                       save_network)
from .routing import (Query, RouteSolution, cdf_dijkstra, cdf_exact, fastest_route,
                      hybrid_lp_route, normalizers, weighted_route)
from .crptc import (KnapsackSplit, bilevel_route, crptc_exact, export_milp,
                    knapsack_split)
from .oracle import PathEnumeration, enumerate_paths, oracle_cdf, oracle_crptc

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "CostBreakdown", "DEFAULT_PARAMS", "EcoRouteError",
    "EnergyParams", "KnapsackSplit", "Link", "Network", "NoRouteError",
    "ParameterError", "ParseError", "PathEnumeration", "Query", "RouteSolution",
    "TrafficCategory", "bilevel_route", "categorize_link", "cd_cost",
    "cdf_dijkstra", "cdf_exact", "cdf_link_cost", "crptc_exact", "cs_cost",
    "enumerate_paths", "evaluate_route", "export_milp", "fastest_route",
    "generate_synthetic", "hybrid_lp_route", "knapsack_split", "load_network",
    "load_network_csv", "normalizers", "oracle_cdf", "oracle_crptc",
    "save_network", "savings_rate", "weighted_route",
]
