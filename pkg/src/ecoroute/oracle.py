"""Brute-force reference solvers: exhaustive simple-path enumeration.

Only tests and the CLI `verify` command call these; they share no search
code with the production solvers.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass

from .energy import DEFAULT_PARAMS, EnergyParams
from .errors import CapacityError, NoRouteError
from .netmodel import Network
from .routing import Query, RouteSolution, _cdf_step, _solution, cdf_policy_y, link_costs

DEFAULT_NODE_CAP = 14


@dataclass
class PathEnumeration:
    paths: list[list[int]]  # each a link-index sequence
    exhausted: bool


def enumerate_paths(net: Network, origin: int, destination: int,
                    node_cap: int = DEFAULT_NODE_CAP) -> PathEnumeration:
    """Every simple origin->destination path, in deterministic DFS order."""
    if net.n > node_cap:
        raise CapacityError(f"network has {net.n} nodes (> cap {node_cap})")
    if origin == destination:
        return PathEnumeration([[]], True)
    paths: list[list[int]] = []
    path: list[int] = []
    visited = {origin}

    def dfs(u):
        for li in net.out_links[u]:
            v = net.links[li].to
            if v == destination:
                paths.append(path + [li])
                continue
            if v in visited:
                continue
            visited.add(v)
            path.append(li)
            dfs(v)
            path.pop()
            visited.remove(v)

    dfs(origin)
    return PathEnumeration(paths, True)


def oracle_cdf(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS,
               node_cap: int = DEFAULT_NODE_CAP) -> RouteSolution:
    """Minimum CDF cost by pricing every simple path link-by-link."""
    started = _time.perf_counter()
    enum = enumerate_paths(net, q.origin, q.destination, node_cap)
    lc = link_costs(net, q.slot, p)
    best = None
    best_cost = float("inf")
    for path in enum.paths:
        res = q.budget
        cost = 0.0
        for li in path:
            w, res = _cdf_step(lc, li, res, p)
            cost += w
        if cost < best_cost:
            best_cost = cost
            best = path
    if best is None:
        raise NoRouteError(q.origin, q.destination)
    y = cdf_policy_y(lc, best, q.budget)
    return _solution(net, q, best, y, "oracle-cdf", p, started)


def oracle_crptc(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS,
                 node_cap: int = DEFAULT_NODE_CAP) -> RouteSolution:
    """Minimum combined cost: optimal switching split on every simple path."""
    from .crptc import knapsack_split

    started = _time.perf_counter()
    enum = enumerate_paths(net, q.origin, q.destination, node_cap)
    lc = link_costs(net, q.slot, p)
    best = None
    best_y: list[float] = []
    best_cost = float("inf")
    for path in enum.paths:
        gas = sum(lc.cs[li] for li in path)
        split = knapsack_split(net, path, q.budget, p, q.slot)
        cost = gas - split.total_savings
        if cost < best_cost:
            best_cost = cost
            best = path
            best_y = split.y
    if best is None:
        raise NoRouteError(q.origin, q.destination)
    return _solution(net, q, best, best_y, "oracle-crptc", p, started)
