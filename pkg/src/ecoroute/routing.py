"""Single-energy-dimension path solvers.

Four solver families live here: the fastest-route baseline, the
charge-depleting-first (CDF) modified Dijkstra that threads battery state
through the search, an exact CDF solver via Pareto label-setting, a
path-enumeration + CS-shortest-path decomposition (hybrid LP relaxation),
and the time/energy weighted variants.
"""

from __future__ import annotations

import heapq
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .energy import (DEFAULT_PARAMS, CostBreakdown, EnergyParams, ZERO_BREAKDOWN,
                     evaluate_route, savings_rate)
from .errors import CapacityError, NoRouteError
from .netmodel import Network

DOMINANCE_TOL = 1e-9

_INF = float("inf")


@dataclass(frozen=True)
class Query:
    origin: int
    destination: int
    budget: float = 0.0          # kWh usable for charge depleting
    alpha: float = 0.0           # time weight for the weighted objective
    beta_time: Optional[float] = None    # time normalizer (hours)
    beta_energy: Optional[float] = None  # energy-cost normalizer (dollars)
    slot: int = 0

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if self.beta_time is not None and self.beta_time <= 0:
            raise ValueError("beta_time must be positive")
        if self.beta_energy is not None and self.beta_energy <= 0:
            raise ValueError("beta_energy must be positive")


@dataclass
class RouteSolution:
    node_path: list[int]
    link_path: list[int]
    y: list[float]
    breakdown: CostBreakdown
    travel_time: float
    algorithm: str
    wall_time: float = 0.0

    @property
    def cost(self) -> float:
        return self.breakdown.total_dollars


@dataclass(frozen=True)
class LinkCosts:
    """Per-link cost arrays for one (slot, params) pair."""

    time: tuple[float, ...]      # hours
    cs: tuple[float, ...]        # $ if driven all-CS
    cd_ele: tuple[float, ...]    # $ if driven all-CD
    kwh: tuple[float, ...]       # kWh if driven all-CD
    length: tuple[float, ...]
    cat: tuple[int, ...]
    rate_by_cat: tuple[float, float, float]  # $/kWh savings per category


def link_costs(net: Network, slot: int, p: EnergyParams) -> LinkCosts:
    key = (slot, p)
    lc = net._cost_cache.get(key)
    if lc is not None:
        return lc
    cats = net.categories(slot)
    time_a, cs_a, cd_a, kwh_a, len_a, cat_a = [], [], [], [], [], []
    for lk, cat in zip(net.links, cats):
        time_a.append(lk.length / lk.avg_speeds[slot])
        cs_a.append(p.c_gas * lk.length / p.mu_cs[cat])
        e = lk.length / p.mu_cd[cat]
        kwh_a.append(e)
        cd_a.append(p.c_ele * e)
        len_a.append(lk.length)
        cat_a.append(int(cat))
    rates = tuple(savings_rate(c, p) for c in range(3))
    lc = LinkCosts(tuple(time_a), tuple(cs_a), tuple(cd_a), tuple(kwh_a),
                   tuple(len_a), tuple(cat_a), rates)
    net._cost_cache[key] = lc
    return lc


def normalizers(net: Network, slot: int, p: EnergyParams = DEFAULT_PARAMS) -> tuple[float, float]:
    """Global (beta_time, beta_energy): max link travel time and max link
    energy cost over the network at the given slot."""
    lc = link_costs(net, slot, p)
    t_max = max(lc.time)
    c_max = max(max(a, b) for a, b in zip(lc.cs, lc.cd_ele))
    return t_max, c_max


def cdf_policy_y(lc: LinkCosts, link_path: Sequence[int], budget: float) -> list[float]:
    """Per-link CD fractions when the battery is drained front-to-back."""
    y = []
    res = budget
    for li in link_path:
        need = lc.kwh[li]
        if res >= need:
            y.append(1.0)
            res -= need
        elif res <= 0.0:
            y.append(0.0)
        else:
            y.append(res / need)
            res = 0.0
    return y


def _cdf_step(lc: LinkCosts, li: int, res: float, p: EnergyParams) -> tuple[float, float]:
    """CDF cost and outgoing residual for one link, from precomputed arrays."""
    need = lc.kwh[li]
    if res >= need:
        return lc.cd_ele[li], res - need
    if res <= 0.0:
        return lc.cs[li], 0.0
    cat = lc.cat[li]
    cost = p.c_ele * res + p.c_gas * (lc.length[li] - p.mu_cd[cat] * res) / p.mu_cs[cat]
    return cost, 0.0


def _solution(net: Network, q: Query, link_path: Sequence[int], y: Sequence[float],
              algo: str, p: EnergyParams, started: float) -> RouteSolution:
    lc = link_costs(net, q.slot, p)
    node_path = [q.origin] + [net.links[li].to for li in link_path]
    breakdown = evaluate_route(net, link_path, y, p, q.slot) if link_path else ZERO_BREAKDOWN
    assert breakdown.kwh_used <= q.budget + 1e-9
    travel = sum(lc.time[li] for li in link_path)
    return RouteSolution(node_path, list(link_path), list(y), breakdown, travel,
                         algo, _time.perf_counter() - started)


# ---------------------------------------------------------------------------
# Plain Dijkstra over a fixed weight array (tie-break: lower node id)

def _dijkstra(net: Network, weights: Sequence[float], origin: int,
              dest: Optional[int] = None) -> tuple[list[float], list[int]]:
    dist = [_INF] * net.n
    prev_link = [-1] * net.n
    dist[origin] = 0.0
    heap = [(0.0, origin)]
    links = net.links
    out = net.out_links
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == dest:
            break
        for li in out[u]:
            v = links[li].to
            nd = d + weights[li]
            if nd < dist[v]:
                dist[v] = nd
                prev_link[v] = li
                heapq.heappush(heap, (nd, v))
    return dist, prev_link


def _dijkstra_path(net: Network, weights: Sequence[float], origin: int,
                   dest: int, banned: Optional[set[int]] = None) -> Optional[list[int]]:
    """Shortest path as a link list, optionally avoiding a node set."""
    if banned:
        dist = [_INF] * net.n
        prev_link = [-1] * net.n
        dist[origin] = 0.0
        heap = [(0.0, origin)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            if u == dest:
                break
            for li in net.out_links[u]:
                v = net.links[li].to
                if v in banned:
                    continue
                nd = d + weights[li]
                if nd < dist[v]:
                    dist[v] = nd
                    prev_link[v] = li
                    heapq.heappush(heap, (nd, v))
    else:
        dist, prev_link = _dijkstra(net, weights, origin, dest)
    if dist[dest] == _INF:
        return None
    path = []
    u = dest
    while u != origin:
        li = prev_link[u]
        path.append(li)
        u = net.links[li].frm
    path.reverse()
    return path


def _backward_dijkstra(net: Network, weights: Sequence[float],
                       dest: int) -> tuple[list[float], list[int]]:
    """Distance from every node to `dest`, plus the first link to take."""
    dist = [_INF] * net.n
    next_link = [-1] * net.n
    dist[dest] = 0.0
    heap = [(0.0, dest)]
    links = net.links
    inl = net.in_links
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for li in inl[u]:
            v = links[li].frm
            nd = d + weights[li]
            if nd < dist[v]:
                dist[v] = nd
                next_link[v] = li
                heapq.heappush(heap, (nd, v))
    return dist, next_link


def _suffix_from_tree(net: Network, next_link: Sequence[int], start: int,
                      dest: int) -> list[int]:
    path = []
    u = start
    while u != dest:
        li = next_link[u]
        path.append(li)
        u = net.links[li].to
    return path


# ---------------------------------------------------------------------------
# Solvers

def fastest_route(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS) -> RouteSolution:
    """Minimum travel-time path; the battery is then drained CDF-style along
    the fixed path to price it."""
    started = _time.perf_counter()
    if q.origin == q.destination:
        return _solution(net, q, [], [], "fastest", p, started)
    lc = link_costs(net, q.slot, p)
    path = _dijkstra_path(net, lc.time, q.origin, q.destination)
    if path is None:
        raise NoRouteError(q.origin, q.destination)
    y = cdf_policy_y(lc, path, q.budget)
    return _solution(net, q, path, y, "fastest", p, started)


def cdf_dijkstra(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS) -> RouteSolution:
    """Modified Dijkstra keeping one (cost, residual energy) label per node.

    Link costs are evaluated with the battery state carried on the settled
    label, draining the battery before any gasoline use.
    """
    started = _time.perf_counter()
    if q.origin == q.destination:
        return _solution(net, q, [], [], "cdf", p, started)
    lc = link_costs(net, q.slot, p)
    n = net.n
    cost = [_INF] * n
    energy = [0.0] * n
    prev_link = [-1] * n
    cost[q.origin] = 0.0
    energy[q.origin] = q.budget
    heap = [(0.0, q.origin)]
    links = net.links
    out = net.out_links
    kwh = lc.kwh
    cd_ele = lc.cd_ele
    cs = lc.cs
    length = lc.length
    cat = lc.cat
    mu_cd = p.mu_cd
    mu_cs = p.mu_cs
    c_ele = p.c_ele
    c_gas = p.c_gas
    dest = q.destination
    while heap:
        d, u = heapq.heappop(heap)
        if d > cost[u]:
            continue
        if u == dest:
            break
        eu = energy[u]
        for li in out[u]:
            need = kwh[li]
            if eu >= need:
                w = cd_ele[li]
                et = eu - need
            elif eu <= 0.0:
                w = cs[li]
                et = 0.0
            else:
                c = cat[li]
                w = c_ele * eu + c_gas * (length[li] - mu_cd[c] * eu) / mu_cs[c]
                et = 0.0
            v = links[li].to
            alt = d + w
            if alt < cost[v]:
                cost[v] = alt
                energy[v] = et
                prev_link[v] = li
                heapq.heappush(heap, (alt, v))
    if cost[dest] == _INF:
        raise NoRouteError(q.origin, q.destination)
    path = []
    u = dest
    while u != q.origin:
        li = prev_link[u]
        path.append(li)
        u = links[li].frm
    path.reverse()
    y = cdf_policy_y(lc, path, q.budget)
    return _solution(net, q, path, y, "cdf", p, started)


def _pareto_cdf_search(net: Network, origin: int, dest: int, budget: float,
                       weight_fn: Callable[[int, float], tuple[float, float]]) -> list[int]:
    """Label-setting over (cost, residual) with Pareto dominance pruning.

    Labels never extend into a node already on their own path.  The first
    label popped at the destination is optimal because link weights are
    strictly positive.
    """
    lab_cost = [0.0]
    lab_res = [budget]
    lab_node = [origin]
    lab_prev = [-1]
    lab_link = [-1]
    lab_mask = [1 << origin]
    frontier: list[list[int]] = [[] for _ in range(net.n)]
    frontier[origin].append(0)
    dead: set[int] = set()
    heap = [(0.0, origin, 0)]
    links = net.links
    out = net.out_links
    tol = DOMINANCE_TOL
    while heap:
        c, u, lid = heapq.heappop(heap)
        if lid in dead or c > lab_cost[lid]:
            continue
        if u == dest:
            path = []
            while lid != 0 and lab_link[lid] != -1:
                path.append(lab_link[lid])
                lid = lab_prev[lid]
            path.reverse()
            return path
        res = lab_res[lid]
        mask = lab_mask[lid]
        for li in out[u]:
            v = links[li].to
            if (mask >> v) & 1:
                continue
            w, r2 = weight_fn(li, res)
            nc = c + w
            front = frontier[v]
            dominated = False
            for e in front:
                if lab_cost[e] <= nc + tol and lab_res[e] >= r2 - tol:
                    dominated = True
                    break
            if dominated:
                continue
            keep = []
            for e in front:
                if nc <= lab_cost[e] + tol and r2 >= lab_res[e] - tol:
                    dead.add(e)
                else:
                    keep.append(e)
            nid = len(lab_cost)
            lab_cost.append(nc)
            lab_res.append(r2)
            lab_node.append(v)
            lab_prev.append(lid)
            lab_link.append(li)
            lab_mask.append(mask | (1 << v))
            keep.append(nid)
            frontier[v] = keep
            heapq.heappush(heap, (nc, v, nid))
    raise NoRouteError(origin, dest)


def cdf_exact(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS) -> RouteSolution:
    """True minimum of the CDF problem via Pareto label-setting.

    Keeps every non-dominated (cost, residual) pair per node instead of the
    single label the modified Dijkstra retains; its cost can therefore never
    exceed cdf_dijkstra's.
    """
    started = _time.perf_counter()
    if q.origin == q.destination:
        return _solution(net, q, [], [], "cdf-exact", p, started)
    lc = link_costs(net, q.slot, p)

    def weight(li, res):
        return _cdf_step(lc, li, res, p)

    path = _pareto_cdf_search(net, q.origin, q.destination, q.budget, weight)
    y = cdf_policy_y(lc, path, q.budget)
    return _solution(net, q, path, y, "cdf-exact", p, started)


def hybrid_lp_route(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS,
                    node_cap: int = 500) -> RouteSolution:
    """CDF optimum via battery-depletion decomposition.

    Enumerates simple path prefixes from the origin until the battery
    depletes (pruned against a reference-path cost bound), completes each
    depletion node with a gasoline-only shortest path to the destination,
    and keeps never-depleted full paths as their own candidates.
    """
    started = _time.perf_counter()
    if net.n > node_cap:
        raise CapacityError(
            f"network has {net.n} nodes (> cap {node_cap}); use cdf_exact instead")
    if q.origin == q.destination:
        return _solution(net, q, [], [], "hybrid-lp", p, started)
    lc = link_costs(net, q.slot, p)
    dest = q.destination

    # Reference route: shortest-distance path, priced under the CDF policy.
    ref = _dijkstra_path(net, lc.length, q.origin, dest)
    if ref is None:
        raise NoRouteError(q.origin, dest)
    res = q.budget
    rho = 0.0
    for li in ref:
        w, res = _cdf_step(lc, li, res, p)
        rho += w
    best_cost = rho
    best_path = ref

    cs_to_d, next_link = _backward_dijkstra(net, lc.cs, dest)

    # DFS over simple prefixes; a prefix ends at the destination (candidate
    # as-is) or at its first battery-depleted node (candidate after a
    # CS-only completion that must avoid the prefix's nodes).
    stack = [(q.origin, q.budget, 0.0, (), frozenset((q.origin,)))]
    while stack:
        node, res, cost, path, visited = stack.pop()
        if cost > best_cost + 1e-12:
            continue
        if node == dest:
            if cost < best_cost - 1e-15:
                best_cost = cost
                best_path = list(path)
            continue
        if res <= 1e-12:
            if cs_to_d[node] == _INF:
                continue
            suffix = _suffix_from_tree(net, next_link, node, dest)
            suffix_nodes = {net.links[li].to for li in suffix}
            if suffix_nodes & (visited - {node}):
                banned = set(visited) - {node}
                suffix = _dijkstra_path(net, lc.cs, node, dest, banned)
                if suffix is None:
                    continue
            total = cost + sum(lc.cs[li] for li in suffix)
            if total < best_cost - 1e-15:
                best_cost = total
                best_path = list(path) + suffix
            continue
        for li in net.out_links[node]:
            v = net.links[li].to
            if v in visited:
                continue
            w, r2 = _cdf_step(lc, li, res, p)
            stack.append((v, r2, cost + w, path + (li,), visited | {v}))

    y = cdf_policy_y(lc, best_path, q.budget)
    return _solution(net, q, best_path, y, "hybrid-lp", p, started)


def weighted_route(net: Network, q: Query, algo: str = "cdf",
                   p: EnergyParams = DEFAULT_PARAMS) -> RouteSolution:
    """Minimize alpha * t / beta_time + (1 - alpha) * cost / beta_energy.

    `algo` selects the underlying machinery: exact CDF labels ("cdf") or
    the combined routing / power-train labels ("crptc").
    """
    started = _time.perf_counter()
    t_max, c_max = normalizers(net, q.slot, p)
    b1 = q.beta_time if q.beta_time is not None else t_max
    b2 = q.beta_energy if q.beta_energy is not None else c_max
    if b1 < t_max - 1e-12 or b2 < c_max - 1e-12:
        raise ValueError("normalizers must dominate the network's max link time/cost")
    if q.origin == q.destination:
        return _solution(net, q, [], [], f"weighted-{algo}", p, started)
    alpha = q.alpha
    lc = link_costs(net, q.slot, p)
    if algo == "cdf":
        def weight(li, res):
            c, r2 = _cdf_step(lc, li, res, p)
            return alpha * lc.time[li] / b1 + (1.0 - alpha) * c / b2, r2

        path = _pareto_cdf_search(net, q.origin, q.destination, q.budget, weight)
        y = cdf_policy_y(lc, path, q.budget)
    elif algo == "crptc":
        from .crptc import _crptc_search, knapsack_split

        path = _crptc_search(net, q, p, alpha=alpha, beta_time=b1, beta_energy=b2)
        y = knapsack_split(net, path, q.budget, p, q.slot).y if path else []
    else:
        raise ValueError(f"unknown weighted algo {algo!r}")
    return _solution(net, q, path, y, f"weighted-{algo}", p, started)
