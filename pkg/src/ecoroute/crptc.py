"""Combined routing and power-train control.

The lower-level switching problem for a fixed path is a fractional knapsack
over per-category savings rates and is solved in closed form.  The exact
combined solver runs a label-correcting search whose labels carry the
gasoline-only cost of the partial path plus a per-category vector of
battery-usable kWh, pruned by componentwise dominance and an incumbent
bound.  A text-LP exporter reproduces the equivalent MILP for external
cross-validation.
"""

from __future__ import annotations

import heapq
import time as _time
from dataclasses import dataclass
from typing import Optional, Sequence

from .energy import DEFAULT_PARAMS, EnergyParams
from .errors import CapacityError, NoRouteError
from .netmodel import Network
from .routing import (DOMINANCE_TOL, LinkCosts, Query, RouteSolution, _backward_dijkstra,
                      _dijkstra_path, _solution, link_costs)

_INF = float("inf")


@dataclass
class KnapsackSplit:
    y: list[float]              # per-link CD fraction, path order
    kwh_allocated: list[float]  # per-link kWh, path order
    total_savings: float        # dollars saved vs all-CS


def knapsack_split(net: Network, link_path: Sequence[int], budget: float,
                   p: EnergyParams = DEFAULT_PARAMS, slot: int = 0) -> KnapsackSplit:
    """Optimal CD split of `budget` kWh over a fixed path.

    Greedy in descending savings rate is exact here: continuous fractions,
    one shared resource.  Links whose category saves nothing (rate <= 0)
    stay on gasoline.  Rate ties are broken by path order.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    lc = link_costs(net, slot, p)
    order = sorted(range(len(link_path)),
                   key=lambda i: (-lc.rate_by_cat[lc.cat[link_path[i]]], i))
    y = [0.0] * len(link_path)
    kwh = [0.0] * len(link_path)
    savings = 0.0
    remaining = budget
    for i in order:
        li = link_path[i]
        rate = lc.rate_by_cat[lc.cat[li]]
        if rate <= 0.0 or remaining <= 0.0:
            continue
        take = min(lc.kwh[li], remaining)
        y[i] = take / lc.kwh[li]
        kwh[i] = take
        savings += rate * take
        remaining -= take
    return KnapsackSplit(y, kwh, savings)


def bilevel_route(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS) -> RouteSolution:
    """Upper level: CDF route; lower level: optimal switching on that route."""
    started = _time.perf_counter()
    from .routing import cdf_dijkstra

    base = cdf_dijkstra(net, q, p)
    split = knapsack_split(net, base.link_path, q.budget, p, q.slot)
    return _solution(net, q, base.link_path, split.y, "bilevel", p, started)


def _greedy_savings(caps: tuple[float, ...], budget: float, rates: Sequence[float],
                    rate_order: Sequence[int]) -> float:
    remaining = budget
    total = 0.0
    for c in rate_order:
        if remaining <= 0.0:
            break
        take = caps[c] if caps[c] < remaining else remaining
        total += rates[c] * take
        remaining -= take
    return total


def _crptc_search(net: Network, q: Query, p: EnergyParams,
                  alpha: float = 0.0, beta_time: float = 1.0,
                  beta_energy: float = 1.0) -> list[int]:
    """Exact combined search; returns the optimal link path.

    Label = (base cost if every link ran all-CS, per-category kWh capacity).
    The final objective subtracts the knapsack savings of the accumulated
    capacities from the base cost.  With alpha > 0 the base cost and the
    savings rates are the normalized time/energy blend.
    """
    lc = link_costs(net, q.slot, p)
    budget = q.budget
    scale = (1.0 - alpha) / beta_energy
    base_w = tuple(alpha * t / beta_time + scale * c for t, c in zip(lc.time, lc.cs))
    cd_w = tuple(alpha * t / beta_time + scale * c for t, c in zip(lc.time, lc.cd_ele))
    rates = tuple(r * scale for r in lc.rate_by_cat)
    rate_order = sorted((c for c in range(3) if rates[c] > 0.0), key=lambda c: -rates[c])
    max_rate = max((rates[c] for c in rate_order), default=0.0)
    origin, dest = q.origin, q.destination

    h, _ = _backward_dijkstra(net, base_w, dest)
    if h[origin] == _INF:
        raise NoRouteError(origin, dest)

    def path_objective(path):
        caps = [0.0, 0.0, 0.0]
        base = 0.0
        for li in path:
            base += base_w[li]
            c = lc.cat[li]
            if rates[c] > 0.0:
                caps[c] = min(caps[c] + lc.kwh[li], budget)
        return base - _greedy_savings(tuple(caps), budget, rates, rate_order)

    # Incumbent from two cheap heuristics: the all-CS shortest path and the
    # all-CD-priced shortest path, each re-priced with the optimal split.
    best_path = _dijkstra_path(net, base_w, origin, dest)
    best_obj = path_objective(best_path)
    alt = _dijkstra_path(net, cd_w, origin, dest)
    alt_obj = path_objective(alt)
    if alt_obj < best_obj:
        best_obj, best_path = alt_obj, alt

    tol = DOMINANCE_TOL
    savings_ub = budget * max_rate
    lab_base = [0.0]
    lab_caps: list[tuple[float, float, float]] = [(0.0, 0.0, 0.0)]
    lab_prev = [-1]
    lab_link = [-1]
    lab_mask = [1 << origin]
    frontier: list[list[int]] = [[] for _ in range(net.n)]
    frontier[origin].append(0)
    dead: set[int] = set()
    heap = [(h[origin] - savings_ub, origin, 0)]
    links = net.links
    out = net.out_links
    while heap:
        bound, u, lid = heapq.heappop(heap)
        if lid in dead:
            continue
        if bound > best_obj + 1e-12:
            continue
        if u == dest:
            obj = lab_base[lid] - _greedy_savings(lab_caps[lid], budget, rates, rate_order)
            if obj < best_obj - 1e-15:
                best_obj = obj
                path = []
                k = lid
                while lab_link[k] != -1:
                    path.append(lab_link[k])
                    k = lab_prev[k]
                path.reverse()
                best_path = path
            continue
        base = lab_base[lid]
        caps = lab_caps[lid]
        mask = lab_mask[lid]
        for li in out[u]:
            v = links[li].to
            if (mask >> v) & 1:
                continue
            if h[v] == _INF:
                continue
            nb = base + base_w[li]
            c = lc.cat[li]
            if rates[c] > 0.0:
                nc = caps[:c] + (min(caps[c] + lc.kwh[li], budget),) + caps[c + 1:]
            else:
                nc = caps
            if nb + h[v] - savings_ub > best_obj + 1e-12:
                continue
            front = frontier[v]
            dominated = False
            for e in front:
                ec, ecap = lab_base[e], lab_caps[e]
                if (ec <= nb + tol and ecap[0] >= nc[0] - tol
                        and ecap[1] >= nc[1] - tol and ecap[2] >= nc[2] - tol):
                    dominated = True
                    break
            if dominated:
                continue
            keep = []
            for e in front:
                ec, ecap = lab_base[e], lab_caps[e]
                if (nb <= ec + tol and nc[0] >= ecap[0] - tol
                        and nc[1] >= ecap[1] - tol and nc[2] >= ecap[2] - tol):
                    dead.add(e)
                else:
                    keep.append(e)
            nid = len(lab_base)
            lab_base.append(nb)
            lab_caps.append(nc)
            lab_prev.append(lid)
            lab_link.append(li)
            lab_mask.append(mask | (1 << v))
            keep.append(nid)
            frontier[v] = keep
            heapq.heappush(heap, (nb + h[v] - savings_ub, v, nid))
    return best_path


def crptc_exact(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS) -> RouteSolution:
    """Exact minimum over paths and switching strategies jointly."""
    started = _time.perf_counter()
    if q.origin == q.destination:
        return _solution(net, q, [], [], "crptc", p, started)
    path = _crptc_search(net, q, p)
    split = knapsack_split(net, path, q.budget, p, q.slot)
    return _solution(net, q, path, split.y, "crptc", p, started)


# ---------------------------------------------------------------------------
# MILP export (CPLEX-style LP text format)

MAX_EXPORT_LINKS = 20000


def milp_model_string(net: Network, q: Query, p: EnergyParams = DEFAULT_PARAMS) -> str:
    """The combined problem as a MILP over (x, y, z) link-variable triples.

    Objective: sum cs_l x_l + (cd_l - cs_l) z_l; flow conservation with
    origin/destination unit imbalance; the battery budget on z; and the four
    inequalities linearizing z = x * y.
    """
    if net.m > MAX_EXPORT_LINKS:
        raise CapacityError(f"{net.m} links exceeds export cap {MAX_EXPORT_LINKS}")
    lc = link_costs(net, q.slot, p)

    def num(v: float) -> str:
        return f"{v:.12g}"

    lines = ["\\ CRPTC MILP", "Minimize", " obj:"]
    terms = []
    for li in range(net.m):
        terms.append((lc.cs[li], f"x_{li}"))
        terms.append((lc.cd_ele[li] - lc.cs[li], f"z_{li}"))
    parts = []
    for coef, name in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f" {sign} {num(abs(coef))} {name}")
    lines[-1] += "".join(parts)
    lines.append("Subject To")
    for j in range(net.n):
        lhs = "".join(f" + x_{li}" for li in net.in_links[j])
        lhs += "".join(f" - x_{li}" for li in net.out_links[j])
        rhs = (1 if j == q.destination else 0) - (1 if j == q.origin else 0)
        lines.append(f" flow_{j}:{lhs} = {rhs}")
    energy = "".join(f" + {num(lc.kwh[li])} z_{li}" for li in range(net.m))
    lines.append(f" energy:{energy} <= {num(q.budget)}")
    for li in range(net.m):
        lines.append(f" zy_{li}: + z_{li} - y_{li} <= 0")
        lines.append(f" zx_{li}: + z_{li} - x_{li} <= 0")
        lines.append(f" zyx_{li}: + z_{li} - y_{li} - x_{li} >= -1")
    lines.append("Bounds")
    for li in range(net.m):
        lines.append(f" 0 <= y_{li} <= 1")
    lines.append("Binary")
    lines.append(" " + " ".join(f"x_{li}" for li in range(net.m)))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_milp(net: Network, q: Query, path: str,
                p: EnergyParams = DEFAULT_PARAMS) -> None:
    text = milp_model_string(net, q, p)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
