"""Road-network graph: ingestion, traffic categorization, synthetic generation.

A network is a directed graph whose links carry length (miles), free-flow
speed (mph) and one average speed (mph) per time slot.  The ratio
avg/free_flow (the speed factor) buckets every link into a traffic-intensity
category which selects the drive cycle used by the energy model.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence

from .errors import ParameterError, ParseError

log = logging.getLogger(__name__)


class TrafficCategory(IntEnum):
    """Traffic intensity bucket; the value doubles as a table index."""

    HIGH = 0    # NYC drive cycle
    MEDIUM = 1  # UDDS drive cycle
    LOW = 2     # HWFET drive cycle


def categorize_link(avg_speed: float, free_flow: float) -> TrafficCategory:
    """Bucket a link by its speed factor S = avg_speed / free_flow.

    S <= 0.5 -> HIGH, 0.5 < S < 0.75 -> MEDIUM, S >= 0.75 -> LOW.
    Both boundaries are inclusive toward the congested side (0.5) and the
    free-flowing side (0.75) respectively.
    """
    if avg_speed <= 0 or free_flow <= 0:
        raise ValueError(f"speeds must be positive, got avg={avg_speed}, free={free_flow}")
    if avg_speed > free_flow:
        raise ValueError(f"avg speed {avg_speed} exceeds free-flow {free_flow}")
    s = avg_speed / free_flow
    if s <= 0.5:
        return TrafficCategory.HIGH
    if s < 0.75:
        return TrafficCategory.MEDIUM
    return TrafficCategory.LOW


@dataclass(frozen=True)
class Link:
    frm: int
    to: int
    length: float                 # miles
    free_flow: float              # mph
    avg_speeds: tuple[float, ...]  # mph, one per time slot

    def avg_speed(self, slot: int) -> float:
        return self.avg_speeds[slot]

    def category(self, slot: int) -> TrafficCategory:
        return categorize_link(self.avg_speeds[slot], self.free_flow)

    def travel_time(self, slot: int) -> float:
        """Hours to traverse at the slot's average speed."""
        return self.length / self.avg_speeds[slot]


class Network:
    """Immutable directed road graph with per-node adjacency indices."""

    def __init__(self, n: int, links: Sequence[Link], slot_count: int,
                 coords: Optional[Sequence[tuple[float, float]]] = None):
        if n < 1 or not links:
            raise ParseError("network needs at least one node and one link")
        self.n = n
        self.links: tuple[Link, ...] = tuple(links)
        self.slot_count = slot_count
        self.coords = tuple(coords) if coords is not None else None
        out: list[list[int]] = [[] for _ in range(n)]
        inc: list[list[int]] = [[] for _ in range(n)]
        for idx, lk in enumerate(self.links):
            if not (0 <= lk.frm < n and 0 <= lk.to < n):
                raise ParseError(f"link {idx} endpoint out of range: {lk.frm}->{lk.to}")
            out[lk.frm].append(idx)
            inc[lk.to].append(idx)
        self.out_links = tuple(tuple(v) for v in out)
        self.in_links = tuple(tuple(v) for v in inc)
        self._cat_cache: dict[int, tuple[TrafficCategory, ...]] = {}
        self._cost_cache: dict = {}  # populated by energy.link_costs

    @property
    def m(self) -> int:
        return len(self.links)

    def categories(self, slot: int) -> tuple[TrafficCategory, ...]:
        if not (0 <= slot < self.slot_count):
            raise ParameterError(f"slot {slot} out of range [0, {self.slot_count})")
        cached = self._cat_cache.get(slot)
        if cached is None:
            cached = tuple(lk.category(slot) for lk in self.links)
            self._cat_cache[slot] = cached
        return cached

    def is_strongly_connected(self) -> bool:
        return (len(_reachable(self.n, self.out_links, self.links, 0, forward=True)) == self.n
                and len(_reachable(self.n, self.in_links, self.links, 0, forward=False)) == self.n)


def _reachable(n, adjacency, links, start, forward):
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for li in adjacency[u]:
            v = links[li].to if forward else links[li].frm
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


# ---------------------------------------------------------------------------
# File ingestion / serialization

def load_network(path: str, slot: int = 0) -> Network:
    """Read a network JSON file and categorize every link for `slot`.

    Average speeds above free-flow are clamped to free-flow (with a warning)
    so that the speed factor stays in (0, 1].  Duplicate (from, to) pairs are
    rejected.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return network_from_dict(doc, slot, origin=path)


def network_from_dict(doc: dict, slot: int = 0, origin: str = "<dict>") -> Network:
    for key in ("slot_count", "nodes", "links"):
        if key not in doc:
            raise ParseError(f"{origin}: missing top-level field '{key}'")
    slot_count = doc["slot_count"]
    if not isinstance(slot_count, int) or slot_count < 1:
        raise ParseError(f"{origin}: slot_count must be a positive integer")
    if not (0 <= slot < slot_count):
        raise ParameterError(f"slot {slot} out of range [0, {slot_count})")
    nodes = doc["nodes"]
    if not nodes:
        raise ParseError(f"{origin}: empty node set")
    ids = [nd.get("id") for nd in nodes]
    if sorted(ids) != list(range(len(nodes))):
        raise ParseError(f"{origin}: node ids must be dense 0..n-1")
    coords = None
    if all("lat" in nd and "lon" in nd for nd in nodes):
        by_id = {nd["id"]: (nd["lat"], nd["lon"]) for nd in nodes}
        coords = [by_id[i] for i in range(len(nodes))]
    raw_links = doc["links"]
    if not raw_links:
        raise ParseError(f"{origin}: empty link set")
    links = []
    seen_pairs = set()
    for i, rl in enumerate(raw_links):
        try:
            frm, to = rl["from"], rl["to"]
            length = float(rl["length_mi"])
            free = float(rl["free_flow_mph"])
            avgs = [float(v) for v in rl["avg_mph"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{origin}: link {i}: {exc}") from exc
        if frm == to:
            raise ParseError(f"{origin}: link {i}: self-loop {frm}->{to}")
        if (frm, to) in seen_pairs:
            raise ParseError(f"{origin}: link {i}: duplicate link {frm}->{to}")
        seen_pairs.add((frm, to))
        if length <= 0 or free <= 0:
            raise ParseError(f"{origin}: link {i}: non-positive length or free-flow speed")
        if len(avgs) != slot_count:
            raise ParseError(f"{origin}: link {i}: expected {slot_count} avg speeds, got {len(avgs)}")
        clamped = []
        for s, v in enumerate(avgs):
            if v <= 0:
                raise ParseError(f"{origin}: link {i}: non-positive avg speed in slot {s}")
            if v > free:
                log.warning("%s: link %d slot %d: avg %.3f clamped to free-flow %.3f",
                            origin, i, s, v, free)
                v = free
            clamped.append(v)
        links.append(Link(frm, to, length, free, tuple(clamped)))
    net = Network(len(nodes), links, slot_count, coords)
    net.categories(slot)  # validate slot and warm the cache
    return net


def network_to_dict(net: Network) -> dict:
    nodes = []
    for i in range(net.n):
        nd: dict = {"id": i}
        if net.coords is not None:
            nd["lat"], nd["lon"] = net.coords[i]
        nodes.append(nd)
    links = [{"from": lk.frm, "to": lk.to, "length_mi": lk.length,
              "free_flow_mph": lk.free_flow, "avg_mph": list(lk.avg_speeds)}
             for lk in net.links]
    return {"slot_count": net.slot_count, "nodes": nodes, "links": links}


def save_network(net: Network, path: str) -> None:
    """Write the canonical JSON form (sorted keys, no whitespace padding)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_network_csv(path: str, slot: int = 0) -> Network:
    """CSV variant: header 'from,to,length_mi,free_flow_mph,avg_mph', one slot."""
    import csv

    links_raw = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"from", "to", "length_mi", "free_flow_mph", "avg_mph"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ParseError(f"{path}: CSV header must contain {sorted(required)}")
        for row in reader:
            links_raw.append({"from": int(row["from"]), "to": int(row["to"]),
                              "length_mi": float(row["length_mi"]),
                              "free_flow_mph": float(row["free_flow_mph"]),
                              "avg_mph": [float(row["avg_mph"])]})
    if not links_raw:
        raise ParseError(f"{path}: empty link set")
    n = 1 + max(max(r["from"], r["to"]) for r in links_raw)
    doc = {"slot_count": 1, "nodes": [{"id": i} for i in range(n)], "links": links_raw}
    return network_from_dict(doc, slot, origin=path)


# ---------------------------------------------------------------------------
# Synthetic generation

# Speed-factor bands per category, kept strictly inside the categorization
# boundaries so float noise cannot flip a bucket.
_SPEED_FACTOR_BANDS = {
    TrafficCategory.HIGH: (0.20, 0.499),
    TrafficCategory.MEDIUM: (0.505, 0.745),
    TrafficCategory.LOW: (0.755, 0.999),
}


def generate_synthetic(kind: str, nodes: int, avg_degree: float,
                       category_mix: Sequence[float], seed: int,
                       slot_count: int = 1) -> Network:
    """Deterministic synthetic network, strongly connected by construction.

    `avg_degree` counts in+out degree, so a random network gets
    round(nodes * avg_degree / 2) directed links.  `category_mix` gives the
    (high, medium, low) sampling probabilities for link categories.
    """
    if nodes < 2:
        raise ParameterError("need at least 2 nodes")
    if abs(sum(category_mix) - 1.0) > 1e-9 or any(p < 0 for p in category_mix):
        raise ParameterError("category_mix must be three non-negative probabilities summing to 1")
    rng = random.Random(seed)
    if kind == "grid":
        pairs, coords = _grid_edges(nodes)
    elif kind == "random":
        m = round(nodes * avg_degree / 2)
        if m < nodes:
            raise ParameterError(
                f"avg_degree {avg_degree} gives {m} links; strong connectivity needs >= {nodes}")
        pairs, coords = _random_edges(nodes, m, rng)
    else:
        raise ParameterError(f"unknown kind {kind!r}")

    cats = list(TrafficCategory)
    links = []
    for frm, to in pairs:
        cat = rng.choices(cats, weights=category_mix)[0]
        lo, hi = _SPEED_FACTOR_BANDS[cat]
        free = rng.uniform(30.0, 70.0)
        avg = free * rng.uniform(lo, hi)
        length = rng.uniform(0.1, 2.0)
        links.append(Link(frm, to, length, free, (avg,) * slot_count))
    net = Network(nodes, links, slot_count, coords)
    assert net.is_strongly_connected()
    return net


def _grid_edges(nodes):
    rows = int(math.sqrt(nodes))
    while rows > 1 and nodes % rows != 0:
        rows -= 1
    cols = nodes // rows
    pairs = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                pairs.append((u, u + 1))
                pairs.append((u + 1, u))
            if r + 1 < rows:
                pairs.append((u, u + cols))
                pairs.append((u + cols, u))
    coords = [(42.30 + 0.01 * r, -71.10 + 0.01 * c) for r in range(rows) for c in range(cols)]
    return pairs, coords


def _random_edges(nodes, m, rng):
    # A random Hamiltonian cycle guarantees strong connectivity; extra links
    # are sampled without duplicates up to the requested count.
    order = list(range(nodes))
    rng.shuffle(order)
    pairs = [(order[i], order[(i + 1) % nodes]) for i in range(nodes)]
    present = set(pairs)
    while len(pairs) < m:
        u = rng.randrange(nodes)
        v = rng.randrange(nodes)
        if u == v or (u, v) in present:
            continue
        present.add((u, v))
        pairs.append((u, v))
    coords = [(rng.uniform(42.2, 42.5), rng.uniform(-71.2, -70.9)) for _ in range(nodes)]
    return pairs, coords
