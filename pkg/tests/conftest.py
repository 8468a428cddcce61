"""Shared fixtures: a hand-built diamond network and random-net helpers."""

import pytest

from ecoroute import generate_synthetic
from ecoroute.netmodel import Link, Network

UNIFORM_MIX = (1 / 3, 1 / 3, 1 / 3)


def make_diamond() -> Network:
    """Two-route diamond 0 -> {1, 2} -> 3.

    The top route (via 1) is two 1-mile LOW-category links; the bottom
    (via 2) is two 1.2-mile HIGH-category links driven much faster, so the
    fastest route and the cheapest route disagree.
    """
    links = [
        Link(0, 1, 1.0, 40.0, (30.0,)),
        Link(1, 3, 1.0, 40.0, (30.0,)),
        Link(0, 2, 1.2, 110.0, (50.0,)),
        Link(2, 3, 1.2, 110.0, (50.0,)),
    ]
    return Network(4, links, 1)


def small_net(seed: int, nodes: int = 0, degree: float = 3.0) -> Network:
    """Small strongly connected random network, size varied by seed."""
    if not nodes:
        nodes = 6 + seed % 5
    return generate_synthetic("random", nodes, degree, UNIFORM_MIX, seed)


@pytest.fixture
def diamond() -> Network:
    return make_diamond()
