"""Indirect energy model: per-link CS/CD dollar costs and route evaluation.

Costs come from per-category conversion factors measured on standard drive
cycles: mu_cd (miles per kWh in charge-depleting mode) and mu_cs (miles per
gallon in charge-sustaining mode).  All monetary values are US dollars.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .netmodel import Network, TrafficCategory


@dataclass(frozen=True)
class EnergyParams:
    """Prices plus the per-category conversion tables, indexed by category."""

    c_gas: float   # $/gallon
    c_ele: float   # $/kWh
    mu_cd: tuple[float, float, float]  # mi/kWh for (high, medium, low)
    mu_cs: tuple[float, float, float]  # mi/gal for (high, medium, low)

    def __post_init__(self):
        values = (self.c_gas, self.c_ele) + self.mu_cd + self.mu_cs
        if any(v <= 0 for v in values):
            raise ValueError("all EnergyParams fields must be strictly positive")


# Audi A3 e-tron conversion table with 2.75 $/gal and 0.114 $/kWh pricing.
DEFAULT_PARAMS = EnergyParams(
    c_gas=2.75,
    c_ele=0.114,
    mu_cd=(3.14, 4.39, 4.14),
    mu_cs=(28.88, 49.03, 47.11),
)


def params_from_json(path: str) -> EnergyParams:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    order = ("high", "medium", "low")
    return EnergyParams(
        c_gas=float(doc["c_gas"]),
        c_ele=float(doc["c_ele"]),
        mu_cd=tuple(float(doc["mu_cd"][k]) for k in order),
        mu_cs=tuple(float(doc["mu_cs"][k]) for k in order),
    )


def cs_cost(length: float, cat: TrafficCategory, p: EnergyParams = DEFAULT_PARAMS) -> float:
    """Dollar cost of driving `length` miles on gasoline only."""
    return p.c_gas * length / p.mu_cs[cat]


def cd_cost(length: float, cat: TrafficCategory,
            p: EnergyParams = DEFAULT_PARAMS) -> tuple[float, float]:
    """(dollar cost, kWh drawn) of driving `length` miles on battery only."""
    kwh = length / p.mu_cd[cat]
    return p.c_ele * kwh, kwh


def cdf_link_cost(length: float, cat: TrafficCategory, residual_energy: float,
                  p: EnergyParams = DEFAULT_PARAMS) -> tuple[float, float]:
    """Charge-depleting-first cost of one link given the battery state.

    Returns (dollars, residual energy after the link).  Battery is used
    first; once it cannot cover the full link, the remainder burns gas and
    the residual is clipped to zero.
    """
    if residual_energy < 0:
        raise ValueError(f"residual energy must be non-negative, got {residual_energy}")
    mu_cd = p.mu_cd[cat]
    need = length / mu_cd
    if residual_energy >= need:
        return p.c_ele * need, residual_energy - need
    cost = (p.c_ele * residual_energy
            + p.c_gas * (length - mu_cd * residual_energy) / p.mu_cs[cat])
    return cost, 0.0


def savings_rate(cat: TrafficCategory, p: EnergyParams = DEFAULT_PARAMS) -> float:
    """Dollars saved per kWh of battery spent on this category instead of gas.

    Spending 1 kWh in CD mode covers mu_cd miles, displacing
    mu_cd / mu_cs gallons.  Negative when electricity is dearer per mile.
    """
    return p.mu_cd[cat] * p.c_gas / p.mu_cs[cat] - p.c_ele


@dataclass(frozen=True)
class CostBreakdown:
    gas_dollars: float
    electricity_dollars: float
    kwh_used: float
    gallons_used: float

    @property
    def total_dollars(self) -> float:
        return self.gas_dollars + self.electricity_dollars


ZERO_BREAKDOWN = CostBreakdown(0.0, 0.0, 0.0, 0.0)


def evaluate_route(net: Network, link_path: Sequence[int], y: Sequence[float],
                   p: EnergyParams = DEFAULT_PARAMS, slot: int = 0) -> CostBreakdown:
    """Cost breakdown of a path with a given per-link CD fraction vector."""
    if len(link_path) != len(y):
        raise ValueError("y must have one entry per path link")
    cats = net.categories(slot)
    gas = ele = kwh = gallons = 0.0
    prev_to = None
    for li, yi in zip(link_path, y):
        lk = net.links[li]
        if prev_to is not None and lk.frm != prev_to:
            raise ValueError(f"discontiguous path at link {li}: expected from={prev_to}, got {lk.frm}")
        prev_to = lk.to
        if not (0.0 <= yi <= 1.0):
            raise ValueError(f"CD fraction out of [0,1] on link {li}: {yi}")
        cat = cats[li]
        g = lk.length * (1.0 - yi) / p.mu_cs[cat]
        e = lk.length * yi / p.mu_cd[cat]
        gallons += g
        kwh += e
        gas += p.c_gas * g
        ele += p.c_ele * e
    return CostBreakdown(gas, ele, kwh, gallons)
