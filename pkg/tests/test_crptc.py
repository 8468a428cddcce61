import random
import re

import pytest

from conftest import small_net
from ecoroute import (DEFAULT_PARAMS, EnergyParams, NoRouteError, Query, bilevel_route,
                      cdf_dijkstra, cdf_exact, crptc_exact, evaluate_route, export_milp,
                      fastest_route, knapsack_split, oracle_crptc, savings_rate)
from ecoroute.crptc import MAX_EXPORT_LINKS, milp_model_string
from ecoroute.errors import CapacityError
from ecoroute.netmodel import Link, Network
from ecoroute.routing import link_costs


class TestKnapsack:
    @pytest.fixture
    def two_link(self):
        # 1 mi HIGH then 1 mi LOW; HIGH has the better savings rate
        return Network(3, [Link(0, 1, 1.0, 40.0, (18.0,)),
                           Link(1, 2, 1.0, 40.0, (32.0,))], 1)

    def test_frozen_split(self, two_link):
        split = knapsack_split(two_link, [0, 1], 0.3)
        assert split.y == pytest.approx([0.942, 0.0])
        assert split.kwh_allocated == pytest.approx([0.3, 0.0])
        assert split.total_savings == pytest.approx(0.05549875346260388, rel=1e-12)

    def test_zero_budget(self, two_link):
        split = knapsack_split(two_link, [0, 1], 0.0)
        assert split.y == [0.0, 0.0] and split.total_savings == 0.0

    def test_saturating_budget_electrifies_everything(self, two_link):
        split = knapsack_split(two_link, [0, 1], 10.0)
        assert split.y == [1.0, 1.0]
        want = sum(savings_rate(c) * k for c, k in
                   [(0, 1 / 3.14), (2, 1 / 4.14)])
        assert split.total_savings == pytest.approx(want, rel=1e-12)

    def test_at_most_one_fractional_link_per_rate(self):
        net = small_net(13, nodes=12, degree=4.0)
        lc = link_costs(net, 0, DEFAULT_PARAMS)
        path = crptc_exact(net, Query(0, 11, budget=0.25)).link_path
        split = knapsack_split(net, path, 0.25)
        by_rate = {}
        for i, li in enumerate(path):
            if 0.0 < split.y[i] < 1.0:
                by_rate.setdefault(lc.rate_by_cat[lc.cat[li]], []).append(i)
        assert all(len(v) == 1 for v in by_rate.values())

    def test_beats_random_feasible_splits(self):
        rng = random.Random(99)
        net = small_net(4, nodes=10)
        budget = 0.3
        path = cdf_dijkstra(net, Query(0, 9, budget=budget)).link_path
        lc = link_costs(net, 0, DEFAULT_PARAMS)
        best = sum(lc.cs[li] for li in path) - knapsack_split(net, path, budget).total_savings
        for _ in range(1000):
            raw = [rng.random() for _ in path]
            kwh = sum(r * lc.kwh[li] for r, li in zip(raw, path))
            scale = min(1.0, budget / kwh) if kwh > 0 else 0.0
            y = [r * scale for r in raw]
            cost = evaluate_route(net, path, y).total_dollars
            assert cost >= best - 1e-9

    def test_negative_rates_stay_on_gas(self, two_link):
        pricey = EnergyParams(2.75, 5.0, DEFAULT_PARAMS.mu_cd, DEFAULT_PARAMS.mu_cs)
        split = knapsack_split(two_link, [0, 1], 1.0, pricey)
        assert split.y == [0.0, 0.0] and split.total_savings == 0.0

    def test_rejects_negative_budget(self, two_link):
        with pytest.raises(ValueError):
            knapsack_split(two_link, [0], -0.1)


class TestBilevel:
    def test_diamond_frozen(self, diamond):
        sol = bilevel_route(diamond, Query(0, 3, budget=0.3))
        assert sol.node_path == [0, 1, 3]
        assert sol.cost == pytest.approx(0.07844750583740183, rel=1e-12)

    def test_zero_budget_is_cdf_route(self):
        net = small_net(8, nodes=14)
        q = Query(0, 13)
        assert bilevel_route(net, q).cost == pytest.approx(
            cdf_dijkstra(net, q).cost, rel=1e-12)

    def test_reallocates_budget_off_the_front(self):
        # bilevel can only improve on CDF pricing of the same path
        for seed in range(10):
            net = small_net(seed, nodes=11)
            q = Query(0, 10, budget=0.2)
            assert bilevel_route(net, q).cost <= cdf_dijkstra(net, q).cost + 1e-12


class TestCrptcExact:
    @pytest.mark.parametrize("seed", range(25))
    def test_matches_oracle(self, seed):
        net = small_net(seed)
        for budget in (0.0, 0.15, 0.4):
            q = Query(0, net.n - 1, budget=budget)
            assert crptc_exact(net, q).cost == pytest.approx(
                oracle_crptc(net, q).cost, rel=1e-9)

    @pytest.mark.parametrize("seed", range(15))
    def test_sandwich_ordering(self, seed):
        net = small_net(seed + 40)
        q = Query(0, net.n - 1, budget=0.3)
        cr = crptc_exact(net, q).cost
        bi = bilevel_route(net, q).cost
        cd = cdf_dijkstra(net, q).cost
        fa = fastest_route(net, q).cost
        assert cr <= bi + 1e-9 <= cd + 2e-9
        assert cr <= fa + 1e-9

    def test_zero_budget_equals_cdf_exact(self):
        net = small_net(21, nodes=13)
        q = Query(0, 12)
        assert crptc_exact(net, q).cost == pytest.approx(
            cdf_exact(net, q).cost, rel=1e-12)

    def test_origin_equals_destination(self, diamond):
        sol = crptc_exact(diamond, Query(1, 1, budget=0.5))
        assert sol.node_path == [1] and sol.cost == 0.0

    def test_no_route(self):
        net = Network(3, [Link(0, 1, 1.0, 40.0, (30.0,)),
                          Link(1, 2, 1.0, 40.0, (30.0,)),
                          Link(1, 0, 1.0, 40.0, (30.0,))], 1)
        with pytest.raises(NoRouteError):
            crptc_exact(net, Query(2, 0, budget=0.1))

    def test_budget_monotone(self):
        net = small_net(17, nodes=10)
        costs = [crptc_exact(net, Query(0, 9, budget=0.05 * k)).cost
                 for k in range(21)]
        assert all(a >= b - 1e-12 for a, b in zip(costs, costs[1:]))


class TestMilpExport:
    def test_structure(self, diamond):
        text = milp_model_string(diamond, Query(0, 3, budget=0.3))
        assert text.startswith("\\ CRPTC MILP\nMinimize\n")
        assert text.rstrip().endswith("End")
        assert len(re.findall(r"^ flow_\d+:", text, re.M)) == diamond.n
        assert len(re.findall(r"^ zyx_\d+:", text, re.M)) == diamond.m
        assert " energy:" in text and "<= 0.3" in text
        binary_line = re.search(r"^Binary\n (.*)$", text, re.M).group(1)
        assert binary_line.split() == [f"x_{i}" for i in range(diamond.m)]
        assert len(re.findall(r"^ 0 <= y_\d+ <= 1$", text, re.M)) == diamond.m

    def test_flow_imbalance_signs(self, diamond):
        text = milp_model_string(diamond, Query(0, 3, budget=0.3))
        assert re.search(r"^ flow_0:.* = -1$", text, re.M)
        assert re.search(r"^ flow_3:.* = 1$", text, re.M)
        assert re.search(r"^ flow_1:.* = 0$", text, re.M)

    def test_export_is_deterministic(self, diamond, tmp_path):
        a, b = tmp_path / "a.lp", tmp_path / "b.lp"
        export_milp(diamond, Query(0, 3, budget=0.3), str(a))
        export_milp(diamond, Query(0, 3, budget=0.3), str(b))
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text() == milp_model_string(diamond, Query(0, 3, budget=0.3))

    def test_link_cap(self, diamond, monkeypatch):
        import ecoroute.crptc as crptc_mod
        monkeypatch.setattr(crptc_mod, "MAX_EXPORT_LINKS", 2)
        with pytest.raises(CapacityError):
            milp_model_string(diamond, Query(0, 3))
        assert MAX_EXPORT_LINKS == 20000
