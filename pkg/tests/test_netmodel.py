import json

import pytest

from ecoroute import (ParameterError, ParseError, TrafficCategory, categorize_link,
                      generate_synthetic, load_network, load_network_csv, save_network)
from ecoroute.netmodel import Link, Network, network_from_dict, network_to_dict

MIX = (1 / 3, 1 / 3, 1 / 3)


class TestCategorize:
    def test_boundaries(self):
        assert categorize_link(20.0, 40.0) is TrafficCategory.HIGH   # S = 0.5
        assert categorize_link(10.0, 40.0) is TrafficCategory.HIGH
        assert categorize_link(20.1, 40.0) is TrafficCategory.MEDIUM
        assert categorize_link(29.9, 40.0) is TrafficCategory.MEDIUM
        assert categorize_link(30.0, 40.0) is TrafficCategory.LOW    # S = 0.75
        assert categorize_link(40.0, 40.0) is TrafficCategory.LOW

    def test_category_values_are_table_indices(self):
        assert [int(c) for c in TrafficCategory] == [0, 1, 2]

    def test_rejects_bad_speeds(self):
        with pytest.raises(ValueError):
            categorize_link(0.0, 40.0)
        with pytest.raises(ValueError):
            categorize_link(30.0, -1.0)
        with pytest.raises(ValueError):
            categorize_link(50.0, 40.0)


class TestNetwork:
    def test_adjacency(self, diamond):
        assert diamond.n == 4 and diamond.m == 4
        assert diamond.out_links[0] == (0, 2)
        assert diamond.in_links[3] == (1, 3)
        assert diamond.categories(0) == (TrafficCategory.LOW, TrafficCategory.LOW,
                                         TrafficCategory.HIGH, TrafficCategory.HIGH)

    def test_slot_out_of_range(self, diamond):
        with pytest.raises(ParameterError):
            diamond.categories(1)

    def test_endpoint_out_of_range(self):
        with pytest.raises(ParseError):
            Network(2, [Link(0, 5, 1.0, 40.0, (30.0,))], 1)

    def test_strong_connectivity(self, diamond):
        assert not diamond.is_strongly_connected()  # 3 has no way back
        loop = [Link(0, 1, 1.0, 40.0, (30.0,)), Link(1, 0, 1.0, 40.0, (30.0,))]
        assert Network(2, loop, 1).is_strongly_connected()


class TestLoadNetwork:
    def doc(self, **overrides):
        base = {
            "slot_count": 2,
            "nodes": [{"id": 0, "lat": 42.3, "lon": -71.1},
                      {"id": 1, "lat": 42.4, "lon": -71.0}],
            "links": [{"from": 0, "to": 1, "length_mi": 1.5,
                       "free_flow_mph": 60.0, "avg_mph": [25.0, 55.0]},
                      {"from": 1, "to": 0, "length_mi": 1.5,
                       "free_flow_mph": 60.0, "avg_mph": [40.0, 60.0]}],
        }
        base.update(overrides)
        return base

    def test_roundtrip_is_byte_stable(self, tmp_path):
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        p1.write_text(json.dumps(self.doc()))
        net = load_network(str(p1), slot=1)
        assert net.slot_count == 2
        assert net.coords == ((42.3, -71.1), (42.4, -71.0))
        assert net.categories(0) == (TrafficCategory.HIGH, TrafficCategory.MEDIUM)
        assert net.categories(1) == (TrafficCategory.LOW, TrafficCategory.LOW)
        save_network(net, str(p1))
        save_network(load_network(str(p1)), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_dict_roundtrip(self):
        net = network_from_dict(self.doc())
        again = network_from_dict(network_to_dict(net))
        assert again.links == net.links and again.coords == net.coords

    def test_clamps_avg_above_free_flow(self, caplog):
        doc = self.doc()
        doc["links"][0]["avg_mph"] = [25.0, 80.0]
        with caplog.at_level("WARNING", logger="ecoroute.netmodel"):
            net = network_from_dict(doc)
        assert net.links[0].avg_speeds == (25.0, 60.0)
        assert any("clamped" in r.message for r in caplog.records)

    def test_missing_coords_means_no_coords(self):
        doc = self.doc()
        del doc["nodes"][0]["lat"]
        assert network_from_dict(doc).coords is None

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("slot_count"),
        lambda d: d.update(slot_count=0),
        lambda d: d.update(nodes=[]),
        lambda d: d.update(links=[]),
        lambda d: d["nodes"].append({"id": 5}),
        lambda d: d["links"].append(dict(d["links"][0])),               # duplicate
        lambda d: d["links"][0].update({"to": 0}),                      # self-loop
        lambda d: d["links"][0].update({"length_mi": 0.0}),
        lambda d: d["links"][0].update({"avg_mph": [25.0]}),            # slot mismatch
        lambda d: d["links"][0].update({"avg_mph": [25.0, -1.0]}),
        lambda d: d["links"][0].pop("free_flow_mph"),
    ])
    def test_rejects_malformed(self, mutate):
        doc = self.doc()
        mutate(doc)
        with pytest.raises(ParseError):
            network_from_dict(doc)

    def test_invalid_json_text(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ParseError):
            load_network(str(p))

    def test_csv_variant(self, tmp_path):
        p = tmp_path / "net.csv"
        p.write_text("from,to,length_mi,free_flow_mph,avg_mph\n"
                     "0,1,1.5,60,25\n1,0,1.5,60,55\n")
        net = load_network_csv(str(p))
        assert net.n == 2 and net.slot_count == 1
        assert net.categories(0) == (TrafficCategory.HIGH, TrafficCategory.LOW)

    def test_csv_bad_header(self, tmp_path):
        p = tmp_path / "net.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ParseError):
            load_network_csv(str(p))


class TestGenerate:
    def test_random_link_count_and_connectivity(self):
        net = generate_synthetic("random", 500, 4.4, MIX, seed=7)
        assert net.m == round(500 * 4.4 / 2) == 1100
        assert net.is_strongly_connected()
        assert net.coords is not None and len(net.coords) == 500

    def test_deterministic(self):
        a = generate_synthetic("random", 60, 4.0, MIX, seed=3)
        b = generate_synthetic("random", 60, 4.0, MIX, seed=3)
        assert a.links == b.links and a.coords == b.coords
        c = generate_synthetic("random", 60, 4.0, MIX, seed=4)
        assert c.links != a.links

    def test_grid(self):
        net = generate_synthetic("grid", 12, 4.0, MIX, seed=0)
        assert net.n == 12
        assert net.is_strongly_connected()
        # every edge comes paired with its reverse
        pairs = {(lk.frm, lk.to) for lk in net.links}
        assert all((b, a) in pairs for a, b in pairs)

    def test_degenerate_mix(self):
        net = generate_synthetic("random", 30, 4.0, (1.0, 0.0, 0.0), seed=1)
        assert set(net.categories(0)) == {TrafficCategory.HIGH}

    def test_categories_respect_mix_bands(self):
        net = generate_synthetic("random", 200, 4.0, MIX, seed=5)
        seen = set(net.categories(0))
        assert seen == {TrafficCategory.HIGH, TrafficCategory.MEDIUM, TrafficCategory.LOW}

    def test_multi_slot(self):
        net = generate_synthetic("random", 10, 4.0, MIX, seed=2, slot_count=3)
        assert all(len(lk.avg_speeds) == 3 for lk in net.links)
        assert net.categories(0) == net.categories(2)

    @pytest.mark.parametrize("kwargs", [
        dict(kind="random", nodes=1, avg_degree=4.0, category_mix=MIX, seed=0),
        dict(kind="random", nodes=100, avg_degree=1.0, category_mix=MIX, seed=0),
        dict(kind="random", nodes=10, avg_degree=4.0, category_mix=(0.5, 0.5, 0.5), seed=0),
        dict(kind="torus", nodes=10, avg_degree=4.0, category_mix=MIX, seed=0),
    ])
    def test_rejects_bad_arguments(self, kwargs):
        with pytest.raises(ParameterError):
            generate_synthetic(**kwargs)
