"""Command-line front door.

Subcommands: gen (synthetic networks), route (single query), compare
(algorithm sweep with CSV + figures), verify (solvers vs brute-force
oracles), bench (timing report), export-milp (LP text file).

Exit codes: 0 success, 2 no route, 64 usage error, 70 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .crptc import bilevel_route, crptc_exact, export_milp
from .energy import DEFAULT_PARAMS, params_from_json
from .errors import CapacityError, EcoRouteError, NoRouteError, ParameterError, ParseError
from .netmodel import Network, generate_synthetic, load_network, load_network_csv, save_network
from .oracle import oracle_cdf, oracle_crptc
from .routing import (Query, RouteSolution, cdf_dijkstra, cdf_exact, fastest_route,
                      hybrid_lp_route, weighted_route)

EXIT_OK = 0
EXIT_NO_ROUTE = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70

ALGORITHMS = {
    "fastest": fastest_route,
    "cdf": cdf_dijkstra,
    "cdf-exact": cdf_exact,
    "hybrid-lp": hybrid_lp_route,
    "bilevel": bilevel_route,
    "crptc": crptc_exact,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _round9(obj):
    """Clamp every float to 9 significant digits for stable JSON output."""
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _emit(doc) -> None:
    print(json.dumps(_round9(doc), sort_keys=True))


def _load_net(path: str, slot: int) -> Network:
    if path.endswith(".csv"):
        return load_network_csv(path, slot)
    return load_network(path, slot)


def _load_params(path):
    return params_from_json(path) if path else DEFAULT_PARAMS


def _solution_doc(sol: RouteSolution) -> dict:
    b = sol.breakdown
    return {
        "algorithm": sol.algorithm,
        "nodes": sol.node_path,
        "links": sol.link_path,
        "y": sol.y,
        "breakdown": {
            "gas_dollars": b.gas_dollars,
            "electricity_dollars": b.electricity_dollars,
            "kwh_used": b.kwh_used,
            "gallons_used": b.gallons_used,
            "total_dollars": b.total_dollars,
        },
        "travel_time_h": sol.travel_time,
        "wall_time_s": sol.wall_time,
    }


def _thread_count() -> int:
    cap = os.environ.get("ECOROUTE_THREADS")
    if cap:
        return max(1, int(cap))
    return min(8, os.cpu_count() or 1)


# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    mix = tuple(float(v) for v in args.mix.split(","))
    if len(mix) != 3:
        raise ParameterError("--mix needs three comma-separated probabilities")
    net = generate_synthetic(args.kind, args.nodes, args.avg_degree, mix,
                             args.seed, slot_count=args.slots)
    save_network(net, args.output)
    _emit({"nodes": net.n, "links": net.m, "output": args.output})
    return EXIT_OK


def _run_query(net, q, algo, params):
    if q.alpha > 0:
        machinery = "crptc" if algo in ("crptc", "bilevel") else "cdf"
        return weighted_route(net, q, machinery, params)
    return ALGORITHMS[algo](net, q, params)


def cmd_route(args) -> int:
    net = _load_net(args.net, args.slot)
    params = _load_params(args.params)
    q = Query(origin=args.origin, destination=args.dest, budget=args.budget_kwh,
              alpha=args.alpha, slot=args.slot)
    sol = _run_query(net, q, args.algo, params)
    if args.geojson:
        _write_geojson(net, sol, args.geojson)
    _emit(_solution_doc(sol))
    return EXIT_OK


def _write_geojson(net: Network, sol: RouteSolution, path: str) -> None:
    if net.coords is None:
        raise ParameterError("network has no lat/lon coordinates; cannot write GeoJSON")
    coords = [[net.coords[nid][1], net.coords[nid][0]] for nid in sol.node_path]
    doc = {"type": "FeatureCollection", "features": [{
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {"algorithm": sol.algorithm,
                       "energy_cost": sol.breakdown.total_dollars,
                       "travel_time_h": sol.travel_time},
    }]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round9(doc), fh, sort_keys=True)
        fh.write("\n")


def _sample_pairs(net: Network, count: int, seed: int, slot: int):
    """Uniform O-D pairs restricted to reachable combinations."""
    from .routing import _dijkstra, link_costs

    rng = random.Random(seed)
    lc = link_costs(net, slot, DEFAULT_PARAMS)
    pairs = []
    attempts = 0
    while len(pairs) < count and attempts < 100 * count + 100:
        attempts += 1
        o = rng.randrange(net.n)
        d = rng.randrange(net.n)
        if o == d:
            continue
        dist, _ = _dijkstra(net, lc.time, o, d)
        if dist[d] < float("inf"):
            pairs.append((o, d))
    return pairs


def cmd_compare(args) -> int:
    net = _load_net(args.net, args.slot)
    params = _load_params(args.params)
    budgets = [float(b) for b in args.budgets.split(",")]
    algos = args.algos.split(",")
    for a in algos:
        if a not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {a!r}")
    pairs = _sample_pairs(net, args.pairs, args.seed, args.slot)

    tasks = [(pi, o, d, b, a) for pi, (o, d) in enumerate(pairs)
             for b in budgets for a in algos]

    def run(task):
        pi, o, d, b, a = task
        row = {"od_index": pi, "origin": o, "destination": d, "budget": b,
               "algorithm": a, "energy_cost": None, "travel_time": None,
               "kwh_used": None, "wall_time": None, "error": ""}
        try:
            q = Query(origin=o, destination=d, budget=b, slot=args.slot)
            sol = ALGORITHMS[a](net, q, params)
            row.update(energy_cost=sol.breakdown.total_dollars,
                       travel_time=sol.travel_time,
                       kwh_used=sol.breakdown.kwh_used,
                       wall_time=sol.wall_time)
        except EcoRouteError as exc:
            row["error"] = type(exc).__name__
        return row

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        rows = list(pool.map(run, tasks))

    summary = _savings_summary(rows, budgets, algos)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write_csv(os.path.join(args.out_dir, "compare.csv"), rows,
                   ["od_index", "origin", "destination", "budget", "algorithm",
                    "energy_cost", "travel_time", "kwh_used", "wall_time", "error"])
        _write_csv(os.path.join(args.out_dir, "summary.csv"), summary,
                   ["budget", "metric", "pair", "value"])
        from .report import compare_figures
        compare_figures(rows, args.out_dir)
    _emit({"pairs": len(pairs), "rows": len(rows), "summary": summary})
    return EXIT_OK


def _savings_summary(rows, budgets, algos):
    """Mean pairwise savings percentages, fastest-route energy as baseline."""
    table = {}
    for r in rows:
        if not r["error"]:
            table[(r["od_index"], r["budget"], r["algorithm"])] = r

    def mean_saving(budget, base_algo, alt_algo, key):
        vals = []
        for r in rows:
            if r["algorithm"] != base_algo or r["budget"] != budget or r["error"]:
                continue
            alt = table.get((r["od_index"], budget, alt_algo))
            if alt is None or r[key] <= 0:
                continue
            vals.append(100.0 * (r[key] - alt[key]) / r[key])
        return sum(vals) / len(vals) if vals else None

    eco = [a for a in algos if a != "fastest"]
    out = []
    for b in budgets:
        if "fastest" in algos:
            for a in eco:
                v = mean_saving(b, "fastest", a, "energy_cost")
                if v is not None:
                    out.append({"budget": b, "metric": "energy_saving_pct",
                                "pair": f"{a}_vs_fastest", "value": v})
                v = mean_saving(b, a, "fastest", "travel_time")
                if v is not None:
                    out.append({"budget": b, "metric": "time_saving_pct",
                                "pair": f"fastest_vs_{a}", "value": v})
        for hi, lo in (("cdf", "crptc"), ("bilevel", "crptc"), ("cdf", "bilevel")):
            if hi in algos and lo in algos:
                v = mean_saving(b, hi, lo, "energy_cost")
                if v is not None:
                    out.append({"budget": b, "metric": "energy_saving_pct",
                                "pair": f"{lo}_vs_{hi}", "value": v})
    return out


def _write_csv(path, rows, fields):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (f"{v:.9g}" if isinstance(v, float) else v)
                             for k, v in r.items() if k in fields})


def cmd_verify(args) -> int:
    if args.max_nodes > 14:
        raise ParameterError("--max-nodes must be <= 14 (enumeration cap)")
    budgets = [float(b) for b in args.budgets.split(",")]
    checks = {"cdf_exact == oracle_cdf": 0, "crptc_exact == oracle_crptc": 0,
              "hybrid_lp == cdf_exact": 0, "sandwich ordering": 0}
    total = 0
    divergence = 0
    failures = []
    rel = 1e-9
    for seed in range(args.seeds):
        nodes = 6 + seed % max(1, args.max_nodes - 5)
        net = generate_synthetic("random", nodes, 3.0, (1 / 3, 1 / 3, 1 / 3), seed)
        for budget in budgets:
            q = Query(origin=0, destination=nodes - 1, budget=budget)
            total += 1
            repro = f"seed={seed} nodes={nodes} budget={budget}"
            exact = cdf_exact(net, q)
            dij = cdf_dijkstra(net, q)
            orc = oracle_cdf(net, q)
            ok = abs(exact.cost - orc.cost) <= rel * max(1.0, orc.cost)
            checks["cdf_exact == oracle_cdf"] += ok
            if not ok:
                failures.append(("cdf_exact vs oracle", repro))
            if abs(dij.cost - exact.cost) > rel * max(1.0, exact.cost):
                divergence += 1
            cr = crptc_exact(net, q)
            orc2 = oracle_crptc(net, q)
            ok = abs(cr.cost - orc2.cost) <= rel * max(1.0, orc2.cost)
            checks["crptc_exact == oracle_crptc"] += ok
            if not ok:
                failures.append(("crptc_exact vs oracle", repro))
            hyb = hybrid_lp_route(net, q)
            ok = abs(hyb.cost - exact.cost) <= rel * max(1.0, exact.cost)
            checks["hybrid_lp == cdf_exact"] += ok
            if not ok:
                failures.append(("hybrid_lp vs cdf_exact", repro))
            bil = bilevel_route(net, q)
            fast = fastest_route(net, q)
            ok = (cr.cost <= bil.cost + 1e-9 and bil.cost <= dij.cost + 1e-9
                  and cr.cost <= fast.cost + 1e-9)
            checks["sandwich ordering"] += ok
            if not ok:
                failures.append(("sandwich", repro))
    for name, passed in checks.items():
        print(f"{name}: {passed}/{total}")
    print(f"cdf_dijkstra vs cdf_exact divergence: {divergence}/{total}")
    if failures:
        for what, repro in failures[:10]:
            print(f"FAIL {what}: {repro}", file=sys.stderr)
        return 1
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.net:
        net = _load_net(args.net, args.slot)
    elif args.gen_nodes:
        net = generate_synthetic("random", args.gen_nodes, args.gen_degree,
                                 (1 / 3, 1 / 3, 1 / 3), args.seed)
    else:
        raise ParameterError("need --net or --gen-nodes")
    params = _load_params(args.params)
    algos = args.algos.split(",")
    for a in algos:
        if a not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {a!r}")
    pairs = _sample_pairs(net, args.pairs, args.seed, args.slot)
    samples: dict[str, list[float]] = {a: [] for a in algos}
    for a in algos:
        for o, d in pairs:
            q = Query(origin=o, destination=d, budget=args.budget_kwh, slot=args.slot)
            try:
                sol = ALGORITHMS[a](net, q, params)
                samples[a].append(sol.wall_time)
            except EcoRouteError:
                pass

    def pct(vals, p):
        if not vals:
            return None
        ordered = sorted(vals)
        return ordered[min(len(ordered) - 1, int(p / 100 * len(ordered)))]

    stats = {a: {"queries": len(v),
                 "mean_s": (sum(v) / len(v)) if v else None,
                 "median_s": statistics.median(v) if v else None,
                 "p95_s": pct(v, 95)} for a, v in samples.items()}
    print(f"{'algorithm':>10} {'queries':>8} {'mean (s)':>10} {'median (s)':>11} {'p95 (s)':>10}",
          file=sys.stderr)
    for a in algos:
        s = stats[a]
        if s["queries"]:
            print(f"{a:>10} {s['queries']:>8} {s['mean_s']:>10.4f} "
                  f"{s['median_s']:>11.4f} {s['p95_s']:>10.4f}", file=sys.stderr)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        rows = [{"algorithm": a, "wall_time": t} for a in algos for t in samples[a]]
        _write_csv(os.path.join(args.out_dir, "bench.csv"), rows, ["algorithm", "wall_time"])
        from .report import bench_figure
        bench_figure({a: v for a, v in samples.items() if v}, args.out_dir)
    _emit({"nodes": net.n, "links": net.m, "pairs": len(pairs), "stats": stats})
    return EXIT_OK


def cmd_export_milp(args) -> int:
    net = _load_net(args.net, args.slot)
    params = _load_params(args.params)
    q = Query(origin=args.origin, destination=args.dest, budget=args.budget_kwh,
              slot=args.slot)
    export_milp(net, q, args.output, params)
    _emit({"output": args.output, "links": net.m, "binaries": net.m})
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecoroute", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic network file")
    p.add_argument("--kind", choices=["grid", "random"], default="random")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--avg-degree", type=float, default=4.0)
    p.add_argument("--mix", default="0.34,0.33,0.33",
                   help="high,medium,low category probabilities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slots", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("route", help="run one routing query")
    p.add_argument("--net", required=True)
    p.add_argument("--from", dest="origin", type=int, required=True)
    p.add_argument("--to", dest="dest", type=int, required=True)
    p.add_argument("--algo", choices=sorted(ALGORITHMS), default="cdf")
    p.add_argument("--budget-kwh", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--slot", type=int, default=0)
    p.add_argument("--params", help="EnergyParams JSON override")
    p.add_argument("--geojson", help="also write the route as GeoJSON")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("compare", help="algorithm comparison sweep")
    p.add_argument("--net", required=True)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budgets", default="0,0.5,1,2.5,5.7")
    p.add_argument("--algos", default="fastest,cdf,bilevel,crptc")
    p.add_argument("--slot", type=int, default=0)
    p.add_argument("--params")
    p.add_argument("--out-dir", help="write compare.csv, summary.csv and figures here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="check solvers against brute-force oracles")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--max-nodes", type=int, default=10)
    p.add_argument("--budgets", default="0,0.1,0.3,1.0")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="timing report")
    p.add_argument("--net")
    p.add_argument("--gen-nodes", type=int)
    p.add_argument("--gen-degree", type=float, default=4.4)
    p.add_argument("--pairs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-kwh", type=float, default=1.0)
    p.add_argument("--algos", default="fastest,cdf,bilevel")
    p.add_argument("--slot", type=int, default=0)
    p.add_argument("--params")
    p.add_argument("--out-dir", help="write bench.csv and runtimes.png here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-milp", help="write the combined problem as an LP file")
    p.add_argument("--net", required=True)
    p.add_argument("--from", dest="origin", type=int, required=True)
    p.add_argument("--to", dest="dest", type=int, required=True)
    p.add_argument("--budget-kwh", type=float, default=0.0)
    p.add_argument("--slot", type=int, default=0)
    p.add_argument("--params")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_export_milp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except NoRouteError:
        print(json.dumps({"error": "no_route"}))
        return EXIT_NO_ROUTE
    except (ParameterError, ParseError, ValueError, OSError) as exc:
        print(f"ecoroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"ecoroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EcoRouteError as exc:
        print(f"ecoroute: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
