"""Command-line entry points.

Subcommands: load, facet, lattice, select, materialize, export, bench, serve.
Every subcommand prints JSON on stdout (export can emit raw N-Triples with
--raw).  Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import WorkloadSpec, generate_workload, run_bench
from .costs import make_model
from .errors import KgCubeError
from .lattice import Facet, build_lattice
from .materialize import expand, materialize
from .select import SelectionPlan, exhaustive_select, greedy_select
from .sparql import parse_query
from .store import load_ntriples

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); the contract says 1
        raise _UsageError(message)


def _emit(data: dict) -> None:
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _load_graph(path: str):
    with open(path, "rb") as fh:
        return load_ntriples(fh)


def _load_facet(path: str) -> Facet:
    text = Path(path).read_text(encoding="utf-8")
    return Facet(parse_query(text))


def _parse_views(raw: str | None) -> list[str] | None:
    if raw is None:
        return None
    return [v.strip() for v in raw.split(",") if v.strip()]


def _build_model(args):
    views = _parse_views(getattr(args, "views", None))
    return make_model(args.model, seed=getattr(args, "seed", 0) or 0, views=views)


def cmd_load(args) -> int:
    g = _load_graph(args.file)
    _emit({"file": args.file, "stats": g.stats().to_json()})
    return EXIT_OK


def cmd_facet(args) -> int:
    facet = _load_facet(args.facet)
    out = {"facet": facet.to_json()}
    if args.graph:
        g = _load_graph(args.graph)
        from .query import evaluate

        out["rootGroups"] = len(evaluate(g, facet.query).rows)
    _emit(out)
    return EXIT_OK


def cmd_lattice(args) -> int:
    facet = _load_facet(args.facet)
    lattice = build_lattice(facet)
    out = lattice.to_json()
    if args.graph and args.model:
        g = _load_graph(args.graph)
        model = _build_model(args)
        out["costs"] = {n.id: model.cost(g, n) for n in lattice.sorted_nodes()}
        out["costModel"] = model.kind
    _emit(out)
    return EXIT_OK


def cmd_select(args) -> int:
    facet = _load_facet(args.facet)
    lattice = build_lattice(facet)
    g = _load_graph(args.graph)
    model = _build_model(args)
    views = _parse_views(args.views)
    k = args.k if args.k is not None else (len(views) if views else 0)
    if args.exhaustive:
        plan = exhaustive_select(lattice, model, g, k)
    else:
        plan = greedy_select(lattice, model, g, k, triple_budget=args.triple_budget)
    _emit(plan.to_json())
    return EXIT_OK


def cmd_materialize(args) -> int:
    facet = _load_facet(args.facet)
    lattice = build_lattice(facet)
    g = _load_graph(args.graph)
    views = _parse_views(args.views) or []
    plan = SelectionPlan(tuple(views), len(views), "user", (), 0.0)
    eg = expand(g, lattice, plan)
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for view_id, view in eg.views.items():
            (out_dir / f"view_{view_id}.nt").write_text(view.to_ntriples(), encoding="utf-8")
    _emit(eg.to_json())
    return EXIT_OK


def cmd_export(args) -> int:
    facet = _load_facet(args.facet)
    lattice = build_lattice(facet)
    g = _load_graph(args.graph)
    view = materialize(g, lattice.node(args.view))
    if args.raw:
        sys.stdout.write(view.to_ntriples())
    else:
        _emit({"id": view.node_id, "iri": view.iri, "ntriples": view.to_ntriples()})
    return EXIT_OK


def cmd_bench(args) -> int:
    facet = _load_facet(args.facet)
    lattice = build_lattice(facet)
    g = _load_graph(args.graph)
    raw_configs = json.loads(Path(args.configs).read_text(encoding="utf-8"))
    if not isinstance(raw_configs, list):
        raise KgCubeError("configs file must hold a JSON array")
    configs = []
    for cfg in raw_configs:
        model = make_model(
            str(cfg.get("model", "")),
            seed=int(cfg.get("seed", 0)),
            views=cfg.get("views"),
        )
        configs.append((model, int(cfg.get("k", len(cfg.get("views") or ())))))
    workload = generate_workload(
        facet, g, WorkloadSpec(count=args.count, seed=args.seed, filter_probability=args.filter_probability)
    )
    report = run_bench(g, lattice, workload, configs, verify=args.verify)
    out_path = Path(args.out)
    out_path.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    _emit(
        {
            "reportPath": str(out_path),
            "workloadSize": report.workload_size,
            "verified": report.verified,
            "configurations": [
                {
                    "label": c.label,
                    "meanNs": c.mean_ns,
                    "speedupVsBase": c.speedup_vs_base,
                    "storageAmplification": c.storage_amplification,
                    "viewAnswered": c.view_answered,
                }
                for c in report.configurations
            ],
        }
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import Service

    port = args.port if args.port is not None else int(os.environ.get("PORT", "8080"))
    data_dir = args.data_dir or os.environ.get("DATA_DIR")
    service = Service(host=args.host, port=port, ui_dir=args.ui_dir)
    if data_dir:
        for path in sorted(Path(data_dir).glob("*.nt")):
            service.session.add_dataset(path.stem, path.read_text(encoding="utf-8"))
            sys.stderr.write(f"loaded dataset {path.stem} from {path}\n")
    host, bound_port = service.address
    sys.stderr.write(f"kgcube service on http://{host}:{bound_port}\n")
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        service.shutdown()
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="kgcube", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="validate an N-Triples file and print stats")
    p.add_argument("file")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("facet", help="parse and describe a facet query")
    p.add_argument("--facet", required=True, help="file with the facet query text")
    p.add_argument("--graph", help="optional N-Triples file to count root groups")
    p.set_defaults(func=cmd_facet)

    p = sub.add_parser("lattice", help="print the facet's view lattice as JSON")
    p.add_argument("--facet", required=True)
    p.add_argument("--graph")
    p.add_argument("--model", help="include per-node costs under this model")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("select", help="pick k views under a cost model")
    p.add_argument("--graph", required=True)
    p.add_argument("--facet", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--views", help="comma-separated ids for the user-defined model")
    p.add_argument("--triple-budget", type=int, dest="triple_budget")
    p.add_argument("--exhaustive", action="store_true", help="use the exhaustive oracle")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("materialize", help="materialize chosen views")
    p.add_argument("--graph", required=True)
    p.add_argument("--facet", required=True)
    p.add_argument("--views", required=True, help="comma-separated view ids")
    p.add_argument("--out-dir", dest="out_dir", help="write each view as N-Triples here")
    p.set_defaults(func=cmd_materialize)

    p = sub.add_parser("export", help="print one materialized view")
    p.add_argument("--graph", required=True)
    p.add_argument("--facet", required=True)
    p.add_argument("--view", required=True)
    p.add_argument("--raw", action="store_true", help="emit raw N-Triples instead of JSON")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("bench", help="run a seeded workload across configurations")
    p.add_argument("--graph", required=True)
    p.add_argument("--facet", required=True)
    p.add_argument("--configs", required=True, help="JSON file: [{model, k, seed?, views?}]")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--filter-probability", type=float, default=0.3, dest="filter_probability")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--out", default="bench_report.json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP/JSON service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, help="defaults to $PORT or 8080")
    p.add_argument("--data-dir", dest="data_dir", help="preload *.nt datasets ($DATA_DIR)")
    p.add_argument("--ui-dir", dest="ui_dir", help="serve a built UI from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (KgCubeError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
