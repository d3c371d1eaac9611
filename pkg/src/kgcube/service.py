"""HTTP/JSON service exposing the pipeline to the UI and to scripts.

Endpoints (all JSON):

    POST /datasets                 upload N-Triples {name, ntriples}
    GET  /datasets                 list loaded graphs
    POST /facets                   declare a facet {id?, dataset, query}
    GET  /lattice/{facet}          lattice structure + materialization state
    GET  /lattice/{facet}/costs    per-node costs ?model=...&seed=...
    POST /select                   {facet, model, k?, seed?, views?} -> plan
    POST /materialize              {planId} -> async job
    GET  /views/{id}/data          sample groups ?facet=...&limit=...
    POST /workload                 {facet, count, seed, filterProbability?}
    POST /bench                    {facet, workloadId, configs, verify?} -> job
    GET  /jobs/{id}                job phase/progress/result
    GET  /reports/{id}             finished bench report
    GET  /openapi.json             static API description

Long operations (materialization, benching) run as background jobs with
polling; at most one mutating job per facet at a time (409 otherwise).  GETs
are pure reads of the session state.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import bench as bench_mod
from .costs import LearnedRegressor, features, make_model
from .errors import KgCubeError, ValidationError
from .lattice import Facet, Lattice, ViewNode, build_lattice, node_id_for
from .materialize import ExpandedGraph, expand
from .query import evaluate
from .select import SelectionPlan, greedy_select
from .sparql import parse_query
from .store import Graph, load_ntriples

COST_MODEL_KINDS = ("random", "triples", "aggvalues", "nodes", "learned")


class HttpError(KgCubeError):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Job:
    id: str
    facet_id: str
    kind: str
    phase: str = "pending"
    progress: float = 0.0
    error: str | None = None
    result: dict | None = None

    @property
    def done(self) -> bool:
        return self.phase in ("done", "failed")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "facet": self.facet_id,
            "kind": self.kind,
            "phase": self.phase,
            "progress": self.progress,
            "error": self.error,
            "result": self.result,
        }


@dataclass
class FacetEntry:
    id: str
    dataset: str
    facet: Facet
    lattice: Lattice
    expanded: ExpandedGraph | None = None
    costs: dict[str, dict[str, float]] = field(default_factory=dict)
    regressor: LearnedRegressor | None = None


class Session:
    """All server-side state; every mutation happens under the lock."""

    def __init__(self):
        self.lock = threading.RLock()
        self.graphs: dict[str, Graph] = {}
        self.facets: dict[str, FacetEntry] = {}
        self.plans: dict[str, tuple[str, SelectionPlan]] = {}
        self.workloads: dict[str, tuple[str, list]] = {}
        self.jobs: dict[str, Job] = {}
        self.reports: dict[str, dict] = {}
        self._counter = 0

    def next_id(self, prefix: str) -> str:
        with self.lock:
            self._counter += 1
            return f"{prefix}{self._counter}"

    # -- datasets ---------------------------------------------------------

    def add_dataset(self, name: str, ntriples: str) -> dict:
        if not name:
            raise HttpError(400, "dataset name required")
        try:
            g = load_ntriples(ntriples)
        except KgCubeError as exc:
            raise HttpError(400, f"invalid N-Triples: {exc}") from exc
        with self.lock:
            self.graphs[name] = g
        return {"name": name, "stats": g.stats().to_json()}

    def list_datasets(self) -> dict:
        with self.lock:
            return {
                "datasets": [
                    {"name": name, "triples": g.n_triples, "terms": g.n_terms}
                    for name, g in sorted(self.graphs.items())
                ]
            }

    def graph(self, name: str) -> Graph:
        with self.lock:
            g = self.graphs.get(name)
        if g is None:
            raise HttpError(404, f"unknown dataset {name!r}")
        return g

    # -- facets -----------------------------------------------------------

    def add_facet(self, facet_id: str | None, dataset: str, query_text: str) -> dict:
        g = self.graph(dataset)
        try:
            facet = Facet(parse_query(query_text))
            lattice = build_lattice(facet)
        except KgCubeError as exc:
            raise HttpError(422, str(exc)) from exc
        with self.lock:
            fid = facet_id or self.next_id("f")
            if fid in self.facets:
                raise HttpError(409, f"facet {fid!r} already exists")
            self.facets[fid] = FacetEntry(fid, dataset, facet, lattice)
        return {"id": fid, "dataset": dataset, "facet": facet.to_json(), "nodes": len(lattice)}

    def facet(self, fid: str) -> FacetEntry:
        with self.lock:
            entry = self.facets.get(fid)
        if entry is None:
            raise HttpError(404, f"unknown facet {fid!r}")
        return entry

    def lattice_json(self, fid: str) -> dict:
        entry = self.facet(fid)
        data = entry.lattice.to_json()
        with self.lock:
            data["materialized"] = sorted(entry.expanded.views) if entry.expanded else []
            data["id"] = fid
            data["dataset"] = entry.dataset
        return data

    # -- costs ---------------------------------------------------------------

    def _learned_regressor(self, entry: FacetEntry) -> LearnedRegressor:
        with self.lock:
            if entry.regressor is not None:
                return entry.regressor
        g = self.graph(entry.dataset)
        nodes = list(entry.lattice.sorted_nodes())
        dim = len(features(g, nodes[0]).names)
        samples = []
        for node in nodes:
            fv = features(g, node)
            start = time.perf_counter()
            evaluate(g, node.query)
            samples.append((fv, max(time.perf_counter() - start, 1e-9)))
        extra = bench_mod.generate_workload(
            entry.facet, g, bench_mod.WorkloadSpec(count=max(dim + 2 - len(samples), 4), seed=17)
        )
        for q in extra:
            node = ViewNode(node_id_for(q.group_vars), tuple(sorted(q.group_vars)), q, False)
            fv = features(g, node)
            start = time.perf_counter()
            evaluate(g, q)
            samples.append((fv, max(time.perf_counter() - start, 1e-9)))
        regressor = LearnedRegressor.train(samples, learning_rate=0.05, epochs=800)
        with self.lock:
            entry.regressor = regressor
        return regressor

    def costs(self, fid: str, model_kind: str, seed: int) -> dict:
        entry = self.facet(fid)
        kind = model_kind.lower()
        if kind not in COST_MODEL_KINDS:
            raise HttpError(422, f"cost model must be one of {', '.join(COST_MODEL_KINDS)}")
        cache_key = f"{kind}:{seed}" if kind == "random" else kind
        with self.lock:
            cached = entry.costs.get(cache_key)
        if cached is None:
            g = self.graph(entry.dataset)
            regressor = self._learned_regressor(entry) if kind == "learned" else None
            model = make_model(kind, seed=seed, regressor=regressor)
            cached = {n.id: model.cost(g, n) for n in entry.lattice.sorted_nodes()}
            with self.lock:
                entry.costs[cache_key] = cached
        return {"facet": fid, "model": kind, "costs": cached}

    # -- selection ---------------------------------------------------------------

    def select(self, fid: str, body: dict) -> dict:
        entry = self.facet(fid)
        g = self.graph(entry.dataset)
        kind = str(body.get("model", "")).lower()
        views = body.get("views")
        seed = int(body.get("seed", 0))
        k = body.get("k")
        try:
            if kind == "user":
                if not isinstance(views, list) or not views:
                    raise ValidationError("user selection needs views[]")
                model = make_model("user", views=[str(v) for v in views])
                budget = int(k) if k is not None else len(views)
            else:
                if k is None:
                    raise ValidationError("k is required")
                regressor = self._learned_regressor(entry) if kind == "learned" else None
                model = make_model(kind, seed=seed, regressor=regressor)
                budget = int(k)
            plan = greedy_select(entry.lattice, model, g, budget)
        except KgCubeError as exc:
            raise HttpError(422, str(exc)) from exc
        plan_id = self.next_id("plan")
        with self.lock:
            self.plans[plan_id] = (fid, plan)
        return {"planId": plan_id, "facet": fid, "plan": plan.to_json()}

    # -- jobs -----------------------------------------------------------------

    def _start_job(self, fid: str, kind: str, work) -> dict:
        with self.lock:
            for job in self.jobs.values():
                if job.facet_id == fid and not job.done:
                    raise HttpError(409, f"job {job.id} still running for facet {fid!r}")
            job = Job(self.next_id("job"), fid, kind, phase="running")
            self.jobs[job.id] = job

        def runner():
            try:
                result = work(job)
                with self.lock:
                    job.result = result
                    job.progress = 1.0
                    job.phase = "done"
            except Exception as exc:  # surface job failures to pollers
                with self.lock:
                    job.error = str(exc)
                    job.phase = "failed"

        threading.Thread(target=runner, name=f"kgcube-{job.id}", daemon=True).start()
        return {"job": job.to_json()}

    def materialize(self, plan_id: str) -> dict:
        with self.lock:
            item = self.plans.get(plan_id)
        if item is None:
            raise HttpError(404, f"unknown plan {plan_id!r}")
        fid, plan = item
        entry = self.facet(fid)
        g = self.graph(entry.dataset)

        def work(job: Job) -> dict:
            job.phase = "materializing"
            eg = expand(g, entry.lattice, plan)
            with self.lock:
                entry.expanded = eg
            return {
                "facet": fid,
                "planId": plan_id,
                "views": [eg.views[k].to_json() for k in sorted(eg.views)],
                "totalViewTriples": eg.total_view_triples,
                "storageAmplification": eg.storage_amplification(),
            }

        return self._start_job(fid, "materialize", work)

    def view_data(self, view_id: str, fid: str | None, limit: int | None) -> dict:
        with self.lock:
            entries = [e for e in self.facets.values() if e.expanded and view_id in e.expanded.views]
            if fid is not None:
                entries = [e for e in entries if e.id == fid]
        if not entries:
            raise HttpError(404, f"view {view_id!r} is not materialized")
        if len(entries) > 1:
            raise HttpError(400, f"view {view_id!r} is ambiguous; pass ?facet=")
        view = entries[0].expanded.views[view_id]
        return {
            "facet": entries[0].id,
            "id": view_id,
            "groupVars": list(view.group_vars),
            "groupCount": view.group_count,
            "groups": view.sample_groups(limit),
        }

    # -- workloads and bench -------------------------------------------------------

    def create_workload(self, fid: str, count: int, seed: int, filter_probability: float) -> dict:
        entry = self.facet(fid)
        g = self.graph(entry.dataset)
        try:
            spec = bench_mod.WorkloadSpec(count=count, seed=seed, filter_probability=filter_probability)
            workload = bench_mod.generate_workload(entry.facet, g, spec)
        except KgCubeError as exc:
            raise HttpError(422, str(exc)) from exc
        wid = self.next_id("w")
        with self.lock:
            self.workloads[wid] = (fid, workload)
        return {"workloadId": wid, "facet": fid, "queries": [q.to_text() for q in workload]}

    def run_bench(self, fid: str, workload_id: str, configs: list[dict], verify: bool) -> dict:
        entry = self.facet(fid)
        g = self.graph(entry.dataset)
        with self.lock:
            item = self.workloads.get(workload_id)
        if item is None:
            raise HttpError(404, f"unknown workload {workload_id!r}")
        wl_fid, workload = item
        if wl_fid != fid:
            raise HttpError(422, f"workload {workload_id!r} belongs to facet {wl_fid!r}")
        try:
            model_configs = []
            for cfg in configs:
                kind = str(cfg.get("model", "")).lower()
                regressor = self._learned_regressor(entry) if kind == "learned" else None
                model = make_model(
                    kind,
                    seed=int(cfg.get("seed", 0)),
                    views=cfg.get("views"),
                    regressor=regressor,
                )
                k = int(cfg.get("k", len(cfg.get("views") or ())))
                model_configs.append((model, k))
        except KgCubeError as exc:
            raise HttpError(422, str(exc)) from exc

        def work(job: Job) -> dict:
            job.phase = "benching"
            report = bench_mod.run_bench(g, entry.lattice, workload, model_configs, verify=verify)
            report_id = self.next_id("r")
            data = report.to_json()
            data["facet"] = fid
            data["workloadId"] = workload_id
            with self.lock:
                self.reports[report_id] = data
            return {"reportId": report_id, "facet": fid}

        return self._start_job(fid, "bench", work)

    def job(self, job_id: str) -> dict:
        with self.lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise HttpError(404, f"unknown job {job_id!r}")
            return job.to_json()

    def report(self, report_id: str) -> dict:
        with self.lock:
            report = self.reports.get(report_id)
        if report is None:
            raise HttpError(404, f"unknown report {report_id!r}")
        return report


def openapi_document() -> dict:
    with resources.files("kgcube").joinpath("openapi.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


class _Handler(BaseHTTPRequestHandler):
    server_version = "kgcube"
    session: Session
    ui_dir: Path | None = None

    def log_message(self, fmt, *args):  # tests stay quiet
        pass

    # -- plumbing ------------------------------------------------------------

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _read_json(self) -> dict:
        raw = self._read_body()
        if not raw:
            return {}
        try:
            data = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise HttpError(400, f"malformed JSON body: {exc}") from exc
        if not isinstance(data, dict):
            raise HttpError(400, "JSON body must be an object")
        return data

    def _serve_static(self, path: str) -> bool:
        if self.ui_dir is None:
            return False
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            return False
        types = {
            ".html": "text/html",
            ".js": "text/javascript",
            ".css": "text/css",
            ".json": "application/json",
            ".svg": "image/svg+xml",
        }
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", types.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)
        return True

    # -- routing ----------------------------------------------------------------

    def do_GET(self):  # noqa: N802  (http.server naming)
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            if url.path == "/openapi.json":
                self._send_json(200, openapi_document())
            elif parts == ["datasets"]:
                self._send_json(200, self.session.list_datasets())
            elif len(parts) == 2 and parts[0] == "lattice":
                self._send_json(200, self.session.lattice_json(parts[1]))
            elif len(parts) == 3 and parts[0] == "lattice" and parts[2] == "costs":
                model = query.get("model")
                if not model:
                    raise HttpError(400, "missing ?model=")
                self._send_json(200, self.session.costs(parts[1], model, int(query.get("seed", 0))))
            elif len(parts) == 3 and parts[0] == "views" and parts[2] == "data":
                limit = int(query["limit"]) if "limit" in query else None
                self._send_json(200, self.session.view_data(parts[1], query.get("facet"), limit))
            elif len(parts) == 2 and parts[0] == "jobs":
                self._send_json(200, self.session.job(parts[1]))
            elif len(parts) == 2 and parts[0] == "reports":
                self._send_json(200, self.session.report(parts[1]))
            elif self._serve_static(url.path):
                pass
            else:
                raise HttpError(404, f"no such endpoint: GET {url.path}")
        except HttpError as exc:
            self._send_json(exc.status, {"error": exc.message})
        except Exception as exc:  # pragma: no cover - defensive
            self._send_json(500, {"error": str(exc)})

    def do_POST(self):  # noqa: N802
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            if parts == ["datasets"]:
                content_type = (self.headers.get("Content-Type") or "").split(";")[0].strip()
                if content_type == "application/json":
                    body = self._read_json()
                    name = str(body.get("name", ""))
                    ntriples = str(body.get("ntriples", ""))
                else:  # raw N-Triples upload with ?name=
                    name = query.get("name", "")
                    ntriples = self._read_body().decode("utf-8", errors="replace")
                self._send_json(200, self.session.add_dataset(name, ntriples))
            elif parts == ["facets"]:
                body = self._read_json()
                if "dataset" not in body or "query" not in body:
                    raise HttpError(400, "need dataset and query")
                self._send_json(
                    200,
                    self.session.add_facet(
                        body.get("id"), str(body["dataset"]), str(body["query"])
                    ),
                )
            elif parts == ["select"]:
                body = self._read_json()
                fid = body.get("facet")
                if not fid:
                    raise HttpError(400, "need facet")
                self._send_json(200, self.session.select(str(fid), body))
            elif parts == ["materialize"]:
                body = self._read_json()
                plan_id = body.get("planId")
                if not plan_id:
                    raise HttpError(400, "need planId")
                self._send_json(202, self.session.materialize(str(plan_id)))
            elif parts == ["workload"]:
                body = self._read_json()
                fid = body.get("facet")
                if not fid or "count" not in body:
                    raise HttpError(400, "need facet and count")
                self._send_json(
                    200,
                    self.session.create_workload(
                        str(fid),
                        int(body["count"]),
                        int(body.get("seed", 0)),
                        float(body.get("filterProbability", 0.3)),
                    ),
                )
            elif parts == ["bench"]:
                body = self._read_json()
                fid = body.get("facet")
                wid = body.get("workloadId")
                configs = body.get("configs")
                if not fid or not wid or not isinstance(configs, list):
                    raise HttpError(400, "need facet, workloadId and configs[]")
                self._send_json(
                    202, self.session.run_bench(str(fid), str(wid), configs, bool(body.get("verify")))
                )
            else:
                raise HttpError(404, f"no such endpoint: POST {url.path}")
        except HttpError as exc:
            self._send_json(exc.status, {"error": exc.message})
        except Exception as exc:  # pragma: no cover - defensive
            self._send_json(500, {"error": str(exc)})


class Service:
    """Owns the ThreadingHTTPServer plus its session state."""

    def __init__(self, host: str = "127.0.0.1", port: int = 8080, ui_dir: str | None = None):
        self.session = Session()
        handler = type(
            "BoundHandler",
            (_Handler,),
            {"session": self.session, "ui_dir": Path(ui_dir) if ui_dir else None},
        )
        self.server = ThreadingHTTPServer((host, port), handler)

    @property
    def address(self) -> tuple[str, int]:
        return self.server.server_address[:2]

    def serve_forever(self) -> None:
        self.server.serve_forever()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        thread.start()
        return thread

    def shutdown(self) -> None:
        self.server.shutdown()
        self.server.server_close()
