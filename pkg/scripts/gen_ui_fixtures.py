#!/usr/bin/env python3
"""Capture live service responses as fixtures for the frontend tests.

Run from the repository root after installing the package:

    python scripts/gen_ui_fixtures.py

Rewrites frontend/test/fixtures/*.json so the UI tests assert against the
actual wire format.
"""

import json
import sys
import time
from http.client import HTTPConnection
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import FIXPOP_FACET_TEXT, FIXPOP_NT  # noqa: E402

from kgcube.service import Service  # noqa: E402

OUT_DIR = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"


def main() -> None:
    service = Service(host="127.0.0.1", port=0)
    service.start_background()
    host, port = service.address

    def call(method: str, path: str, body=None):
        conn = HTTPConnection(host, port, timeout=30)
        payload = json.dumps(body) if body is not None else None
        headers = {"Content-Type": "application/json"} if payload else {}
        conn.request(method, path, body=payload, headers=headers)
        resp = conn.getresponse()
        data = json.loads(resp.read().decode("utf-8"))
        conn.close()
        assert resp.status < 400, (path, resp.status, data)
        return data

    def wait_job(job_id: str):
        while True:
            job = call("GET", f"/jobs/{job_id}")
            if job["phase"] in ("done", "failed"):
                assert job["phase"] == "done", job
                return job
            time.sleep(0.02)

    call("POST", "/datasets", {"name": "fixpop", "ntriples": FIXPOP_NT})
    call("POST", "/facets", {"id": "pop", "dataset": "fixpop", "query": FIXPOP_FACET_TEXT})

    fixtures: dict[str, object] = {}
    fixtures["costs_aggvalues"] = call("GET", "/lattice/pop/costs?model=aggvalues")
    fixtures["costs_triples"] = call("GET", "/lattice/pop/costs?model=triples")

    select_user = call("POST", "/select", {"facet": "pop", "model": "user", "views": ["c", "l"], "k": 2})
    fixtures["select_user"] = select_user
    job = call("POST", "/materialize", {"planId": select_user["planId"]})
    wait_job(job["job"]["id"])

    fixtures["lattice"] = call("GET", "/lattice/pop")
    fixtures["view_l_data"] = call("GET", "/views/l/data?facet=pop&limit=10")

    workload = call("POST", "/workload", {"facet": "pop", "count": 12, "seed": 3})
    fixtures["workload"] = workload
    job = call(
        "POST",
        "/bench",
        {
            "facet": "pop",
            "workloadId": workload["workloadId"],
            "verify": True,
            "configs": [
                {"model": "user", "views": ["c", "l"], "k": 2},
                {"model": "aggvalues", "k": 2},
            ],
        },
    )
    done = wait_job(job["job"]["id"])
    fixtures["report"] = call("GET", f"/reports/{done['result']['reportId']}")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, data in fixtures.items():
        path = OUT_DIR / f"{name}.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {path}")

    service.shutdown()


if __name__ == "__main__":
    main()
