// @vitest-environment jsdom
// DOM-level smoke of the app: the lattice renders all nodes, clicking a
// materialized node fills the inspector with the served group records, and
// the run button submits the user selection.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, type LatticeResponse, type PlanResponse, type ViewDataResponse } from "../src/api.js";
import { App } from "../src/app.js";
import { fixture, mockFetch } from "./helpers.js";

const lattice = fixture<LatticeResponse>("lattice");
const viewL = fixture<ViewDataResponse>("view_l_data");
const selectUser = fixture<PlanResponse>("select_user");

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

describe("App (DOM)", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
    window.location.hash = "";
  });

  it("renders 8 clickable nodes in 4 levels for the example facet", async () => {
    const { fetch } = mockFetch({ "GET /lattice/pop": lattice });
    window.location.hash = "#facet=pop&k=2";
    const app = new App(new ApiClient("", fetch), root);
    await app.start();
    await flush();
    const nodes = root.querySelectorAll("g.node");
    expect(nodes).toHaveLength(8);
    const ys = new Set<string>();
    for (const g of nodes) {
      const transform = g.getAttribute("transform")!;
      ys.add(transform.split(",")[1]);
    }
    expect(ys.size).toBe(4);
    expect(root.querySelectorAll("line.edge")).toHaveLength(12);
    expect(root.querySelectorAll("g.node.materialized")).toHaveLength(2);
  });

  it("shows a materialized node's group records after a click", async () => {
    const { fetch } = mockFetch({
      "GET /lattice/pop": lattice,
      "GET /views/l/data?facet=pop&limit=50": viewL,
    });
    window.location.hash = "#facet=pop&k=2";
    const app = new App(new ApiClient("", fetch), root);
    await app.start();
    await flush();
    const nodeL = root.querySelector('g[data-node="l"]')!;
    nodeL.dispatchEvent(new window.Event("click", { bubbles: true }));
    await flush();
    await flush();
    const cells = [...root.querySelectorAll(".panel .groups td")].map((td) => td.textContent);
    expect(cells).toContain("26");
    expect(cells).toContain("6");
    expect(cells).toContain("http://example.org/French");
  });

  it("submits the hand-picked selection and charts the report", async () => {
    const job = (id: string, kind: string, result: object | null) => ({
      id, facet: "pop", kind, phase: result ? "done" : "running",
      progress: result ? 1 : 0.5, error: null, result,
    });
    const { fetch, requests } = mockFetch({
      "GET /lattice/pop": lattice,
      "POST /select": selectUser,
      "POST /materialize": { job: job("m1", "materialize", null) },
      "GET /jobs/m1": job("m1", "materialize", {}),
      "POST /workload": { workloadId: "w1", facet: "pop", queries: [] },
      "POST /bench": { job: job("b1", "bench", null) },
      "GET /jobs/b1": job("b1", "bench", { reportId: "r1" }),
      "GET /reports/r1": fixture("report"),
    });
    window.location.hash = "#facet=pop&sel=c,l&k=2";
    const app = new App(new ApiClient("", fetch), root);
    await app.start();
    await flush();
    expect(root.querySelectorAll("g.node.selected")).toHaveLength(2);
    const button = root.querySelector("#run-selection") as HTMLButtonElement;
    button.dispatchEvent(new window.Event("click", { bubbles: true }));
    for (let i = 0; i < 40 && !requests.some((r) => r.path === "/reports/r1"); i++) {
      await flush();
    }
    await flush();
    const select = requests.find((r) => r.path === "/select");
    expect(select).toBeDefined();
    expect(select!.body).toEqual({ facet: "pop", model: "user", views: ["c", "l"], k: 2 });
    // one chart point per report configuration, the user's highlighted
    const dots = root.querySelectorAll(".tradeoff .dot");
    expect(dots.length).toBeGreaterThan(0);
    expect(root.querySelectorAll(".tradeoff .dot.highlighted")).toHaveLength(1);
    expect(root.querySelector(".status .error")).toBeNull();
  });
});
