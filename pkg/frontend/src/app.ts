// DOM wiring: lattice diagram, node inspector, hand-picked selection under a
// budget, and the latency-vs-amplification chart.

import { ApiClient, ApiError, type CostsResponse, type LatticeResponse, type ViewDataResponse } from "./api.js";
import {
  buildLatticeModel,
  buildNodePanel,
  toggleSelection,
  type UiLatticeModel,
} from "./model.js";
import { pollJob } from "./poll.js";
import { appendReport, chartCoordinates, emptyTradeoff, type TradeoffViewModel } from "./tradeoff.js";
import { DEFAULT_BUDGET, decodeState, encodeState, type UrlState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const COST_MODELS = ["triples", "aggvalues", "nodes", "random", "learned"];

interface AppState extends UrlState {
  lattice: LatticeResponse | null;
  costResponses: CostsResponse[];
  tradeoff: TradeoffViewModel;
  workloadId: string | null;
  busy: string | null;
  error: string | null;
}

export class App {
  private state: AppState = {
    facet: null,
    selected: [],
    budget: DEFAULT_BUDGET,
    node: null,
    lattice: null,
    costResponses: [],
    tradeoff: emptyTradeoff(),
    workloadId: null,
    busy: null,
    error: null,
  };
  private model: UiLatticeModel | null = null;
  private viewDataCache = new Map<string, ViewDataResponse>();

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    const fromUrl = decodeState(window.location.hash);
    this.state = { ...this.state, ...fromUrl };
    window.addEventListener("hashchange", () => {
      const next = decodeState(window.location.hash);
      if (next.facet !== this.state.facet) {
        this.state = { ...this.state, ...next };
        void this.loadFacet();
      }
    });
    this.render();
    if (this.state.facet) await this.loadFacet();
  }

  private syncUrl(): void {
    window.history.replaceState(null, "", encodeState(this.state));
  }

  private async run<T>(label: string, work: () => Promise<T>): Promise<T | undefined> {
    this.state.busy = label;
    this.state.error = null;
    this.render();
    try {
      return await work();
    } catch (err) {
      this.state.error = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
      return undefined;
    } finally {
      this.state.busy = null;
      this.render();
    }
  }

  private async loadFacet(): Promise<void> {
    const facet = this.state.facet;
    if (!facet) return;
    await this.run(`loading lattice ${facet}`, async () => {
      this.state.lattice = await this.api.lattice(facet);
      this.state.costResponses = [];
      this.viewDataCache.clear();
      this.rebuildModel();
    });
  }

  private rebuildModel(): void {
    this.model = this.state.lattice
      ? buildLatticeModel(this.state.lattice, this.state.costResponses, this.state.selected)
      : null;
  }

  private async toggleCostModel(kind: string, enabled: boolean): Promise<void> {
    if (!this.state.facet) return;
    if (!enabled) {
      this.state.costResponses = this.state.costResponses.filter((c) => c.model !== kind);
      this.rebuildModel();
      this.render();
      return;
    }
    if (this.state.costResponses.some((c) => c.model === kind)) return;
    await this.run(`computing ${kind} costs`, async () => {
      const costs = await this.api.costs(this.state.facet!, kind);
      this.state.costResponses = [...this.state.costResponses, costs];
      this.rebuildModel();
    });
  }

  private onNodeClick(nodeId: string): void {
    this.state.node = this.state.node === nodeId ? null : nodeId;
    this.syncUrl();
    this.render();
    const node = this.model?.nodes.find((n) => n.id === nodeId);
    if (node?.materialized && !this.viewDataCache.has(nodeId)) {
      void this.run(`fetching ${nodeId} data`, async () => {
        const data = await this.api.viewData(nodeId, this.state.facet!, 50);
        this.viewDataCache.set(nodeId, data);
      });
    }
  }

  private onNodeToggleSelect(nodeId: string): void {
    if (!this.model) return;
    const { selection, blocked } = toggleSelection(
      this.model,
      this.state.selected,
      nodeId,
      this.state.budget,
    );
    this.state.selected = selection;
    this.state.error = blocked ?? null;
    this.syncUrl();
    this.rebuildModel();
    this.render();
  }

  private async runSelection(): Promise<void> {
    const facet = this.state.facet;
    if (!facet) return;
    await this.run("materialize + bench", async () => {
      const picked = await this.api.select(facet, {
        model: "user",
        views: this.state.selected,
        k: this.state.budget,
      });
      const job = await this.api.materialize(picked.planId);
      await pollJob(this.api, job.job.id);
      if (!this.state.workloadId) {
        const workload = await this.api.createWorkload(facet, 30, 7);
        this.state.workloadId = workload.workloadId;
      }
      const benchJob = await this.api.bench(
        facet,
        this.state.workloadId,
        [{ model: "user", views: this.state.selected, k: this.state.budget }],
        true,
      );
      const done = await pollJob(this.api, benchJob.job.id);
      const reportId = (done.result as { reportId: string }).reportId;
      const report = await this.api.report(reportId);
      const userLabel = report.configurations.find((c) => c.model === "user")?.label;
      this.state.tradeoff = appendReport(this.state.tradeoff, report, userLabel);
      this.state.lattice = await this.api.lattice(facet);
      this.rebuildModel();
    });
  }

  // -- rendering -------------------------------------------------------------

  private render(): void {
    this.root.replaceChildren(
      this.renderHeader(),
      this.renderStatus(),
      this.renderBody(),
      this.renderTradeoff(),
    );
  }

  private renderHeader(): HTMLElement {
    const header = el("header", { class: "topbar" });
    header.append(el("h1", {}, "view lattice explorer"));
    const facetInput = el("input", {
      id: "facet-input",
      placeholder: "facet id",
      value: this.state.facet ?? "",
    }) as HTMLInputElement;
    const loadBtn = el("button", {}, "load facet");
    loadBtn.addEventListener("click", () => {
      this.state.facet = facetInput.value.trim() || null;
      this.state.selected = [];
      this.state.node = null;
      this.syncUrl();
      void this.loadFacet();
    });
    const budget = el("input", {
      id: "budget-input",
      type: "number",
      min: "1",
      value: String(this.state.budget),
      title: "budget k",
    }) as HTMLInputElement;
    budget.addEventListener("change", () => {
      this.state.budget = Math.max(1, Number(budget.value) || DEFAULT_BUDGET);
      this.syncUrl();
      this.render();
    });
    header.append(facetInput, loadBtn, el("label", {}, "budget k:"), budget);
    for (const kind of COST_MODELS) {
      const box = el("input", { type: "checkbox", id: `cost-${kind}` }) as HTMLInputElement;
      box.checked = this.state.costResponses.some((c) => c.model === kind);
      box.addEventListener("change", () => void this.toggleCostModel(kind, box.checked));
      header.append(box, el("label", { for: `cost-${kind}` }, kind));
    }
    return header;
  }

  private renderStatus(): HTMLElement {
    const bar = el("div", { class: "status" });
    if (this.state.busy) bar.append(el("span", { class: "busy" }, `working: ${this.state.busy}`));
    if (this.state.error) bar.append(el("span", { class: "error" }, this.state.error));
    return bar;
  }

  private renderBody(): HTMLElement {
    const body = el("div", { class: "body" });
    body.append(this.renderLattice(), this.renderPanel());
    return body;
  }

  private renderLattice(): HTMLElement {
    const container = el("div", { class: "lattice" });
    if (!this.model) {
      container.append(el("p", {}, "load a facet to explore its lattice"));
      return container;
    }
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${this.model.width} ${this.model.height}`);
    svg.setAttribute("width", String(this.model.width));
    svg.setAttribute("height", String(this.model.height));
    const byId = new Map(this.model.nodes.map((n) => [n.id, n]));
    for (const edge of this.model.edges) {
      const a = byId.get(edge.from)!;
      const b = byId.get(edge.to)!;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.setAttribute("class", "edge");
      svg.append(line);
    }
    for (const node of this.model.nodes) {
      const g = document.createElementNS(SVG_NS, "g");
      g.setAttribute("transform", `translate(${node.x},${node.y})`);
      g.setAttribute("data-node", node.id);
      const classes = ["node"];
      if (node.isRoot) classes.push("root");
      if (node.materialized) classes.push("materialized");
      if (node.selected) classes.push("selected");
      g.setAttribute("class", classes.join(" "));
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("r", "26");
      g.append(circle);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("class", "label");
      label.textContent = node.id;
      g.append(label);
      const badges = Object.entries(node.costs);
      badges.forEach(([model, value], i) => {
        const badge = document.createElementNS(SVG_NS, "text");
        badge.setAttribute("class", "badge");
        badge.setAttribute("y", String(40 + 14 * i));
        badge.textContent = `${model}: ${value}`;
        g.append(badge);
      });
      g.addEventListener("click", () => this.onNodeClick(node.id));
      g.addEventListener("dblclick", () => this.onNodeToggleSelect(node.id));
      if (!node.isRoot) {
        g.addEventListener("contextmenu", (event) => {
          event.preventDefault();
          this.onNodeToggleSelect(node.id);
        });
      }
      svg.append(g);
    }
    container.append(svg);
    const hint = el(
      "p",
      { class: "hint" },
      "click: inspect; double-click / right-click: toggle for materialization",
    );
    container.append(hint);
    const runBtn = el("button", { id: "run-selection" }, `materialize + bench ${this.state.selected.length} view(s)`) as HTMLButtonElement;
    runBtn.disabled = this.state.busy !== null;
    runBtn.addEventListener("click", () => void this.runSelection());
    container.append(runBtn);
    return container;
  }

  private renderPanel(): HTMLElement {
    const panel = el("aside", { class: "panel" });
    if (!this.model || !this.state.node) {
      panel.append(el("p", {}, "select a node to inspect it"));
      return panel;
    }
    const data = this.viewDataCache.get(this.state.node) ?? null;
    const info = buildNodePanel(this.model, this.state.node, data);
    panel.append(el("h2", {}, info.id));
    panel.append(el("p", {}, info.materialized ? "materialized" : "not materialized"));
    if (info.queryText) panel.append(el("pre", {}, info.queryText));
    const costList = el("ul", { class: "costs" });
    for (const [model, value] of Object.entries(info.costs)) {
      costList.append(el("li", {}, `${model}: ${value}`));
    }
    panel.append(costList);
    if (info.groups) {
      const table = el("table", { class: "groups" });
      const header = el("tr", {});
      const groupVars = this.model.nodes.find((n) => n.id === info.id)!.groupVars;
      for (const v of groupVars) header.append(el("th", {}, v));
      header.append(el("th", {}, "sum"), el("th", {}, "count"));
      table.append(header);
      for (const record of info.groups) {
        const row = el("tr", {});
        for (const v of groupVars) row.append(el("td", {}, record.key[v]?.lexical ?? ""));
        row.append(el("td", {}, String(record.sum)), el("td", {}, String(record.count)));
        table.append(row);
      }
      panel.append(el("h3", {}, `groups (${info.groups.length})`), table);
    }
    return panel;
  }

  private renderTradeoff(): HTMLElement {
    const section = el("section", { class: "tradeoff" });
    section.append(el("h2", {}, "query time vs storage amplification"));
    const width = 640;
    const height = 320;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    for (const { point, cx, cy } of chartCoordinates(this.state.tradeoff, width, height)) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(cx));
      dot.setAttribute("cy", String(cy));
      dot.setAttribute("r", point.highlighted ? "8" : "5");
      dot.setAttribute("class", point.highlighted ? "dot highlighted" : "dot");
      const tip = document.createElementNS(SVG_NS, "title");
      tip.textContent =
        `${point.label}: amp ${point.storageAmplification}, mean ${point.meanNs}ns, ` +
        `speedup ${point.speedupVsBase}, views ${point.viewAnswered}/${point.workloadSize}`;
      dot.append(tip);
      svg.append(dot);
    }
    section.append(svg);
    const list = el("ol", { class: "points" });
    for (const point of this.state.tradeoff.points) {
      list.append(
        el(
          "li",
          { class: point.highlighted ? "highlighted" : "" },
          `${point.label} - amplification ${point.storageAmplification}, mean ${point.meanNs} ns`,
        ),
      );
    }
    section.append(list);
    return section;
  }
}

function el(tag: string, attrs: Record<string, string> = {}, text?: string): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}
