// Typed client for the kgcube HTTP/JSON service. Every number shown in the
// UI comes verbatim from these responses; the client never recomputes
// aggregates.

export interface DatasetInfo {
  name: string;
  triples: number;
  terms: number;
}

export interface FacetInfo {
  groupVars: string[];
  aggregate: string;
  aggregateVar: string;
  patternSize: number;
  text: string;
}

export interface LatticeNode {
  id: string;
  groupVars: string[];
  level: number;
  isRoot: boolean;
  ancestors: string[];
}

export interface LatticeResponse {
  id: string;
  dataset: string;
  facet: FacetInfo;
  nodes: LatticeNode[];
  materialized: string[];
}

export interface CostsResponse {
  facet: string;
  model: string;
  costs: Record<string, number>;
}

export interface SelectionStep {
  chosen: string;
  benefit: number;
}

export interface PlanResponse {
  planId: string;
  facet: string;
  plan: {
    chosen: string[];
    budget: number;
    model: string;
    perStep: SelectionStep[];
    totalEstimatedCost: number;
  };
}

export interface JobInfo {
  id: string;
  facet: string;
  kind: string;
  phase: string;
  progress: number;
  error: string | null;
  result: Record<string, unknown> | null;
}

export interface GroupRecord {
  key: Record<string, { kind: string; lexical: string; datatype?: string; lang?: string }>;
  sum: number;
  count: number;
  min?: number;
  max?: number;
}

export interface ViewDataResponse {
  facet: string;
  id: string;
  groupVars: string[];
  groupCount: number;
  groups: GroupRecord[];
}

export interface WorkloadResponse {
  workloadId: string;
  facet: string;
  queries: string[];
}

export interface BenchConfigResult {
  label: string;
  model: string | null;
  k: number | null;
  meanNs: number;
  medianNs: number;
  p95Ns: number;
  speedupVsBase: number;
  storageAmplification: number;
  selectionNs: number;
  materializationNs: number;
  viewAnswered: number;
  perQuery: { index: number; timeNs: number; source: string; rows: number }[];
}

export interface BenchReport {
  schemaVersion: number;
  workloadSize: number;
  verified: boolean;
  configurations: BenchConfigResult[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

/** Thin wrapper so tests can inject a recording/mock fetch. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (i, init) => fetch(i, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const data = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, (data as { error?: string }).error ?? resp.statusText);
    }
    return data as T;
  }

  listDatasets(): Promise<{ datasets: DatasetInfo[] }> {
    return this.request("GET", "/datasets");
  }

  uploadDataset(name: string, ntriples: string): Promise<{ name: string }> {
    return this.request("POST", "/datasets", { name, ntriples });
  }

  createFacet(dataset: string, query: string, id?: string): Promise<{ id: string }> {
    return this.request("POST", "/facets", { id, dataset, query });
  }

  lattice(facetId: string): Promise<LatticeResponse> {
    return this.request("GET", `/lattice/${encodeURIComponent(facetId)}`);
  }

  costs(facetId: string, model: string, seed = 0): Promise<CostsResponse> {
    return this.request(
      "GET",
      `/lattice/${encodeURIComponent(facetId)}/costs?model=${encodeURIComponent(model)}&seed=${seed}`,
    );
  }

  select(
    facetId: string,
    body: { model: string; k?: number; seed?: number; views?: string[] },
  ): Promise<PlanResponse> {
    return this.request("POST", "/select", { facet: facetId, ...body });
  }

  materialize(planId: string): Promise<{ job: JobInfo }> {
    return this.request("POST", "/materialize", { planId });
  }

  viewData(viewId: string, facetId: string, limit?: number): Promise<ViewDataResponse> {
    const suffix = limit === undefined ? "" : `&limit=${limit}`;
    return this.request(
      "GET",
      `/views/${encodeURIComponent(viewId)}/data?facet=${encodeURIComponent(facetId)}${suffix}`,
    );
  }

  createWorkload(facetId: string, count: number, seed: number): Promise<WorkloadResponse> {
    return this.request("POST", "/workload", { facet: facetId, count, seed });
  }

  bench(
    facetId: string,
    workloadId: string,
    configs: { model: string; k?: number; seed?: number; views?: string[] }[],
    verify = false,
  ): Promise<{ job: JobInfo }> {
    return this.request("POST", "/bench", { facet: facetId, workloadId, configs, verify });
  }

  job(jobId: string): Promise<JobInfo> {
    return this.request("GET", `/jobs/${encodeURIComponent(jobId)}`);
  }

  report(reportId: string): Promise<BenchReport> {
    return this.request("GET", `/reports/${encodeURIComponent(reportId)}`);
  }
}
