// UI state in the URL hash so every screen is reachable after a refresh.

export interface UrlState {
  facet: string | null;
  selected: string[];
  budget: number;
  node: string | null; // open side panel
}

export const DEFAULT_BUDGET = 2;

export function decodeState(hash: string): UrlState {
  const params = new URLSearchParams(hash.startsWith("#") ? hash.slice(1) : hash);
  const selected = (params.get("sel") ?? "").split(",").filter((s) => s.length > 0);
  const budget = Number(params.get("k") ?? DEFAULT_BUDGET);
  return {
    facet: params.get("facet"),
    selected,
    budget: Number.isFinite(budget) && budget > 0 ? Math.floor(budget) : DEFAULT_BUDGET,
    node: params.get("node"),
  };
}

export function encodeState(state: UrlState): string {
  const params = new URLSearchParams();
  if (state.facet) params.set("facet", state.facet);
  if (state.selected.length) params.set("sel", state.selected.join(","));
  params.set("k", String(state.budget));
  if (state.node) params.set("node", state.node);
  return "#" + params.toString();
}
