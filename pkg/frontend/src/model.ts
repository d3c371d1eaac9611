// View-model for the lattice diagram: Hasse layout by grouping-set level
// with barycentric crossing reduction, plus per-node cost badges and
// selection/materialization state. Pure data transforms, no DOM.

import type { CostsResponse, LatticeNode, LatticeResponse } from "./api.js";

export interface PositionedNode {
  id: string;
  groupVars: string[];
  level: number;
  isRoot: boolean;
  ancestors: string[];
  x: number;
  y: number;
  materialized: boolean;
  selected: boolean;
  costs: Record<string, number>;
}

export interface LatticeEdge {
  from: string; // coarser node
  to: string; // immediate finer node (one more grouping variable)
}

export interface UiLatticeModel {
  facetId: string;
  facetText: string;
  groupVars: string[];
  nodes: PositionedNode[];
  edges: LatticeEdge[];
  levels: string[][]; // node ids per level, bottom (apex) to top (root)
  width: number;
  height: number;
}

export const LEVEL_SPACING = 110;
export const NODE_SPACING = 150;

/** Node ids grouped by level (level = |groupVars|), ascending. */
export function levelize(nodes: LatticeNode[]): string[][] {
  const byLevel = new Map<number, string[]>();
  for (const node of nodes) {
    if (node.level !== node.groupVars.length) {
      throw new Error(`node ${node.id}: level ${node.level} != |groupVars|`);
    }
    const bucket = byLevel.get(node.level) ?? [];
    bucket.push(node.id);
    byLevel.set(node.level, bucket);
  }
  const levels: string[][] = [];
  for (let depth = 0; byLevel.size > 0; depth++) {
    const bucket = byLevel.get(depth);
    if (bucket === undefined) break;
    levels.push(bucket.sort());
    byLevel.delete(depth);
  }
  if (byLevel.size > 0) {
    throw new Error("levels are not contiguous");
  }
  return levels;
}

/** Edges run only between adjacent levels: node -> each Hasse ancestor. */
export function hasseEdges(nodes: LatticeNode[]): LatticeEdge[] {
  const levelOf = new Map(nodes.map((n) => [n.id, n.level]));
  const edges: LatticeEdge[] = [];
  for (const node of nodes) {
    for (const ancestor of node.ancestors) {
      const ancestorLevel = levelOf.get(ancestor);
      if (ancestorLevel === undefined || ancestorLevel !== node.level + 1) {
        throw new Error(`edge ${node.id} -> ${ancestor} does not span adjacent levels`);
      }
      edges.push({ from: node.id, to: ancestor });
    }
  }
  return edges;
}

function barycentricOrder(levels: string[][], edges: LatticeEdge[], passes = 4): string[][] {
  const ordered = levels.map((ids) => [...ids]);
  const up = new Map<string, string[]>(); // coarser -> finer neighbours
  const down = new Map<string, string[]>();
  for (const edge of edges) {
    (up.get(edge.from) ?? up.set(edge.from, []).get(edge.from)!).push(edge.to);
    (down.get(edge.to) ?? down.set(edge.to, []).get(edge.to)!).push(edge.from);
  }
  const slotOf = (ids: string[]) => new Map(ids.map((id, i) => [id, i]));
  for (let pass = 0; pass < passes; pass++) {
    const neighbours = pass % 2 === 0 ? down : up;
    const direction = pass % 2 === 0 ? 1 : -1;
    const indices = [...ordered.keys()];
    if (direction < 0) indices.reverse();
    for (const levelIdx of indices) {
      const reference = ordered[levelIdx + direction];
      if (!reference) continue;
      const refSlots = slotOf(reference);
      ordered[levelIdx] = [...ordered[levelIdx]].sort((a, b) => {
        const center = (id: string) => {
          const adj = (neighbours.get(id) ?? []).map((n) => refSlots.get(n) ?? 0);
          return adj.length ? adj.reduce((s, v) => s + v, 0) / adj.length : refSlots.size / 2;
        };
        const diff = center(a) - center(b);
        return diff !== 0 ? diff : a < b ? -1 : 1;
      });
    }
  }
  return ordered;
}

export function buildLatticeModel(
  lattice: LatticeResponse,
  costModels: CostsResponse[] = [],
  selected: string[] = [],
): UiLatticeModel {
  const levels = levelize(lattice.nodes);
  const edges = hasseEdges(lattice.nodes);
  const ordered = barycentricOrder(levels, edges);
  const widest = Math.max(...ordered.map((ids) => ids.length));
  const width = Math.max(1, widest) * NODE_SPACING;
  const height = ordered.length * LEVEL_SPACING;
  const materialized = new Set(lattice.materialized);
  const selectedSet = new Set(selected);

  const positions = new Map<string, { x: number; y: number }>();
  ordered.forEach((ids, level) => {
    ids.forEach((id, slot) => {
      positions.set(id, {
        x: (slot - (ids.length - 1) / 2) * NODE_SPACING + width / 2,
        y: height - (level + 0.5) * LEVEL_SPACING,
      });
    });
  });

  const costByNode = new Map<string, Record<string, number>>();
  for (const response of costModels) {
    for (const [nodeId, value] of Object.entries(response.costs)) {
      const bucket = costByNode.get(nodeId) ?? {};
      bucket[response.model] = value; // verbatim server numbers
      costByNode.set(nodeId, bucket);
    }
  }

  const nodes: PositionedNode[] = lattice.nodes.map((node) => ({
    id: node.id,
    groupVars: node.groupVars,
    level: node.level,
    isRoot: node.isRoot,
    ancestors: node.ancestors,
    ...positions.get(node.id)!,
    materialized: materialized.has(node.id),
    selected: selectedSet.has(node.id),
    costs: costByNode.get(node.id) ?? {},
  }));

  return {
    facetId: lattice.id,
    facetText: lattice.facet.text,
    groupVars: lattice.facet.groupVars,
    nodes,
    edges,
    levels: ordered,
    width,
    height,
  };
}

/** Toggle a node in a selection, respecting the budget and the root ban. */
export function toggleSelection(
  model: UiLatticeModel,
  current: string[],
  nodeId: string,
  budget: number,
): { selection: string[]; blocked?: string } {
  const node = model.nodes.find((n) => n.id === nodeId);
  if (!node) return { selection: current, blocked: `unknown node ${nodeId}` };
  if (node.isRoot) return { selection: current, blocked: "the root is the base graph and cannot be materialized" };
  if (current.includes(nodeId)) {
    return { selection: current.filter((id) => id !== nodeId) };
  }
  if (current.length >= budget) {
    return { selection: current, blocked: `budget is ${budget} views` };
  }
  return { selection: [...current, nodeId] };
}

export interface NodePanel {
  id: string;
  queryText: string | null;
  costs: Record<string, number>;
  materialized: boolean;
  groups: import("./api.js").GroupRecord[] | null;
}

/** Side-panel content for a clicked node; group records pass through verbatim. */
export function buildNodePanel(
  model: UiLatticeModel,
  nodeId: string,
  viewData: import("./api.js").ViewDataResponse | null,
): NodePanel {
  const node = model.nodes.find((n) => n.id === nodeId);
  if (!node) throw new Error(`unknown node ${nodeId}`);
  return {
    id: node.id,
    queryText: node.isRoot ? model.facetText : null,
    costs: node.costs,
    materialized: node.materialized,
    groups: viewData ? viewData.groups : null,
  };
}
