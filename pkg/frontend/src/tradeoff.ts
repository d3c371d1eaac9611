// Trade-off chart view-model: one point per bench configuration, every value
// copied verbatim from the report (the UI does no aggregation math).

import type { BenchReport } from "./api.js";

export interface TradeoffPoint {
  label: string;
  model: string | null;
  k: number | null;
  storageAmplification: number;
  meanNs: number;
  speedupVsBase: number;
  viewAnswered: number;
  workloadSize: number;
  highlighted: boolean;
}

export interface TradeoffViewModel {
  points: TradeoffPoint[];
}

export function emptyTradeoff(): TradeoffViewModel {
  return { points: [] };
}

/** Append one report's configurations; earlier points survive so successive
 * attempts stay comparable. The user's own configuration is highlighted. */
export function appendReport(
  current: TradeoffViewModel,
  report: BenchReport,
  highlightLabel?: string,
): TradeoffViewModel {
  const points = [...current.points.map((p) => ({ ...p, highlighted: false }))];
  for (const config of report.configurations) {
    points.push({
      label: config.label,
      model: config.model,
      k: config.k,
      storageAmplification: config.storageAmplification,
      meanNs: config.meanNs,
      speedupVsBase: config.speedupVsBase,
      viewAnswered: config.viewAnswered,
      workloadSize: report.workloadSize,
      highlighted: highlightLabel !== undefined && config.label === highlightLabel,
    });
  }
  return { points };
}

/** Scale points into chart coordinates (presentation only). */
export function chartCoordinates(
  vm: TradeoffViewModel,
  width: number,
  height: number,
  margin = 40,
): { point: TradeoffPoint; cx: number; cy: number }[] {
  if (vm.points.length === 0) return [];
  const amps = vm.points.map((p) => p.storageAmplification);
  const lats = vm.points.map((p) => p.meanNs);
  const maxAmp = Math.max(...amps, 1e-12);
  const maxLat = Math.max(...lats, 1);
  return vm.points.map((point) => ({
    point,
    cx: margin + (point.storageAmplification / maxAmp) * (width - 2 * margin),
    cy: height - margin - (point.meanNs / maxLat) * (height - 2 * margin),
  }));
}
