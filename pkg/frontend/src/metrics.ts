// Dashboard data shaping: SVG polyline scaling for the accuracy /
// incompleteness / utility series and the per-group TPR table rows.

import type { MetricsResponse } from './api.js';

export interface ChartGeometry {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = { width: 320, height: 120, pad: 10 };

export interface ChartPoint {
  x: number;
  y: number;
}

/**
 * Scale (t, value) pairs into pixel points. A single sample degrades to
 * one centered point instead of an error.
 */
export function scaleSeries(
  pairs: Array<[number, number]>,
  geometry: ChartGeometry = DEFAULT_GEOMETRY,
): ChartPoint[] {
  if (pairs.length === 0) return [];
  const { width, height, pad } = geometry;
  const xs = pairs.map((p) => p[0]);
  const ys = pairs.map((p) => p[1]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  return pairs.map(([x, y]) => ({
    x: pad + ((x - xMin) / xSpan) * (width - 2 * pad),
    y: height - pad - ((y - yMin) / ySpan) * (height - 2 * pad),
  }));
}

export function polylinePoints(points: ChartPoint[]): string {
  return points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(' ');
}

/** Groups pinned to the familiar four-row disparity layout, extras after. */
export const TPR_ROW_ORDER = ['woman', 'man', 'transwoman', 'transman'];

export interface TprRow {
  group: string;
  tpr: number;
}

export function tprRows(tprByGroup: Record<string, number>): TprRow[] {
  const pinned = TPR_ROW_ORDER.filter((g) => g in tprByGroup).map((g) => ({
    group: g,
    tpr: tprByGroup[g],
  }));
  const extras = Object.keys(tprByGroup)
    .filter((g) => !TPR_ROW_ORDER.includes(g))
    .sort()
    .map((g) => ({ group: g, tpr: tprByGroup[g] }));
  return [...pinned, ...extras];
}

export function formatPercent(value: number): string {
  return (value * 100).toFixed(1) + '%';
}

export interface SeriesSpec {
  name: string;
  pairs: Array<[number, number]>;
}

export function seriesFrom(metrics: MetricsResponse): SeriesSpec[] {
  return [
    { name: 'accuracy', pairs: metrics.series.map((s) => [s.t, s.accuracy]) },
    { name: 'incompleteness', pairs: metrics.series.map((s) => [s.t, s.incompleteness]) },
    { name: 'utility', pairs: metrics.series.map((s) => [s.t, s.utility]) },
  ];
}

export function hasData(metrics: MetricsResponse): boolean {
  return metrics.series.length > 0 || Object.keys(metrics.tpr_by_group).length > 0;
}
