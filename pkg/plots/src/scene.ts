/** Chart construction: figures are built as a flat list of drawing
 * primitives so the SVG writer and the PNG rasterizer render identical
 * geometry. All layout is deterministic. */

import { ecdf, formatTick, ticks } from "./ecdf";

export type Prim =
  | { kind: "rect"; x: number; y: number; w: number; h: number; color: string }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; color: string; width: number }
  | { kind: "polyline"; points: [number, number][]; color: string; width: number }
  | { kind: "text"; x: number; y: number; text: string; color: string; anchor: "start" | "middle" | "end" };

export interface Scene {
  width: number;
  height: number;
  prims: Prim[];
}

export const ALGORITHM_COLORS: Record<string, string> = {
  centralized: "#1f77b4",
  distributed: "#2ca02c",
  maxrate: "#d62728",
};

const FG = "#222222";
const GRID = "#cccccc";

function color_of(name: string, fallbackIndex: number): string {
  const extra = ["#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
  return ALGORITHM_COLORS[name] ?? extra[fallbackIndex % extra.length];
}

interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
  xlo: number;
  xhi: number;
  ylo: number;
  yhi: number;
}

function sx(f: Frame, x: number): number {
  return f.x0 + ((x - f.xlo) / (f.xhi - f.xlo)) * f.w;
}

function sy(f: Frame, y: number): number {
  return f.y0 + f.h - ((y - f.ylo) / (f.yhi - f.ylo)) * f.h;
}

function axes(prims: Prim[], f: Frame, title: string, xlabel: string, ylabel: string,
              xticks: number[], yticks: number[]): void {
  prims.push({ kind: "rect", x: f.x0, y: f.y0, w: f.w, h: f.h, color: "#ffffff" });
  for (const t of xticks) {
    const x = sx(f, t);
    prims.push({ kind: "line", x1: x, y1: f.y0, x2: x, y2: f.y0 + f.h, color: GRID, width: 1 });
    prims.push({ kind: "text", x, y: f.y0 + f.h + 18, text: formatTick(t), color: FG, anchor: "middle" });
  }
  for (const t of yticks) {
    const y = sy(f, t);
    prims.push({ kind: "line", x1: f.x0, y1: y, x2: f.x0 + f.w, y2: y, color: GRID, width: 1 });
    prims.push({ kind: "text", x: f.x0 - 8, y: y + 4, text: formatTick(t), color: FG, anchor: "end" });
  }
  prims.push({ kind: "line", x1: f.x0, y1: f.y0 + f.h, x2: f.x0 + f.w, y2: f.y0 + f.h, color: FG, width: 1 });
  prims.push({ kind: "line", x1: f.x0, y1: f.y0, x2: f.x0, y2: f.y0 + f.h, color: FG, width: 1 });
  prims.push({ kind: "text", x: f.x0 + f.w / 2, y: 22, text: title, color: FG, anchor: "middle" });
  prims.push({ kind: "text", x: f.x0 + f.w / 2, y: f.y0 + f.h + 38, text: xlabel, color: FG, anchor: "middle" });
  prims.push({ kind: "text", x: f.x0 - 55, y: f.y0 - 10, text: ylabel, color: FG, anchor: "start" });
}

function legend(prims: Prim[], f: Frame, entries: [string, string][]): void {
  let y = f.y0 + 16;
  for (const [name, color] of entries) {
    prims.push({ kind: "line", x1: f.x0 + 12, y1: y - 4, x2: f.x0 + 44, y2: y - 4, color, width: 3 });
    prims.push({ kind: "text", x: f.x0 + 50, y, text: name, color: FG, anchor: "start" });
    y += 18;
  }
}

function stepPoints(pts: { x: number; y: number }[]): [number, number][] {
  const out: [number, number][] = [[pts[0].x, 0]];
  for (const p of pts) {
    const prevY = out[out.length - 1][1];
    out.push([p.x, prevY]);
    out.push([p.x, p.y]);
  }
  return out;
}

/** Empirical CDF of one throughput statistic, one curve per algorithm. */
export function cdfScene(series: Map<string, number[]>, statistic: string,
                         refLine?: number): Scene {
  const names = [...series.keys()].sort();
  if (names.length === 0) throw new Error("no data series");
  for (const n of names) {
    if (series.get(n)!.length < 2) throw new Error(`need >= 2 realizations for a CDF (${n})`);
  }
  const all = names.flatMap((n) => series.get(n)!);
  let xlo = Math.min(...all);
  let xhi = Math.max(...all);
  if (refLine !== undefined) {
    xlo = Math.min(xlo, refLine);
    xhi = Math.max(xhi, refLine);
  }
  if (xhi === xlo) {
    xhi = xlo + 1;
    xlo = xlo - 1;
  }
  const pad = 0.05 * (xhi - xlo);
  const f: Frame = { x0: 70, y0: 40, w: 690, h: 390, xlo: xlo - pad, xhi: xhi + pad, ylo: 0, yhi: 1 };
  const prims: Prim[] = [];
  axes(prims, f, `Empirical CDF over realizations: ${statistic}`, statistic,
       "fraction of realizations", ticks(f.xlo, f.xhi), [0, 0.25, 0.5, 0.75, 1]);
  if (refLine !== undefined) {
    prims.push({ kind: "line", x1: sx(f, refLine), y1: f.y0, x2: sx(f, refLine),
                 y2: f.y0 + f.h, color: "#888888", width: 1 });
  }
  names.forEach((name, i) => {
    const pts = ecdf(series.get(name)!);
    const poly = stepPoints(pts).map(([x, y]) => [sx(f, x), sy(f, y)] as [number, number]);
    prims.push({ kind: "polyline", points: poly, color: color_of(name, i), width: 2 });
  });
  legend(prims, f, names.map((n, i) => [n, color_of(n, i)] as [string, string]));
  return { width: 800, height: 500, prims };
}

/** Per-tier load profile, sorted in decreasing load order within each tier,
 * one bar group per algorithm; loads are rank-wise means over seeds. */
export function loadBarsScene(
  loads: { algorithm: string; tier: string; bySeed: Map<string, number[]> }[],
): Scene {
  if (loads.length === 0) throw new Error("no load data");
  const algorithms = [...new Set(loads.map((l) => l.algorithm))].sort();
  const tiers = [...new Set(loads.map((l) => l.tier))].sort(); // macro before small
  // rank-wise mean of the per-seed descending profiles
  const profile = new Map<string, number[]>();
  for (const l of loads) {
    const sortedPerSeed = [...l.bySeed.values()].map((v) => [...v].sort((a, b) => b - a));
    const n = Math.max(...sortedPerSeed.map((v) => v.length));
    const mean: number[] = [];
    for (let r = 0; r < n; r++) {
      let s = 0;
      for (const v of sortedPerSeed) s += v[r] ?? 0;
      mean.push(s / sortedPerSeed.length);
    }
    profile.set(`${l.algorithm}|${l.tier}`, mean);
  }
  const slots: { tier: string; rank: number }[] = [];
  for (const tier of tiers) {
    const n = Math.max(...algorithms.map((a) => (profile.get(`${a}|${tier}`) ?? []).length));
    for (let r = 0; r < n; r++) slots.push({ tier, rank: r });
  }
  const ymax = Math.max(...[...profile.values()].flat(), 1);
  const f: Frame = { x0: 70, y0: 40, w: 690, h: 390, xlo: 0, xhi: slots.length + tiers.length - 1,
                     ylo: 0, yhi: ymax * 1.1 };
  const prims: Prim[] = [];
  axes(prims, f, "Users uniquely associated per BS (sorted within tier)",
       "BS rank by tier", "mean load", [], ticks(0, ymax * 1.1));
  let xcur = 0;
  let lastTier = slots.length ? slots[0].tier : "";
  const groupW = f.w / (slots.length + tiers.length - 1);
  const barW = (groupW * 0.8) / algorithms.length;
  for (const slot of slots) {
    if (slot.tier !== lastTier) {
      xcur += 1; // gap between tiers
      lastTier = slot.tier;
    }
    algorithms.forEach((a, i) => {
      const v = (profile.get(`${a}|${slot.tier}`) ?? [])[slot.rank];
      if (v === undefined) return;
      const x = f.x0 + xcur * groupW + 0.1 * groupW + i * barW;
      const y = sy(f, v);
      prims.push({ kind: "rect", x, y, w: barW, h: f.y0 + f.h - y, color: color_of(a, i) });
    });
    if (slot.rank === 0) {
      prims.push({ kind: "text", x: f.x0 + xcur * groupW + groupW / 2, y: f.y0 + f.h + 18,
                   text: slot.tier, color: FG, anchor: "middle" });
    }
    xcur += 1;
  }
  legend(prims, f, algorithms.map((a, i) => [a, color_of(a, i)] as [string, string]));
  return { width: 800, height: 500, prims };
}
