/** Load the benchmark CSVs and build figure scenes; write SVG + PNG pairs. */

import * as fs from "fs";
import * as path from "path";

import { numeric, readCsv, requireColumns } from "./csv";
import { rasterize } from "./raster";
import { toPng } from "./png";
import { Scene, cdfScene, loadBarsScene } from "./scene";
import { toSvg } from "./svg";

export const STATISTICS = ["p5", "geo_mean", "arith_mean"] as const;
export type Statistic = (typeof STATISTICS)[number];

export function statsCdf(statsCsv: string, statistic: Statistic,
                         algorithms?: string[]): Scene {
  const t = readCsv(statsCsv);
  const idx = requireColumns(t, ["seed", "algorithm", statistic], statsCsv);
  const series = new Map<string, number[]>();
  for (const row of t.rows) {
    const alg = row[idx.get("algorithm")!];
    if (algorithms && !algorithms.includes(alg)) continue;
    if (!series.has(alg)) series.set(alg, []);
    series.get(alg)!.push(numeric(row[idx.get(statistic)!], statistic));
  }
  if (series.size === 0) throw new Error(`${statsCsv}: no rows for the requested algorithms`);
  return cdfScene(series, statistic);
}

export function gainCdf(gainsCsv: string, statistic?: Statistic): Scene {
  const t = readCsv(gainsCsv);
  const idx = requireColumns(t, ["seed", "statistic", "ratio"], gainsCsv);
  const series = new Map<string, number[]>();
  for (const row of t.rows) {
    const stat = row[idx.get("statistic")!];
    if (statistic && stat !== statistic) continue;
    if (!series.has(stat)) series.set(stat, []);
    series.get(stat)!.push(numeric(row[idx.get("ratio")!], "ratio"));
  }
  if (series.size === 0) throw new Error(`${gainsCsv}: no gain rows`);
  const label = statistic ? `gain ratio (${statistic})` : "gain ratio vs max-peak-rate";
  return cdfScene(series, label, 1.0);
}

export function loadBars(loadsCsv: string): Scene {
  const t = readCsv(loadsCsv);
  const idx = requireColumns(t, ["seed", "algorithm", "bs_id", "tier", "count"], loadsCsv);
  const grouped = new Map<string, Map<string, number[]>>();
  for (const row of t.rows) {
    const key = `${row[idx.get("algorithm")!]}|${row[idx.get("tier")!]}`;
    const seed = row[idx.get("seed")!];
    if (!grouped.has(key)) grouped.set(key, new Map());
    const bySeed = grouped.get(key)!;
    if (!bySeed.has(seed)) bySeed.set(seed, []);
    bySeed.get(seed)!.push(numeric(row[idx.get("count")!], "count"));
  }
  const loads = [...grouped.entries()].sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([key, bySeed]) => {
      const [algorithm, tier] = key.split("|");
      return { algorithm, tier, bySeed };
    });
  return loadBarsScene(loads);
}

/** Write <base>.svg and <base>.png for a scene. */
export function writeScene(scene: Scene, baseOut: string): { svg: string; png: string } {
  const dir = path.dirname(baseOut);
  if (dir && dir !== ".") fs.mkdirSync(dir, { recursive: true });
  const svgPath = `${baseOut}.svg`;
  const pngPath = `${baseOut}.png`;
  fs.writeFileSync(svgPath, toSvg(scene));
  fs.writeFileSync(pngPath, toPng(rasterize(scene)));
  return { svg: svgPath, png: pngPath };
}
