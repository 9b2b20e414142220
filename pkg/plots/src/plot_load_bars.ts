/** CLI: per-tier BS load profiles (rank-wise mean over seeds), one bar group
 * per algorithm, sorted in decreasing load order within each tier.
 *
 * usage: node dist/plot_load_bars.js <loads.csv> <out-base>
 */

import { loadBars, writeScene } from "./figures";

function main(argv: string[]): number {
  const [loadsCsv, outBase] = argv;
  if (!loadsCsv || !outBase) {
    console.error("usage: plot_load_bars <loads.csv> <out-base>");
    return 2;
  }
  try {
    const out = writeScene(loadBars(loadsCsv), outBase);
    console.log(`wrote ${out.svg} and ${out.png}`);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
