/** CLI: CDF of the per-realization distributed/max-peak-rate gain ratios.
 *
 * usage: node dist/plot_gain_cdf.js <gains.csv> <out-base> [statistic]
 */

import { STATISTICS, Statistic, gainCdf, writeScene } from "./figures";

function main(argv: string[]): number {
  const [gainsCsv, outBase, statistic] = argv;
  if (!gainsCsv || !outBase) {
    console.error("usage: plot_gain_cdf <gains.csv> <out-base> [statistic]");
    return 2;
  }
  if (statistic && !(STATISTICS as readonly string[]).includes(statistic)) {
    console.error(`unknown statistic '${statistic}' (expected ${STATISTICS.join("|")})`);
    return 2;
  }
  try {
    const scene = gainCdf(gainsCsv, statistic as Statistic | undefined);
    const out = writeScene(scene, outBase);
    console.log(`wrote ${out.svg} and ${out.png}`);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
