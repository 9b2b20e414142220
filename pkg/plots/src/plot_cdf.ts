/** CLI: empirical CDF of one throughput statistic across realizations.
 *
 * usage: node dist/plot_cdf.js <stats.csv> <out-base> [statistic] [algorithms]
 *   statistic:  p5 | geo_mean | arith_mean        (default p5)
 *   algorithms: comma-separated filter            (default: all present)
 */

import { STATISTICS, Statistic, statsCdf, writeScene } from "./figures";

function main(argv: string[]): number {
  const [statsCsv, outBase, statistic = "p5", algorithms] = argv;
  if (!statsCsv || !outBase) {
    console.error("usage: plot_cdf <stats.csv> <out-base> [statistic] [algorithms]");
    return 2;
  }
  if (!(STATISTICS as readonly string[]).includes(statistic)) {
    console.error(`unknown statistic '${statistic}' (expected ${STATISTICS.join("|")})`);
    return 2;
  }
  try {
    const scene = statsCdf(statsCsv, statistic as Statistic,
                           algorithms ? algorithms.split(",") : undefined);
    const out = writeScene(scene, outBase);
    console.log(`wrote ${out.svg} and ${out.png}`);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
