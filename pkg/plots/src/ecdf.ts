/** Empirical CDFs as step functions over sorted sample values. */

export interface EcdfPoint {
  x: number;
  y: number; // fraction of samples <= x
}

export function ecdf(values: number[]): EcdfPoint[] {
  if (values.length === 0) throw new Error("empty sample");
  const sorted = [...values].sort((a, b) => a - b);
  return sorted.map((x, i) => ({ x, y: (i + 1) / sorted.length }));
}

/** Nice round tick positions covering [lo, hi]. */
export function ticks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.1 : 1;
    return ticks(lo - pad, lo + pad, n);
  }
  const span = hi - lo;
  const raw = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const steps = [1, 2, 2.5, 5, 10];
  let step = steps[steps.length - 1] * mag;
  for (const s of steps) {
    if (s * mag >= raw) {
      step = s * mag;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let t = start; t <= hi + 1e-12 * span; t += step) {
    out.push(Number(t.toPrecision(12)));
  }
  return out;
}

export function formatTick(x: number): string {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (a >= 1000 || a < 0.01) return x.toExponential(1).replace("+", "");
  return Number(x.toPrecision(4)).toString();
}
