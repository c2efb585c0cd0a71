/**
 * The shared growth-rate fit: ratio(t) is matched to C * exp(c t) by
 * taking the running maximum of log(ratio) and putting a least-squares
 * line through it against time.  The producer fits its envelopes with
 * exactly this recipe, so refitting its CSV output reproduces the
 * recorded rate to rounding; the renderer uses the refit only as a
 * redundant annotation and cross-checks it against the stored curve.
 */

export interface EnvelopeFit {
  /** Growth rate: the slope of the running-max log ratio. */
  c: number;
  /** Intercept: log of the envelope prefactor C. */
  logC0: number;
}

export function fitEnvelope(times: number[], ratios: number[]): EnvelopeFit {
  const n = times.length;
  if (n !== ratios.length || n < 2) {
    throw new Error(`envelope fit needs two aligned samples, got ${n}`);
  }
  const y: number[] = new Array(n);
  let runningMax = -Infinity;
  for (let i = 0; i < n; i++) {
    const ratio = ratios[i]!;
    if (!(ratio > 0)) {
      throw new Error(`envelope fit needs positive ratios, got ${ratio}`);
    }
    runningMax = Math.max(runningMax, Math.log(ratio));
    y[i] = runningMax;
  }
  let st = 0;
  let sy = 0;
  let stt = 0;
  let sty = 0;
  for (let i = 0; i < n; i++) {
    st += times[i]!;
    sy += y[i]!;
    stt += times[i]! * times[i]!;
    sty += times[i]! * y[i]!;
  }
  const denom = n * stt - st * st;
  if (denom === 0) {
    throw new Error("envelope fit needs at least two distinct times");
  }
  const c = (n * sty - st * sy) / denom;
  return { c, logC0: (sy - c * st) / n };
}

/**
 * Recover the rate recorded in an envelope column exp(logC0 + c t)
 * from its endpoints; exact up to rounding of the stored digits.
 */
export function envelopeColumnRate(times: number[], envelope: number[]): number {
  const n = times.length;
  if (n < 2 || envelope.length !== n) {
    throw new Error("envelope column needs two aligned samples");
  }
  const dt = times[n - 1]! - times[0]!;
  if (dt === 0) {
    throw new Error("envelope column spans zero time");
  }
  return (Math.log(envelope[n - 1]!) - Math.log(envelope[0]!)) / dt;
}
