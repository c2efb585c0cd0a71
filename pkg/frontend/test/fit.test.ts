import { describe, expect, it } from "vitest";
import { fitEnvelope, envelopeColumnRate } from "../src/fit.js";

describe("fitEnvelope", () => {
  it("recovers the rate of a clean exponential within 1%", () => {
    const times: number[] = [];
    const ratios: number[] = [];
    for (let i = 0; i <= 200; i++) {
      const t = i * 0.01;
      times.push(t);
      ratios.push(0.1 * Math.exp(0.5 * t));
    }
    const fit = fitEnvelope(times, ratios);
    expect(Math.abs(fit.c - 0.5)).toBeLessThan(0.005);
    expect(Math.abs(fit.logC0 - Math.log(0.1))).toBeLessThan(0.05);
  });

  it("depends only on the running maximum, not on dip depth", () => {
    const times: number[] = [];
    const shallow: number[] = [];
    const deep: number[] = [];
    for (let i = 0; i <= 100; i++) {
      const t = i * 0.01;
      const v = Math.exp(0.3 * t);
      times.push(t);
      shallow.push(i % 7 === 3 ? v * 0.5 : v);
      deep.push(i % 7 === 3 ? v * 0.2 : v);
    }
    const a = fitEnvelope(times, shallow);
    const b = fitEnvelope(times, deep);
    expect(a.c).toBe(b.c);
    expect(a.logC0).toBe(b.logC0);
  });

  it("rejects nonpositive ratios and degenerate time grids", () => {
    expect(() => fitEnvelope([0, 1], [1, 0])).toThrow(/positive/);
    expect(() => fitEnvelope([1, 1], [1, 2])).toThrow(/time/);
  });
});

describe("envelopeColumnRate", () => {
  it("reads the rate back from envelope endpoints", () => {
    const times = [0, 0.5, 1.0, 1.5];
    const envelope = times.map((t) => Math.exp(0.25 + 0.75 * t));
    expect(Math.abs(envelopeColumnRate(times, envelope) - 0.75)).toBeLessThan(
      1e-12
    );
  });
});
