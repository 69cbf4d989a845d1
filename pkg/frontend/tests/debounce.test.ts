import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { createDebouncer } from "../src/debounce.js";

describe("createDebouncer", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once after the delay with the latest argument", () => {
    const calls: number[] = [];
    const d = createDebouncer<number>(300, (arg) => calls.push(arg));
    d.call(1);
    vi.advanceTimersByTime(150);
    d.call(2);
    vi.advanceTimersByTime(150);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(150);
    expect(calls).toEqual([2]);
  });

  it("aborts the previous in-flight request when a new one starts", () => {
    const signals: AbortSignal[] = [];
    const d = createDebouncer<number>(300, (_arg, signal) => signals.push(signal));
    d.call(1);
    vi.advanceTimersByTime(300);
    d.call(2);
    vi.advanceTimersByTime(300);
    expect(signals).toHaveLength(2);
    expect(signals[0].aborted).toBe(true);
    expect(signals[1].aborted).toBe(false);
  });

  it("cancel() stops pending timers and aborts in-flight work", () => {
    const signals: AbortSignal[] = [];
    const calls: number[] = [];
    const d = createDebouncer<number>(300, (arg, signal) => {
      calls.push(arg);
      signals.push(signal);
    });
    d.call(1);
    vi.advanceTimersByTime(300);
    d.call(2);
    d.cancel();
    vi.advanceTimersByTime(1000);
    expect(calls).toEqual([1]);
    expect(signals[0].aborted).toBe(true);
  });
});
