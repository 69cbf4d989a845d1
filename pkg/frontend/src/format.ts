// Number display: three decimals (half away from zero) in the UI, full
// precision in tooltips. Matches the engine's print convention, including
// plain "1" for a power that rounds to one.

export function round3(x: number): number {
  const sign = x < 0 ? -1 : 1;
  return (sign * Math.round(Math.abs(x) * 1000 + Number.EPSILON)) / 1000;
}

export function displayPower(power: number): string {
  const r = round3(power);
  return r >= 1 ? "1" : r.toFixed(3);
}

export function displayNumber(x: number): string {
  const r = round3(x);
  const s = r.toFixed(3).replace(/0+$/, "").replace(/\.$/, "");
  return s === "" || s === "-" ? "0" : s;
}

export function fullPrecision(x: number): string {
  return String(x);
}
