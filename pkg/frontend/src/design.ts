// Design-grid editing. Cell toggles are free (the server warns about
// non-staircase shapes); the step helpers always produce the classic
// stepped-wedge staircase.

import type { DesignRow } from "./types.js";

export function makeStaircase(J: number, countPerRow = 1): DesignRow[] {
  const rows: DesignRow[] = [];
  for (let step = 1; step < J; step++) {
    const allocation = Array.from({ length: J }, (_, j) => (j >= step ? 1 : 0));
    rows.push({ count: countPerRow, allocation });
  }
  return rows;
}

export function cloneRows(rows: DesignRow[]): DesignRow[] {
  return rows.map((r) => ({ count: r.count, allocation: [...r.allocation] }));
}

export function toggleCell(rows: DesignRow[], row: number, col: number): DesignRow[] {
  const out = cloneRows(rows);
  out[row].allocation[col] = out[row].allocation[col] ? 0 : 1;
  return out;
}

export function setRowCount(rows: DesignRow[], row: number, count: number): DesignRow[] {
  const out = cloneRows(rows);
  out[row].count = Math.max(1, Math.round(count));
  return out;
}

export function removeRow(rows: DesignRow[], row: number): DesignRow[] {
  const out = cloneRows(rows);
  out.splice(row, 1);
  return out;
}

function crossoverPeriod(allocation: number[]): number {
  const first = allocation.indexOf(1);
  return first === -1 ? allocation.length : first;
}

/** Append a sequence crossing over one period later than the latest row. */
export function addStep(rows: DesignRow[]): DesignRow[] {
  if (rows.length === 0) return rows;
  const J = rows[0].allocation.length;
  const latest = Math.max(...rows.map((r) => crossoverPeriod(r.allocation)));
  const step = Math.min(latest + 1, J - 1);
  if (rows.some((r) => crossoverPeriod(r.allocation) === step)) {
    return cloneRows(rows);
  }
  const allocation = Array.from({ length: J }, (_, j) => (j >= step ? 1 : 0));
  return [...cloneRows(rows), { count: 1, allocation }];
}

/** Add a period at the end; every sequence keeps its final condition. */
export function addPeriod(rows: DesignRow[]): DesignRow[] {
  return rows.map((r) => ({
    count: r.count,
    allocation: [...r.allocation, r.allocation[r.allocation.length - 1]],
  }));
}

export function removePeriod(rows: DesignRow[]): DesignRow[] {
  if (rows.length === 0 || rows[0].allocation.length <= 2) return cloneRows(rows);
  return rows.map((r) => ({ count: r.count, allocation: r.allocation.slice(0, -1) }));
}

export function isStaircaseRow(allocation: number[]): boolean {
  for (let j = 1; j < allocation.length; j++) {
    if (allocation[j] < allocation[j - 1]) return false;
  }
  return true;
}

export function totalClusters(rows: DesignRow[]): number {
  return rows.reduce((acc, r) => acc + r.count, 0);
}
