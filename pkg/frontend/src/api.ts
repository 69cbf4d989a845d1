// Thin JSON client for the power API. Validation failures (HTTP 422) are
// surfaced as ApiError with the engine's stable code and verbatim message.

import type { PowerReport, SweepParam, SweepResponsePoint } from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function postJson(
  fetchFn: FetchLike,
  url: string,
  body: unknown,
  signal?: AbortSignal,
): Promise<unknown> {
  let response: Response;
  try {
    response = await fetchFn(url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") throw err;
    throw new ApiError("E-NETWORK", "could not reach the power service", 0);
  }
  const payload = (await response.json().catch(() => ({}))) as {
    code?: string;
    message?: string;
  };
  if (!response.ok) {
    throw new ApiError(
      payload.code ?? "E-INTERNAL",
      payload.message ?? `request failed with status ${response.status}`,
      response.status,
    );
  }
  return payload;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async power(body: unknown, signal?: AbortSignal): Promise<PowerReport> {
    return (await postJson(this.fetchFn, this.baseUrl + "/api/power", body, signal)) as PowerReport;
  }

  async sweep(
    spec: unknown,
    param: SweepParam,
    grid: number[],
    signal?: AbortSignal,
  ): Promise<SweepResponsePoint[]> {
    const payload = (await postJson(
      this.fetchFn,
      this.baseUrl + "/api/sweep",
      { spec, param, grid },
      signal,
    )) as { points: SweepResponsePoint[] };
    return payload.points;
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchFn(this.baseUrl + "/api/health");
      return response.ok;
    } catch {
      return false;
    }
  }
}
