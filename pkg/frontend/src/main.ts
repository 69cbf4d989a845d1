// DOM wiring for the design explorer. All statistics come from the server;
// this file only moves values between the form, the URL fragment and the
// API client.

import { ApiClient, ApiError } from "./api.js";
import { renderChart, toChartPoints, type ChartSeries } from "./chart.js";
import {
  addPeriod,
  addStep,
  isStaircaseRow,
  makeStaircase,
  removePeriod,
  removeRow,
  setRowCount,
  toggleCell,
  totalClusters,
} from "./design.js";
import { createDebouncer } from "./debounce.js";
import { displayNumber, displayPower, fullPrecision } from "./format.js";
import {
  buildPowerRequest,
  decodeFragment,
  defaultForm,
  encodeFragment,
  fieldEnabled,
  fieldForErrorCode,
  type FieldName,
} from "./state.js";
import type { PowerReport, ScenarioForm, SweepParam } from "./types.js";

const API_BASE = (window as { SWDPWR_API?: string }).SWDPWR_API ?? "http://127.0.0.1:8750";
const client = new ApiClient(API_BASE);

let form: ScenarioForm = decodeFragment(window.location.hash) ?? defaultForm();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const NUMBER_FIELDS: { name: FieldName; label: string; step: string }[] = [
  { name: "K", label: "K (per cluster-period)", step: "1" },
  { name: "meanresponse_start", label: "meanresponse_start", step: "0.01" },
  { name: "meanresponse_end0", label: "meanresponse_end0", step: "0.01" },
  { name: "meanresponse_end1", label: "meanresponse_end1", step: "0.01" },
  { name: "effectsize_beta", label: "effectsize_beta", step: "0.01" },
  { name: "sigma2", label: "sigma2", step: "0.01" },
  { name: "typeIerror", label: "typeIerror", step: "0.01" },
  { name: "alpha0", label: "alpha0", step: "0.005" },
  { name: "alpha1", label: "alpha1", step: "0.005" },
  { name: "alpha2", label: "alpha2", step: "0.005" },
];

const SELECT_FIELDS: { name: FieldName; options: string[] }[] = [
  { name: "family", options: ["binomial", "gaussian"] },
  { name: "model", options: ["conditional", "marginal"] },
  { name: "link", options: ["identity", "log", "logit"] },
  { name: "type", options: ["cross-sectional", "cohort"] },
];

function buildForm(): void {
  const host = el<HTMLDivElement>("form-fields");
  const parts: string[] = [];
  for (const f of SELECT_FIELDS) {
    const opts = f.options
      .map((o) => `<option value="${o}">${o}</option>`)
      .join("");
    parts.push(
      `<label id="wrap-${f.name}"><span>${f.name}</span>` +
        `<select id="field-${f.name}">${opts}</select>` +
        `<em class="field-error" id="err-${f.name}"></em></label>`,
    );
  }
  for (const f of NUMBER_FIELDS) {
    parts.push(
      `<label id="wrap-${f.name}"><span>${f.label}</span>` +
        `<input id="field-${f.name}" type="number" step="${f.step}">` +
        `<em class="field-error" id="err-${f.name}"></em></label>`,
    );
  }
  host.innerHTML = parts.join("");
  for (const f of SELECT_FIELDS) {
    el<HTMLSelectElement>(`field-${f.name}`).addEventListener("change", (ev) => {
      (form as unknown as Record<string, unknown>)[f.name] = (ev.target as HTMLSelectElement).value;
      onFormChanged();
    });
  }
  for (const f of NUMBER_FIELDS) {
    el<HTMLInputElement>(`field-${f.name}`).addEventListener("input", (ev) => {
      const raw = (ev.target as HTMLInputElement).value.trim();
      (form as unknown as Record<string, unknown>)[f.name] = raw === "" ? null : Number(raw);
      onFormChanged();
    });
  }
}

function renderFormValues(): void {
  for (const f of SELECT_FIELDS) {
    el<HTMLSelectElement>(`field-${f.name}`).value = String(form[f.name]);
  }
  for (const f of NUMBER_FIELDS) {
    const input = el<HTMLInputElement>(`field-${f.name}`);
    const value = form[f.name];
    input.value = value === null || value === undefined ? "" : String(value);
    const enabled = fieldEnabled(form, f.name);
    input.disabled = !enabled;
    el(`wrap-${f.name}`).classList.toggle("disabled", !enabled);
  }
  el<HTMLSelectElement>("field-link").disabled = !fieldEnabled(form, "link");
}

function renderDesign(): void {
  const host = el<HTMLDivElement>("design-grid");
  const J = form.design[0]?.allocation.length ?? 0;
  const header =
    "<tr><th>clusters</th>" +
    Array.from({ length: J }, (_, j) => `<th>t${j + 1}</th>`).join("") +
    "<th></th></tr>";
  const body = form.design
    .map((row, i) => {
      const cells = row.allocation
        .map(
          (x, j) =>
            `<td><button class="cell ${x ? "on" : "off"}" data-row="${i}" data-col="${j}">${x}</button></td>`,
        )
        .join("");
      const shape = isStaircaseRow(row.allocation) ? "" : " ⚠";
      return (
        `<tr><td><input class="count" data-row="${i}" type="number" min="1" value="${row.count}"></td>` +
        cells +
        `<td><button class="rm" data-row="${i}" title="remove row">×</button>${shape}</td></tr>`
      );
    })
    .join("");
  host.innerHTML = `<table>${header}${body}</table>`;
  el("design-meta").textContent =
    `I = ${totalClusters(form.design)} clusters, J = ${J} periods`;

  host.querySelectorAll<HTMLButtonElement>("button.cell").forEach((btn) => {
    btn.addEventListener("click", () => {
      form = {
        ...form,
        design: toggleCell(form.design, Number(btn.dataset.row), Number(btn.dataset.col)),
      };
      onFormChanged();
    });
  });
  host.querySelectorAll<HTMLInputElement>("input.count").forEach((input) => {
    input.addEventListener("change", () => {
      form = {
        ...form,
        design: setRowCount(form.design, Number(input.dataset.row), Number(input.value)),
      };
      onFormChanged();
    });
  });
  host.querySelectorAll<HTMLButtonElement>("button.rm").forEach((btn) => {
    btn.addEventListener("click", () => {
      if (form.design.length > 1) {
        form = { ...form, design: removeRow(form.design, Number(btn.dataset.row)) };
        onFormChanged();
      }
    });
  });
}

function clearFieldErrors(): void {
  document.querySelectorAll<HTMLElement>(".field-error").forEach((n) => (n.textContent = ""));
  document.querySelectorAll(".invalid").forEach((n) => n.classList.remove("invalid"));
}

function showError(err: ApiError): void {
  const banner = el("error-banner");
  banner.textContent = `${err.code}: ${err.message}`;
  banner.classList.remove("hidden");
  const field = fieldForErrorCode(err.code);
  if (field) {
    const slot = document.getElementById(`err-${field}`);
    if (slot) {
      slot.textContent = err.message;
      document.getElementById(`wrap-${field}`)?.classList.add("invalid");
    }
  }
}

function renderReport(report: PowerReport): void {
  el("power-value").innerHTML =
    `<span title="${fullPrecision(report.power)}">${displayPower(report.power)}</span>`;
  const rows: [string, string][] = [
    ["Total sample size", String(report.total_sample_size)],
    ["beta", `${displayNumber(report.beta)} (${fullPrecision(report.beta)})`],
    ["mu", displayNumber(report.mu)],
    ["gamma J", displayNumber(report.gammaJ)],
    ["alpha0 / alpha1 / alpha2",
     `${displayNumber(report.alpha0)} / ${displayNumber(report.alpha1)} / ${displayNumber(report.alpha2)}`],
    ["Var(beta)", fullPrecision(report.var_beta)],
    ["Time effects", report.time_effects ? "yes" : "no"],
  ];
  el("report-fields").innerHTML = rows
    .map(([k, v]) => `<div><span>${k}</span><strong>${v}</strong></div>`)
    .join("");
  el("warnings").innerHTML = report.warnings
    .map((w) => `<div class="warning"><b>${w.code}</b> ${w.message}</div>`)
    .join("");
}

const powerDebouncer = createDebouncer<Record<string, unknown>>(300, (body, signal) => {
  void (async () => {
    try {
      const report = await client.power(body, signal);
      clearFieldErrors();
      el("error-banner").classList.add("hidden");
      renderReport(report);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") return;
      clearFieldErrors();
      if (err instanceof ApiError) showError(err);
      // the last good result stays on screen
    }
  })();
});

function onFormChanged(): void {
  renderFormValues();
  renderDesign();
  history.replaceState(null, "", encodeFragment(form));
  powerDebouncer.call(buildPowerRequest(form));
}

function runSweep(): void {
  const param = el<HTMLSelectElement>("sweep-param").value as SweepParam;
  const from = Number(el<HTMLInputElement>("sweep-from").value);
  const to = Number(el<HTMLInputElement>("sweep-to").value);
  const steps = Number(el<HTMLInputElement>("sweep-steps").value);
  const host = el("sweep-chart-host");
  if (!(steps >= 2) || !isFinite(from) || !isFinite(to)) {
    host.innerHTML = '<p class="hint">Enter a range (from, to) and at least 2 steps.</p>';
    return;
  }
  const grid = Array.from({ length: steps }, (_, i) => from + (i * (to - from)) / (steps - 1));
  const overlay = el<HTMLInputElement>("sweep-overlay").checked;
  const models = overlay ? (["conditional", "marginal"] as const) : ([form.model] as const);
  host.innerHTML = '<p class="hint">computing…</p>';
  void (async () => {
    try {
      const series: ChartSeries[] = [];
      for (const model of models) {
        const spec = buildPowerRequest({ ...form, model });
        const points = await client.sweep(spec, param, grid);
        series.push({
          label: model,
          color: model === "conditional" ? "#2563eb" : "#d97706",
          points: toChartPoints(points),
        });
      }
      host.innerHTML = renderChart(series);
      host.querySelectorAll<SVGCircleElement>("circle.pt").forEach((c) => {
        c.addEventListener("click", () => {
          const value = Number(c.dataset.value);
          if (param === "risk_difference") {
            const end0 = form.meanresponse_end0 ?? form.meanresponse_start;
            if (end0 !== null) {
              form = { ...form, meanresponse_end1: end0 + value, effectsize_beta: null };
            }
          } else if (param === "K") {
            form = { ...form, K: Math.round(value) };
          } else {
            form = { ...form, [param]: value };
          }
          onFormChanged();
        });
      });
    } catch (err) {
      host.innerHTML = `<p class="error">${err instanceof ApiError ? `${err.code}: ${err.message}` : "sweep failed"}</p>`;
    }
  })();
}

function wireToolbar(): void {
  el("btn-add-step").addEventListener("click", () => {
    form = { ...form, design: addStep(form.design) };
    onFormChanged();
  });
  el("btn-add-period").addEventListener("click", () => {
    form = { ...form, design: addPeriod(form.design) };
    onFormChanged();
  });
  el("btn-remove-period").addEventListener("click", () => {
    form = { ...form, design: removePeriod(form.design) };
    onFormChanged();
  });
  el("btn-reset").addEventListener("click", () => {
    form = { ...form, design: makeStaircase(form.design[0].allocation.length, 1) };
    onFormChanged();
  });
  el("btn-sweep").addEventListener("click", runSweep);
}

function boot(): void {
  buildForm();
  wireToolbar();
  void client.health().then((ok) => {
    const banner = el("offline-banner");
    banner.classList.toggle("hidden", ok);
  });
  window.addEventListener("hashchange", () => {
    const loaded = decodeFragment(window.location.hash);
    if (loaded) {
      form = loaded;
      onFormChanged();
    }
  });
  onFormChanged();
}

boot();
