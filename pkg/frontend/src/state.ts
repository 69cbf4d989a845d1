// Form state: defaults, conditional field enabling, request-body assembly
// and URL-fragment sharing. The displayed power always comes from the
// server; nothing here computes statistics.

import { makeStaircase } from "./design.js";
import type { ScenarioForm } from "./types.js";

export function defaultForm(): ScenarioForm {
  return {
    K: 50,
    design: makeStaircase(3, 6),
    family: "binomial",
    model: "conditional",
    link: "identity",
    type: "cross-sectional",
    meanresponse_start: null,
    meanresponse_end0: null,
    meanresponse_end1: null,
    effectsize_beta: null,
    sigma2: null,
    typeIerror: 0.05,
    alpha0: 0.1,
    alpha1: null,
    alpha2: null,
  };
}

export type FieldName = keyof ScenarioForm;

/** Conditional enabling: sigma2 is continuous-only, alpha2 cohort-only, and
 * the effect may be given as meanresponse_end1 XOR effectsize_beta. */
export function fieldEnabled(form: ScenarioForm, field: FieldName): boolean {
  switch (field) {
    case "sigma2":
      return form.family === "gaussian";
    case "alpha2":
      return form.type === "cohort";
    case "meanresponse_end1":
      return form.effectsize_beta === null;
    case "effectsize_beta":
      return form.meanresponse_end1 === null;
    case "link":
      return form.family === "binomial";
    default:
      return true;
  }
}

/** Assemble the POST /api/power body; disabled and unset fields are omitted. */
export function buildPowerRequest(form: ScenarioForm): Record<string, unknown> {
  const body: Record<string, unknown> = {
    K: form.K,
    design: form.design.map((r) => ({ count: r.count, allocation: [...r.allocation] })),
    family: form.family,
    model: form.model,
    link: form.family === "gaussian" ? "identity" : form.link,
    type: form.type,
    typeIerror: form.typeIerror,
    alpha0: form.alpha0,
  };
  if (form.alpha1 !== null) body.alpha1 = form.alpha1;
  if (form.alpha2 !== null && fieldEnabled(form, "alpha2")) body.alpha2 = form.alpha2;
  if (form.sigma2 !== null && fieldEnabled(form, "sigma2")) body.sigma2 = form.sigma2;
  for (const field of ["meanresponse_start", "meanresponse_end0"] as const) {
    if (form[field] !== null) body[field] = form[field];
  }
  if (form.meanresponse_end1 !== null && fieldEnabled(form, "meanresponse_end1")) {
    body.meanresponse_end1 = form.meanresponse_end1;
  }
  if (form.effectsize_beta !== null && fieldEnabled(form, "effectsize_beta")) {
    body.effectsize_beta = form.effectsize_beta;
  }
  return body;
}

/** Map a validation-error code to the form field it belongs to. */
export function fieldForErrorCode(code: string): FieldName | null {
  switch (code) {
    case "E-ALPHA":
      return "typeIerror";
    case "E-ICC-RANGE":
    case "E-PD":
    case "E-QAQISH":
      return "alpha0";
    case "E-PROB":
      return "meanresponse_start";
    case "E-CONTRADICT":
      return "effectsize_beta";
    case "E-K150":
    case "E-BUDGET":
      return "K";
    default:
      return null;
  }
}

export function encodeFragment(form: ScenarioForm): string {
  return "#s=" + encodeURIComponent(JSON.stringify(form));
}

export function decodeFragment(fragment: string): ScenarioForm | null {
  const match = /^#s=(.+)$/.exec(fragment);
  if (!match) return null;
  try {
    const parsed = JSON.parse(decodeURIComponent(match[1]));
    const base = defaultForm();
    if (typeof parsed !== "object" || parsed === null) return null;
    const merged = { ...base, ...parsed } as ScenarioForm;
    if (!Array.isArray(merged.design) || merged.design.length === 0) return null;
    return merged;
  } catch {
    return null;
  }
}
