// Wire types shared with the power API. Field names match the request and
// response bodies exactly; null means "not supplied".

export interface DesignRow {
  count: number;
  allocation: number[];
}

export type Family = "binomial" | "gaussian";
export type Model = "conditional" | "marginal";
export type Link = "identity" | "log" | "logit";
export type StudyType = "cross-sectional" | "cohort";

export interface ScenarioForm {
  K: number;
  design: DesignRow[];
  family: Family;
  model: Model;
  link: Link;
  type: StudyType;
  meanresponse_start: number | null;
  meanresponse_end0: number | null;
  meanresponse_end1: number | null;
  effectsize_beta: number | null;
  sigma2: number | null;
  typeIerror: number;
  alpha0: number;
  alpha1: number | null;
  alpha2: number | null;
}

export interface ApiWarning {
  code: string;
  message: string;
}

export interface PowerReport {
  I: number;
  J: number;
  K: number;
  total_sample_size: number;
  family: string;
  model: string;
  link: string;
  type: string;
  mu: number;
  beta: number;
  gammaJ: number;
  tau: number;
  alpha0: number;
  alpha1: number;
  alpha2: number;
  typeIerror: number;
  var_beta: number;
  power: number;
  time_effects: boolean;
  design: DesignRow[];
  warnings: ApiWarning[];
}

export interface SweepResponsePoint {
  value: number;
  report?: PowerReport;
  error?: { code: string; message: string };
}

export type SweepParam =
  | "risk_difference"
  | "effectsize_beta"
  | "K"
  | "typeIerror"
  | "alpha0"
  | "alpha1"
  | "alpha2";
