/** Session state: the selected case, the entered targets, controller
 * toggle, and the most recent service results. */

import type {
  AnalyzeResponse, CompareResponse, FrontierResponse, LocusResponse,
  SpectrumResponse, TargetsDto, TuneResponse,
} from "./api.js";

export interface Targets {
  cosPsiD: number;
  alphaD: number;
  deltaP: number;
  /** Operators think in mHz; the service converts with the case f0. */
  deltaOmegaMhz: number;
}

export interface ResultsCache {
  spectrum?: SpectrumResponse;
  frontier?: FrontierResponse;
  tune?: TuneResponse;
  locus?: LocusResponse;
  analyze?: AnalyzeResponse;
  compare?: CompareResponse;
}

export interface SessionState {
  caseId: string | null;
  targets: Targets;
  controller: "fs" | "vi";
  coiOverride: boolean;
  results: ResultsCache;
  error: string | null;
}

export const DEFAULT_TARGETS: Targets = {
  cosPsiD: 0.1,
  alphaD: 0.2,
  deltaP: 0.2,
  deltaOmegaMhz: 200,
};

export function initialState(): SessionState {
  return {
    caseId: null,
    targets: { ...DEFAULT_TARGETS },
    controller: "fs",
    coiOverride: true,
    results: {},
    error: null,
  };
}

/** Widget-bound check; alphaMax comes from the service frontier payload. */
export function validateTargets(t: Targets,
                                alphaMax: number | null): string | null {
  if (!(t.cosPsiD > 0 && t.cosPsiD <= 1)) {
    return "damping-ratio target must lie in (0, 1]";
  }
  if (!(t.alphaD > 0)) {
    return "decay-rate target must be positive";
  }
  if (alphaMax !== null && t.alphaD > alphaMax) {
    return `decay-rate target exceeds the frontier maximum ${alphaMax}`;
  }
  if (t.deltaP < 0 || t.deltaOmegaMhz <= 0) {
    return "power imbalance must be >= 0 and the deviation budget positive";
  }
  return null;
}

/** Request body for /v1/tune; mHz is passed through untouched. */
export function targetsToDto(t: Targets): TargetsDto {
  return {
    cos_psi_d: t.cosPsiD,
    alpha_d: t.alphaD,
    delta_p: t.deltaP,
    delta_omega_mhz: t.deltaOmegaMhz,
  };
}

type Listener = (state: SessionState) => void;

export class SessionStore {
  private state: SessionState = initialState();
  private listeners: Listener[] = [];

  get(): SessionState {
    return this.state;
  }

  update(patch: Partial<SessionState>): SessionState {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
    return this.state;
  }

  mergeResults(patch: Partial<ResultsCache>): SessionState {
    return this.update({ results: { ...this.state.results, ...patch } });
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((f) => f !== fn);
    };
  }
}
