/** Typed client for the gridshape /v1 service.
 *
 * The UI never evaluates tuning or stability formulas itself: every number
 * it displays is lifted verbatim from one of these response payloads.
 */

export interface ControllerDto {
  kind: "fs" | "vi" | "none";
  d_b?: number;
  m_v?: number | null;
}

export interface TargetsDto {
  cos_psi_d: number;
  alpha_d: number;
  delta_p?: number;
  /** Entered in mHz; the service converts using the case f0. */
  delta_omega_mhz?: number;
}

export interface AchievedDto {
  cos_psi_bar: number;
  alpha_bar: number;
}

export interface TuneResponse {
  d_b: number;
  d_b_osc: number;
  d_b_coi: number;
  d_b_osc_terms: { damping: number; decay: number };
  regime: string;
  achieved: AchievedDto;
  m_v_min: number;
  case_hash: string;
  toolkit_version: string;
}

export interface FrontierPointDto {
  cos_psi: number;
  alpha: number;
  d_b: number;
  segment: "linear" | "curved" | "vertical";
}

export interface FrontierResponse {
  points: FrontierPointDto[];
  alpha_max: number;
  cos_knee: number;
  alpha_vertical: number;
  cos_at_zero_droop: number;
  case_hash: string;
}

export interface ComplexDto {
  re: number;
  im: number;
}

export interface LocusResponse {
  geometry: {
    open_poles: ComplexDto[];
    open_zeros: ComplexDto[];
    sigma_a: number;
    asymptote_angles_deg: number[];
    break_points: number[];
  };
  branches: { branch_id: number; gains: number[]; re: number[];
              im: number[] }[];
  mode_gains: number[];
  case_hash: string;
}

export interface RegionDto {
  alpha: number;
  psi_deg: number;
  cos_psi: number;
}

export interface AnalyzeResponse {
  per_mode: { k: number; lambda_k: number; poles: ComplexDto[];
              damping: number; decay: number }[];
  min_damping: number;
  min_decay: number;
  region?: RegionDto;
  per_mode_pass?: { k: number; passes: boolean }[];
  pass?: boolean;
  case_hash: string;
}

export interface SeriesDto {
  t: number[];
  v: number[];
}

/** Full-resolution shape: aligned arrays. Downsampled shape: named series. */
export interface SimulatePayload {
  downsampled: boolean;
  t?: number[];
  omega?: number[][];
  coi?: number[];
  p_inv?: number[][];
  series?: Record<string, SeriesDto>;
  u0: number[];
  meta: { mode: string; controller: ControllerDto };
}

export interface EnvelopeDto {
  rate: number;
  amplitude: number;
  residual: number;
}

export interface CompareResponse {
  controllers: { d_b: number; m_v: number };
  fs: { steady_state: number; envelope: EnvelopeDto; rate_floor: number;
        response: SimulatePayload };
  vi: { steady_state: number; envelope: EnvelopeDto; rate_bound: number;
        response: SimulatePayload };
  rate_comparison: { lhs: number; holds: boolean; margin: number };
  faster: "fs" | "vi";
  case_hash: string;
}

export interface SpectrumResponse {
  lambda: number[];
  lambda2: number;
  lambda_n: number;
  r: number[];
  params: { m: number; d: number; d_t: number; tau: number; r_sum: number };
  buses: { id: number; m: number; d: number; d_t: number; tau: number }[];
  f0: number;
  case_hash: string;
}

export interface CaseSummary {
  id: string;
  n: number;
  f0: number;
  s_base: number;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string,
              public detail?: Record<string, unknown>) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(private base: string = "",
              private fetchFn: FetchLike =
                  (input, init) => fetch(input, init)) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, body.code ?? "error",
                         body.message ?? resp.statusText, body.detail);
    }
    return body as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request("/v1/health");
  }

  listCases(): Promise<{ cases: CaseSummary[] }> {
    return this.request("/v1/cases");
  }

  uploadCase(data: unknown): Promise<{ id: string }> {
    return this.post("/v1/cases", data);
  }

  spectrum(caseId: string): Promise<SpectrumResponse> {
    return this.request(`/v1/cases/${caseId}/spectrum`);
  }

  tune(caseId: string, targets: TargetsDto,
       coiOverride?: number | null): Promise<TuneResponse> {
    return this.post("/v1/tune", {
      case_id: caseId,
      targets,
      coi_override: coiOverride ?? null,
    });
  }

  frontier(caseId: string): Promise<FrontierResponse> {
    return this.request(`/v1/frontier?case_id=${caseId}`);
  }

  locus(caseId: string, controller: ControllerDto,
        nPoints = 200): Promise<LocusResponse> {
    return this.post("/v1/locus", {
      case_id: caseId, controller, n_points: nPoints,
    });
  }

  analyze(caseId: string, controller: ControllerDto,
          region?: { alpha: number; cos_psi: number }):
      Promise<AnalyzeResponse> {
    return this.post("/v1/analyze", {
      case_id: caseId, controller, region: region ?? null,
    });
  }

  simulate(caseId: string, controller: ControllerDto, u0: number[],
           opts: { t_end?: number; dt?: number; onset?: number;
                   mode?: string; heterogeneous?: boolean } = {}):
      Promise<SimulatePayload> {
    return this.post("/v1/simulate",
                     { case_id: caseId, controller, u0, ...opts });
  }

  compare(caseId: string, dB: number, u0: number[],
          opts: { m_v?: number; t_end?: number; dt?: number;
                  heterogeneous?: boolean } = {}):
      Promise<CompareResponse> {
    return this.post("/v1/compare",
                     { case_id: caseId, d_b: dB, u0, ...opts });
  }
}

/** Serializes concurrent requests per slot: stale responses resolve null,
 * so the newest edit always wins. */
export class LatestWins {
  private seq = 0;

  async run<T>(task: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    const result = await task();
    return ticket === this.seq ? result : null;
  }
}
