/**
 * Typed client for the study service's /api endpoints.
 *
 * The service is the only thing this UI talks to; every call here maps
 * one-to-one onto an endpoint. Pairwise trial payloads are blinded by the
 * server (sides A/B only, no system names), so nothing in this module ever
 * sees a system identity except the results tables.
 */

export type Mode = "ab" | "likert";
export type AbResponse = "A" | "B" | "TIE";

export interface Rendering {
  side?: "A" | "B";
  text: string;
}

export interface ChoiceSchema {
  type: "choice";
  options: AbResponse[];
}

export interface ScaleSchema {
  type: "scale";
  min: number;
  max: number;
}

export interface TrialPayload {
  trial_id: string;
  mode: Mode;
  doc_id: string;
  renderings: Rendering[];
  response_schema: ChoiceSchema | ScaleSchema;
}

export interface EloRow {
  system: string;
  rating: number;
  n: number;
}

export interface EloTable {
  k: number;
  initial: number;
  ratings: EloRow[];
}

export interface LikertRow {
  system: string;
  mean: number;
  std: number;
  n: number;
}

export interface HealthReport {
  status: string;
  documents: number;
  judgments: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body: unknown = await response.json();
    if (
      body !== null &&
      typeof body === "object" &&
      typeof (body as { error?: unknown }).error === "string"
    ) {
      return (body as { error: string }).error;
    }
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return response.statusText || `HTTP ${response.status}`;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  /** Next trial for this participant, or null when the pool is drained. */
  async nextTrial(participant: string, mode: Mode): Promise<TrialPayload | null> {
    const query = new URLSearchParams({ participant, mode });
    const response = await fetch(`${this.baseUrl}/api/trial?${query.toString()}`);
    if (response.status === 204) {
      return null;
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as TrialPayload;
  }

  async submitJudgment(trialId: string, answer: AbResponse | number): Promise<void> {
    const response = await fetch(`${this.baseUrl}/api/judgment`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ trial_id: trialId, response: answer }),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
  }

  async eloResults(): Promise<EloTable> {
    const response = await fetch(`${this.baseUrl}/api/results/elo`);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as EloTable;
  }

  async likertResults(): Promise<{ ratings: LikertRow[] }> {
    const response = await fetch(`${this.baseUrl}/api/results/likert`);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as { ratings: LikertRow[] };
  }

  async health(): Promise<HealthReport> {
    const response = await fetch(`${this.baseUrl}/api/health`);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as HealthReport;
  }
}
