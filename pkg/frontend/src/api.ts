// Thin client for the planning service.

import type { ApiError, JobStatus, MissionPlan, ProblemConfig } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public payload: ApiError,
  ) {
    super(payload.message ?? `request failed with status ${status}`);
  }
}

export class PlannerApi {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async health(): Promise<boolean> {
    try {
      const r = await this.fetchFn(`${this.baseUrl}/health`);
      if (!r.ok) return false;
      const body = await r.json();
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  /** Submit a planning job; resolves to the job id. 422/409 raise with the
   * machine-readable payload so the UI can point at the offending input. */
  async submitJob(config: ProblemConfig): Promise<string> {
    const r = await this.fetchFn(`${this.baseUrl}/plan?mode=job`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    if (r.status === 202) {
      const body = await r.json();
      return body.job_id as string;
    }
    throw new ApiRequestError(r.status, await r.json());
  }

  async planSync(config: ProblemConfig): Promise<MissionPlan> {
    const r = await this.fetchFn(`${this.baseUrl}/plan`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    if (r.ok) return (await r.json()) as MissionPlan;
    throw new ApiRequestError(r.status, await r.json());
  }

  async jobStatus(jobId: string): Promise<JobStatus> {
    const r = await this.fetchFn(`${this.baseUrl}/jobs/${jobId}`);
    if (!r.ok) throw new ApiRequestError(r.status, await r.json());
    return (await r.json()) as JobStatus;
  }
}

/** Poll a job until it leaves the queued/running states. */
export async function pollJob(
  api: PlannerApi,
  jobId: string,
  opts: { intervalMs?: number; maxAttempts?: number; sleep?: (ms: number) => Promise<void> } = {},
): Promise<JobStatus> {
  const interval = opts.intervalMs ?? 500;
  const maxAttempts = opts.maxAttempts ?? 600;
  const sleep = opts.sleep ?? ((ms) => new Promise((res) => setTimeout(res, ms)));
  for (let i = 0; i < maxAttempts; i++) {
    const status = await api.jobStatus(jobId);
    if (status.status !== "queued" && status.status !== "running") return status;
    await sleep(interval);
  }
  throw new Error(`job ${jobId} did not finish after ${maxAttempts} polls`);
}
