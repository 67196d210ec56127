// Session state: the editable problem draft, the last plan, job tracking.
//
// The UI is a pure view over service responses: nothing here rewrites plan
// data, and a response is dropped when its job id has been superseded.

import { draftToFeatureCollection, isSelfIntersecting } from "./geo.js";
import type {
  DraftRegion,
  GeoPt,
  MissionParams,
  MissionPlan,
  ProblemConfig,
} from "./types.js";
import { DEFAULT_PARAMS } from "./types.js";

export type PlanPhase = "idle" | "submitting" | "polling" | "done" | "error";

export interface ValidationIssue {
  field: string;
  message: string;
}

export class Session {
  regions: DraftRegion[] = [];
  depot: GeoPt | null = null;
  params: MissionParams = { ...DEFAULT_PARAMS };
  plan: MissionPlan | null = null;
  planStale = false;
  phase: PlanPhase = "idle";
  lastError: string | null = null;
  private nextId = 1;
  private activeJob: string | null = null;
  private listeners: (() => void)[] = [];

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  // -- draft editing ---------------------------------------------------------

  addRegion(ring: GeoPt[]): DraftRegion {
    const region: DraftRegion = {
      id: `roi_${this.nextId++}`,
      ring,
      selfIntersecting: isSelfIntersecting(ring),
    };
    this.regions.push(region);
    this.markStale();
    this.emit();
    return region;
  }

  moveVertex(regionId: string, index: number, p: GeoPt): void {
    const region = this.regions.find((r) => r.id === regionId);
    if (!region || index < 0 || index >= region.ring.length) return;
    region.ring[index] = p;
    region.selfIntersecting = isSelfIntersecting(region.ring);
    this.markStale();
    this.emit();
  }

  deleteRegion(regionId: string): void {
    this.regions = this.regions.filter((r) => r.id !== regionId);
    this.markStale();
    this.emit();
  }

  setDepot(p: GeoPt): void {
    this.depot = p;
    this.markStale();
    this.emit();
  }

  setParams(update: Partial<MissionParams>): void {
    this.params = { ...this.params, ...update };
    this.markStale();
    this.emit();
  }

  replaceDraft(regions: DraftRegion[]): void {
    this.regions = regions;
    this.nextId = regions.length + 1;
    this.markStale();
    this.emit();
  }

  private markStale(): void {
    if (this.plan) this.planStale = true;
  }

  // -- validation (client side, mirrors the server's 422 rules) --------------

  validate(): ValidationIssue[] {
    const issues: ValidationIssue[] = [];
    if (this.regions.length === 0) {
      issues.push({ field: "rois", message: "draw at least one region" });
    }
    for (const r of this.regions) {
      if (r.ring.length < 3) {
        issues.push({ field: "rois", message: `${r.id}: needs at least 3 vertices` });
      }
      if (r.selfIntersecting) {
        issues.push({ field: "rois", message: `${r.id}: boundary crosses itself` });
      }
    }
    if (!this.depot) issues.push({ field: "depot", message: "place the launch position" });
    if (!(this.params.aMin < this.params.aMax)) {
      issues.push({ field: "a_max", message: "minimum altitude must be below maximum" });
    }
    if (this.params.nUavs < 1) issues.push({ field: "n_uavs", message: "need at least one UAV" });
    return issues;
  }

  canSubmit(): boolean {
    return this.validate().length === 0 && this.phase !== "submitting" && this.phase !== "polling";
  }

  toProblemConfig(): ProblemConfig {
    if (!this.depot) throw new Error("no depot set");
    const cfg: ProblemConfig = {
      rois: draftToFeatureCollection(this.regions),
      depot: this.depot,
      a_min: this.params.aMin,
      a_max: this.params.aMax,
      transit_altitude: this.params.transitAltitude,
      objective: this.params.objective,
      n_uavs: this.params.nUavs,
      u_horizontal: this.params.uHorizontal,
      u_vertical: this.params.uVertical,
      t_max: this.params.tMax,
      elevation: { kind: "flat", z0: 0 },
    };
    if (this.params.seed !== undefined) cfg.seed = this.params.seed;
    return cfg;
  }

  // -- job lifecycle ----------------------------------------------------------

  /** Register a new in-flight job; any previous job becomes stale. */
  beginJob(jobId: string): void {
    this.activeJob = jobId;
    this.phase = "polling";
    this.lastError = null;
    this.emit();
  }

  beginSubmit(): void {
    this.phase = "submitting";
    this.lastError = null;
    this.emit();
  }

  /** Accept a finished plan only if it belongs to the active job. */
  completeJob(jobId: string, plan: MissionPlan): boolean {
    if (jobId !== this.activeJob) return false; // superseded: discard
    this.plan = plan;
    this.planStale = false;
    this.phase = "done";
    this.activeJob = null;
    this.emit();
    return true;
  }

  failJob(jobId: string | null, message: string): void {
    if (jobId !== null && jobId !== this.activeJob) return;
    this.phase = "error";
    this.lastError = message;
    this.activeJob = null;
    this.emit();
  }
}
