// Shared shapes for the planning API and the editor state.

export interface GeoPt {
  lat: number;
  lon: number;
}

export interface DraftRegion {
  id: string;
  ring: GeoPt[]; // open ring (no repeated closing vertex)
  selfIntersecting?: boolean;
}

export interface MissionParams {
  objective: "MCO" | "BCO";
  nUavs: number;
  aMin: number;
  aMax: number;
  transitAltitude: number;
  uHorizontal: number;
  uVertical: number;
  tMax: number;
  seed?: number;
}

export const DEFAULT_PARAMS: MissionParams = {
  objective: "MCO",
  nUavs: 1,
  aMin: 10,
  aMax: 120,
  transitAltitude: 60,
  uHorizontal: 10,
  uVertical: 3,
  tMax: 1500,
};

export interface ProblemConfig {
  rois: GeoJsonFeatureCollection;
  depot: GeoPt;
  a_min: number;
  a_max: number;
  transit_altitude: number;
  objective: string;
  n_uavs: number;
  u_horizontal: number;
  u_vertical: number;
  t_max: number;
  elevation?: { kind: string; [k: string]: unknown };
  anneal?: { max_evals?: number };
  seed?: number;
  [k: string]: unknown;
}

export interface GeoJsonFeature {
  type: "Feature";
  properties: { id?: string; [k: string]: unknown };
  geometry: { type: "Polygon"; coordinates: number[][][] };
}

export interface GeoJsonFeatureCollection {
  type: "FeatureCollection";
  features: GeoJsonFeature[];
}

// Mission plan response (the fields the UI renders).
export interface PlanViewpoint {
  roi_id: string;
  viewpoint: { x: number; y: number; z_agl: number; yaw_deg: number; z_amsl: number | null };
  geo: GeoPt;
  footprint: { local: { x: number; y: number }[]; geo: GeoPt[] };
  best_score: number;
}

export interface PlanWaypoint {
  geo: GeoPt;
  local: { x: number; y: number };
  alt_amsl: number;
  alt_agl: number;
  yaw_deg: number;
  action: "takeoff" | "transit" | "capture" | "land";
  roi_id: string | null;
}

export interface PlanTrajectory {
  uav_id: number;
  mission_index: number;
  layer_altitude_agl: number;
  waypoints: PlanWaypoint[];
  estimated_duration: number;
  estimated_battery: number;
  path_length: number;
}

export interface RegionMetrics {
  roi_id: string;
  recall: number;
  precision: number;
  gsd_cm_px: number;
}

export interface MissionPlan {
  frame: { origin: GeoPt; meters_per_deg_lat: number; meters_per_deg_lon: number };
  config: { seed: number; [k: string]: unknown };
  viewpoints: PlanViewpoint[];
  trajectories: PlanTrajectory[];
  metrics: {
    per_roi: RegionMetrics[];
    aggregate: {
      makespan_s: number;
      mission_time_s: number;
      missions_multiplier: number;
      mean_recall: number;
      mean_precision: number;
      mean_gsd_cm_px: number;
      n_waves: number;
    };
    conflicts: { violations: unknown[] };
  };
  missions_multiplier: number;
}

export type JobStatus =
  | { status: "queued" | "running" }
  | { status: "done"; result: MissionPlan }
  | { status: "failed" | "infeasible"; error?: ApiError };

export interface ApiError {
  kind?: string;
  message?: string;
  errors?: { field: string; message: string; feature_index?: number }[];
  viewpoint_index?: number | null;
  doubling_trace?: unknown[];
}
