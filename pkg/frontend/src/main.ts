// Application bootstrap: wire the map pane, parameter form, and plan flow.

import { ApiRequestError, PlannerApi, pollJob } from "./api.js";
import { draftToFeatureCollection, featureCollectionToDraft } from "./geo.js";
import { MapPane, Tool } from "./map.js";
import { renderMetricsPanel, renderPlan } from "./render.js";
import { Session } from "./state.js";
import type { GeoJsonFeatureCollection, MissionParams } from "./types.js";

const session = new Session();
const api = new PlannerApi("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const map = new MapPane(session, el("map-container"));
const metricsPanel = el("metrics");
const statusBar = el("status");
const submitBtn = el<HTMLButtonElement>("plan-btn");

function describeError(e: unknown): string {
  if (e instanceof ApiRequestError) {
    if (e.payload.errors?.length) {
      return e.payload.errors
        .map((err) => (err.feature_index !== undefined ? `region ${err.feature_index}: ` : "") + err.message)
        .join("; ");
    }
    if (e.status === 409) {
      const idx = e.payload.viewpoint_index;
      return `infeasible: ${idx != null ? `region ${idx} is unreachable on one battery` : e.payload.message}`;
    }
    return e.payload.message ?? `request failed (${e.status})`;
  }
  return e instanceof Error ? e.message : String(e);
}

async function submitPlan(): Promise<void> {
  if (!session.canSubmit()) return;
  session.beginSubmit();
  let jobId: string;
  try {
    jobId = await api.submitJob(session.toProblemConfig());
  } catch (e) {
    session.failJob(null, describeError(e));
    return;
  }
  session.beginJob(jobId);
  try {
    const status = await pollJob(api, jobId);
    if (status.status === "done") {
      session.completeJob(jobId, status.result);
    } else {
      const err = "error" in status ? status.error : undefined;
      session.failJob(jobId, err?.message ?? JSON.stringify(err?.errors ?? status.status));
    }
  } catch (e) {
    session.failJob(jobId, describeError(e));
  }
}

function bindParam(id: string, key: keyof MissionParams, parse: (v: string) => number): void {
  const input = el<HTMLInputElement>(id);
  input.addEventListener("change", () => session.setParams({ [key]: parse(input.value) }));
}

function wireControls(): void {
  for (const tool of ["pan", "draw", "depot"] as Tool[]) {
    el<HTMLButtonElement>(`tool-${tool}`).addEventListener("click", () => {
      map.tool = tool;
      updateToolButtons();
    });
  }
  map.svg.addEventListener("tool-changed", updateToolButtons);

  const objective = el<HTMLSelectElement>("param-objective");
  objective.addEventListener("change", () =>
    session.setParams({ objective: objective.value as "MCO" | "BCO" }),
  );
  const fleet = el<HTMLInputElement>("param-uavs");
  fleet.addEventListener("input", () => {
    el("param-uavs-value").textContent = fleet.value;
    session.setParams({ nUavs: Number(fleet.value) });
  });
  bindParam("param-amin", "aMin", Number);
  bindParam("param-amax", "aMax", Number);
  bindParam("param-transit", "transitAltitude", Number);
  bindParam("param-speed", "uHorizontal", Number);
  bindParam("param-vspeed", "uVertical", Number);
  bindParam("param-tmax", "tMax", Number);
  const seed = el<HTMLInputElement>("param-seed");
  seed.addEventListener("change", () =>
    session.setParams({ seed: seed.value === "" ? undefined : Number(seed.value) }),
  );

  submitBtn.addEventListener("click", () => void submitPlan());
  el<HTMLButtonElement>("clear-btn").addEventListener("click", () => session.replaceDraft([]));
  el<HTMLButtonElement>("delete-last-btn").addEventListener("click", () => {
    const last = session.regions[session.regions.length - 1];
    if (last) session.deleteRegion(last.id);
  });

  el<HTMLButtonElement>("export-btn").addEventListener("click", () => {
    const fc = draftToFeatureCollection(session.regions);
    download("regions.geojson", JSON.stringify(fc, null, 2));
  });
  el<HTMLButtonElement>("export-plan-btn").addEventListener("click", () => {
    if (session.plan) download("plan.json", JSON.stringify(session.plan));
  });
  const importInput = el<HTMLInputElement>("import-input");
  importInput.addEventListener("change", async () => {
    const file = importInput.files?.[0];
    if (!file) return;
    try {
      const fc = JSON.parse(await file.text()) as GeoJsonFeatureCollection;
      session.replaceDraft(featureCollectionToDraft(fc));
    } catch (e) {
      statusBar.textContent = `import failed: ${e instanceof Error ? e.message : e}`;
    }
    importInput.value = "";
  });
}

function download(name: string, content: string): void {
  const a = document.createElement("a");
  a.href = URL.createObjectURL(new Blob([content], { type: "application/json" }));
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

function updateToolButtons(): void {
  for (const tool of ["pan", "draw", "depot"]) {
    el(`tool-${tool}`).classList.toggle("active", map.tool === tool);
  }
}

function refresh(): void {
  submitBtn.disabled = !session.canSubmit();
  const issues = session.validate();
  if (session.phase === "submitting" || session.phase === "polling") {
    statusBar.textContent = "planning...";
  } else if (session.phase === "error") {
    statusBar.textContent = session.lastError ?? "planning failed";
  } else if (issues.length) {
    statusBar.textContent = issues[0].message;
  } else {
    statusBar.textContent = session.planStale ? "plan is stale: re-plan" : "ready";
  }
  renderPlan(map, session.plan, session.planStale);
  renderMetricsPanel(metricsPanel, session.plan, session.planStale);
}

session.onChange(refresh);
map.svg.addEventListener("view-changed", () => renderPlan(map, session.plan, session.planStale));
wireControls();
updateToolButtons();
refresh();
void api.health().then((ok) => {
  if (!ok) statusBar.textContent = "planning service unreachable: start `snaproute serve`";
});
