// End-to-end flow against a live planning service. Skipped unless
// SNAPROUTE_URL points at one, e.g.:
//   snaproute serve --addr 127.0.0.1:8931 &
//   SNAPROUTE_URL=http://127.0.0.1:8931 npx vitest run tests/integration.test.ts

import { describe, expect, it } from "vitest";

import { PlannerApi, pollJob } from "../src/api.js";
import { Session } from "../src/state.js";
import type { GeoPt, MissionPlan } from "../src/types.js";

const baseUrl = process.env.SNAPROUTE_URL;

function squareRing(lat: number, lon: number, halfM = 40): GeoPt[] {
  const dLat = halfM / 111320;
  const dLon = halfM / (111320 * Math.cos((lat * Math.PI) / 180));
  return [
    { lat: lat - dLat, lon: lon - dLon },
    { lat: lat - dLat, lon: lon + dLon },
    { lat: lat + dLat, lon: lon + dLon },
    { lat: lat + dLat, lon: lon - dLon },
  ];
}

function draftSession(): Session {
  const session = new Session();
  session.addRegion(squareRing(40.001, 23.0));
  session.addRegion(squareRing(39.999, 23.001, 30));
  session.addRegion(squareRing(40.0, 22.998, 35));
  session.setDepot({ lat: 40.0, lon: 23.0 });
  session.setParams({ seed: 77, nUavs: 1 });
  return session;
}

async function planViaJobFlow(session: Session, api: PlannerApi): Promise<MissionPlan> {
  const config = session.toProblemConfig();
  (config as Record<string, unknown>).anneal = { max_evals: 1200 };
  (config as Record<string, unknown>).routing_time_budget = 0.3;
  const jobId = await api.submitJob(config);
  session.beginJob(jobId);
  const status = await pollJob(api, jobId, { intervalMs: 150 });
  if (status.status !== "done") throw new Error(`job ended ${status.status}`);
  session.completeJob(jobId, status.result);
  return status.result;
}

describe.skipIf(!baseUrl)("live service round trip", () => {
  it("health check answers", async () => {
    const api = new PlannerApi(baseUrl!);
    expect(await api.health()).toBe(true);
  });

  it("a drawn draft plans through the job flow and renders data", async () => {
    const api = new PlannerApi(baseUrl!);
    const session = draftSession();
    expect(session.canSubmit()).toBe(true);
    const plan = await planViaJobFlow(session, api);
    // everything the map and panel draw is present
    expect(plan.viewpoints).toHaveLength(3);
    for (const vp of plan.viewpoints) {
      expect(vp.footprint.geo).toHaveLength(4);
    }
    expect(plan.trajectories.length).toBeGreaterThanOrEqual(1);
    expect(plan.metrics.per_roi).toHaveLength(3);
    expect(session.plan).toBe(plan);
    expect(session.planStale).toBe(false);
  });

  it("objective toggle and fleet change re-plan with visibly different results", async () => {
    const api = new PlannerApi(baseUrl!);
    const session = draftSession();
    const mco = await planViaJobFlow(session, api);

    session.setParams({ objective: "BCO" });
    expect(session.planStale).toBe(true);
    const bco = await planViaJobFlow(session, api);
    // balanced objective trades recall for precision; footprints move
    expect(bco.metrics.aggregate.mean_precision).toBeGreaterThan(
      mco.metrics.aggregate.mean_precision,
    );
    expect(JSON.stringify(bco.viewpoints)).not.toEqual(JSON.stringify(mco.viewpoints));

    session.setParams({ objective: "MCO", nUavs: 3 });
    const fleet3 = await planViaJobFlow(session, api);
    expect(fleet3.trajectories.length).toBeGreaterThan(mco.trajectories.length);
    expect(fleet3.metrics.aggregate.mission_time_s).toBeLessThanOrEqual(
      mco.metrics.aggregate.mission_time_s + 1e-9,
    );
  });

  it("a self-intersecting region is rejected with its feature index", async () => {
    const api = new PlannerApi(baseUrl!);
    const session = draftSession();
    // bypass client-side validation to prove the server names the feature
    session.regions[1].ring = [
      { lat: 39.999, lon: 23.001 },
      { lat: 39.9995, lon: 23.0015 },
      { lat: 39.999, lon: 23.0015 },
      { lat: 39.9995, lon: 23.001 },
    ];
    const err = await api.submitJob(session.toProblemConfig()).catch((e) => e);
    expect(err.status).toBe(422);
    expect(err.payload.errors.some((e: any) => e.feature_index === 1)).toBe(true);
  });
});
