// Plan rendering: footprints, per-UAV trajectories, capture markers, and
// the metrics side panel. Pure view: draws exactly what the service sent.

import type { MapPane } from "./map.js";
import type { MissionPlan } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const UAV_COLORS = ["#e4572e", "#17bebb", "#ffc914", "#2e282a", "#76b041", "#9b5de5", "#00b4d8"];

export function renderPlan(map: MapPane, plan: MissionPlan | null, stale: boolean): void {
  const layer = map.planGroup;
  layer.innerHTML = "";
  if (!plan) return;
  layer.setAttribute("opacity", stale ? "0.35" : "1.0");

  for (const traj of plan.trajectories) {
    const color = UAV_COLORS[(traj.uav_id + (traj.mission_index - 1) * 3) % UAV_COLORS.length];
    const pts = traj.waypoints.map((w) => {
      const s = map.toScreen(w.geo);
      return `${s.x.toFixed(1)},${s.y.toFixed(1)}`;
    });
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute("d", `M${pts.join(" L")}`);
    path.setAttribute("class", "trajectory");
    path.setAttribute("stroke", color);
    path.setAttribute("stroke-dasharray", traj.mission_index > 1 ? "6 4" : "");
    layer.appendChild(path);
  }

  for (const vp of plan.viewpoints) {
    const ring = vp.footprint.geo.map((g) => {
      const s = map.toScreen(g);
      return `${s.x.toFixed(1)},${s.y.toFixed(1)}`;
    });
    const fp = document.createElementNS(SVG_NS, "path");
    fp.setAttribute("d", `M${ring.join(" L")} Z`);
    fp.setAttribute("class", "footprint");
    layer.appendChild(fp);

    const s = map.toScreen(vp.geo);
    const marker = document.createElementNS(SVG_NS, "g");
    marker.setAttribute("transform", `translate(${s.x}, ${s.y}) rotate(${-vp.viewpoint.yaw_deg})`);
    const glyph = document.createElementNS(SVG_NS, "path");
    glyph.setAttribute("d", "M0,-7 L4,5 L0,2 L-4,5 Z"); // camera heading glyph
    glyph.setAttribute("class", "capture-glyph");
    marker.appendChild(glyph);
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${vp.roi_id}: z=${vp.viewpoint.z_agl.toFixed(1)} m, yaw=${vp.viewpoint.yaw_deg.toFixed(1)} deg`;
    marker.appendChild(title);
    layer.appendChild(marker);
  }
}

function fmtMin(seconds: number): string {
  return `${(seconds / 60).toFixed(1)} min`;
}

export function renderMetricsPanel(el: HTMLElement, plan: MissionPlan | null, stale: boolean): void {
  if (!plan) {
    el.innerHTML = "<p class='hint'>No plan yet. Draw regions, place the depot, then plan.</p>";
    return;
  }
  const agg = plan.metrics.aggregate;
  const conflicts = plan.metrics.conflicts.violations.length;
  const rows = plan.metrics.per_roi
    .map(
      (m) => `
      <tr><td>${m.roi_id}</td>
        <td>${(100 * m.recall).toFixed(1)}%</td>
        <td>${(100 * m.precision).toFixed(1)}%</td>
        <td>${m.gsd_cm_px.toFixed(2)}</td></tr>`,
    )
    .join("");
  const batteries = plan.trajectories
    .map(
      (t) =>
        `<li>UAV ${t.uav_id} (wave ${t.mission_index}): ${fmtMin(t.estimated_duration)}, ` +
        `${(100 * t.estimated_battery).toFixed(0)}% battery, ${(t.path_length / 1000).toFixed(2)} km</li>`,
    )
    .join("");
  el.innerHTML = `
    ${stale ? "<p class='stale-note'>Parameters changed; plan is stale. Re-plan to refresh.</p>" : ""}
    <dl class="summary">
      <dt>Mission time</dt><dd data-metric="mission-time">${fmtMin(agg.mission_time_s)}</dd>
      <dt>Makespan</dt><dd>${fmtMin(agg.makespan_s)}</dd>
      <dt>Relaunches</dt><dd data-metric="multiplier">&times;${plan.missions_multiplier}</dd>
      <dt>Mean recall</dt><dd>${(100 * agg.mean_recall).toFixed(1)}%</dd>
      <dt>Mean precision</dt><dd>${(100 * agg.mean_precision).toFixed(1)}%</dd>
      <dt>Mean GSD</dt><dd>${agg.mean_gsd_cm_px.toFixed(2)} cm/px</dd>
      <dt>Conflicts</dt><dd>${conflicts === 0 ? "none" : `${conflicts} found`}</dd>
      <dt>Seed</dt><dd>${plan.config.seed}</dd>
    </dl>
    <table class="per-region">
      <thead><tr><th>region</th><th>recall</th><th>precision</th><th>GSD</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    <ul class="batteries">${batteries}</ul>`;
}
