"""KML export of a mission plan for inspection in mapping tools."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .mission import Action, MissionPlan

# aabbggrr KML colors cycled across UAVs
_COLORS = ["ff0000ff", "ff00a5ff", "ff00ff00", "ffff0000", "ffff00ff", "ff00ffff", "ff8000ff"]


def plan_to_kml(plan: MissionPlan) -> str:
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<kml xmlns="http://www.opengis.net/kml/2.2">',
        "<Document>",
        f"<name>{escape('mission plan')}</name>",
    ]
    for idx, traj in enumerate(plan.trajectories):
        color = _COLORS[idx % len(_COLORS)]
        label = f"UAV {traj.uav_id} mission {traj.mission_index}"
        parts.append(f"<Folder><name>{escape(label)}</name>")
        coords = " ".join(
            f"{w.geo.lon:.8f},{w.geo.lat:.8f},{w.alt_amsl:.2f}" for w in traj.waypoints
        )
        parts.append(
            "<Placemark>"
            f"<name>{escape(label + ' path')}</name>"
            f"<Style><LineStyle><color>{color}</color><width>3</width></LineStyle></Style>"
            "<LineString><altitudeMode>absolute</altitudeMode>"
            f"<coordinates>{coords}</coordinates></LineString></Placemark>"
        )
        for w in traj.waypoints:
            if w.action is not Action.CAPTURE:
                continue
            desc = (
                f"region {w.roi_id}: yaw {w.yaw_deg:.1f} deg, "
                f"{w.alt_agl:.1f} m above ground ({w.alt_amsl:.1f} m AMSL)"
            )
            parts.append(
                "<Placemark>"
                f"<name>{escape('capture ' + str(w.roi_id))}</name>"
                f"<description>{escape(desc)}</description>"
                "<Point><altitudeMode>absolute</altitudeMode>"
                f"<coordinates>{w.geo.lon:.8f},{w.geo.lat:.8f},{w.alt_amsl:.2f}</coordinates>"
                "</Point></Placemark>"
            )
        parts.append("</Folder>")
    parts.append("</Document></kml>")
    return "\n".join(parts)
