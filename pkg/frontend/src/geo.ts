// Ring geometry and GeoJSON conversion for the region editor.

import type { DraftRegion, GeoJsonFeature, GeoJsonFeatureCollection, GeoPt } from "./types.js";

const METERS_PER_DEG_LAT = 111_320.0;

export function metersPerDegLon(lat: number): number {
  return METERS_PER_DEG_LAT * Math.cos((lat * Math.PI) / 180);
}

/** Signed shoelace area of an open ring in squared degrees-ish units;
 * positive means counter-clockwise (RFC 7946 exterior winding). */
export function signedArea(ring: GeoPt[]): number {
  let area = 0;
  const n = ring.length;
  for (let i = 0; i < n; i++) {
    const a = ring[i];
    const b = ring[(i + 1) % n];
    area += a.lon * b.lat - b.lon * a.lat;
  }
  return area / 2;
}

export function normalizeWinding(ring: GeoPt[]): GeoPt[] {
  return signedArea(ring) < 0 ? [...ring].reverse() : [...ring];
}

function orient(ax: number, ay: number, bx: number, by: number, cx: number, cy: number): number {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

function segmentsCross(p1: GeoPt, p2: GeoPt, q1: GeoPt, q2: GeoPt): boolean {
  const d1 = orient(q1.lon, q1.lat, q2.lon, q2.lat, p1.lon, p1.lat);
  const d2 = orient(q1.lon, q1.lat, q2.lon, q2.lat, p2.lon, p2.lat);
  const d3 = orient(p1.lon, p1.lat, p2.lon, p2.lat, q1.lon, q1.lat);
  const d4 = orient(p1.lon, p1.lat, p2.lon, p2.lat, q2.lon, q2.lat);
  return d1 > 0 !== d2 > 0 && d3 > 0 !== d4 > 0;
}

/** Pairwise edge test over non-adjacent edges; fine at editor vertex counts. */
export function isSelfIntersecting(ring: GeoPt[]): boolean {
  const n = ring.length;
  if (n < 4) return false;
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      if (j === i || (j + 1) % n === i || (i + 1) % n === j) continue;
      if (segmentsCross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) {
        return true;
      }
    }
  }
  return false;
}

export function regionToFeature(region: DraftRegion): GeoJsonFeature {
  const ring = normalizeWinding(region.ring);
  const coords = ring.map((p) => [p.lon, p.lat]);
  coords.push([ring[0].lon, ring[0].lat]); // closed per RFC 7946
  return {
    type: "Feature",
    properties: { id: region.id },
    geometry: { type: "Polygon", coordinates: [coords] },
  };
}

export function draftToFeatureCollection(regions: DraftRegion[]): GeoJsonFeatureCollection {
  return { type: "FeatureCollection", features: regions.map(regionToFeature) };
}

/** Import a FeatureCollection into editable drafts. Throws on shapes the
 * editor cannot represent (non-polygons, holes). */
export function featureCollectionToDraft(fc: GeoJsonFeatureCollection): DraftRegion[] {
  if (fc.type !== "FeatureCollection" || !Array.isArray(fc.features)) {
    throw new Error("not a GeoJSON FeatureCollection");
  }
  return fc.features.map((feat, idx) => {
    if (feat.geometry?.type !== "Polygon") {
      throw new Error(`feature ${idx}: only Polygon features are supported`);
    }
    const rings = feat.geometry.coordinates;
    if (!rings?.length) throw new Error(`feature ${idx}: empty polygon`);
    if (rings.length > 1) throw new Error(`feature ${idx}: holes are not supported`);
    let pts = rings[0].map(([lon, lat]) => ({ lat, lon }));
    if (pts.length >= 2) {
      const first = pts[0];
      const last = pts[pts.length - 1];
      if (first.lat === last.lat && first.lon === last.lon) pts = pts.slice(0, -1);
    }
    if (pts.length < 3) throw new Error(`feature ${idx}: needs at least 3 vertices`);
    const id = String(feat.properties?.id ?? `roi_${idx}`);
    const ring = normalizeWinding(pts);
    return { id, ring, selfIntersecting: isSelfIntersecting(ring) };
  });
}

/** Equirectangular projection helpers for the offline map pane. */
export function toLocal(center: GeoPt, p: GeoPt): { x: number; y: number } {
  return {
    x: (p.lon - center.lon) * metersPerDegLon(center.lat),
    y: (p.lat - center.lat) * METERS_PER_DEG_LAT,
  };
}

export function toGeo(center: GeoPt, x: number, y: number): GeoPt {
  return {
    lat: center.lat + y / METERS_PER_DEG_LAT,
    lon: center.lon + x / metersPerDegLon(center.lat),
  };
}
