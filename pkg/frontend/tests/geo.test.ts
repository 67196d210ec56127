import { describe, expect, it } from "vitest";

import {
  draftToFeatureCollection,
  featureCollectionToDraft,
  isSelfIntersecting,
  normalizeWinding,
  signedArea,
  toGeo,
  toLocal,
} from "../src/geo.js";
import type { DraftRegion, GeoPt } from "../src/types.js";

const triangle: GeoPt[] = [
  { lat: 40.0, lon: 23.0 },
  { lat: 40.0, lon: 23.001 },
  { lat: 40.001, lon: 23.0005 },
];

describe("winding", () => {
  it("keeps counter-clockwise rings", () => {
    expect(signedArea(normalizeWinding(triangle))).toBeGreaterThan(0);
  });

  it("reverses clockwise rings", () => {
    const cw = [...triangle].reverse();
    expect(signedArea(cw)).toBeLessThan(0);
    expect(signedArea(normalizeWinding(cw))).toBeGreaterThan(0);
  });
});

describe("self intersection", () => {
  it("accepts simple rings", () => {
    expect(isSelfIntersecting(triangle)).toBe(false);
  });

  it("flags bow ties", () => {
    const bow: GeoPt[] = [
      { lat: 0, lon: 0 },
      { lat: 1, lon: 1 },
      { lat: 0, lon: 1 },
      { lat: 1, lon: 0 },
    ];
    expect(isSelfIntersecting(bow)).toBe(true);
  });
});

describe("GeoJSON round trip", () => {
  it("exports RFC 7946 polygons: closed, counter-clockwise", () => {
    const region: DraftRegion = { id: "a", ring: [...triangle].reverse() };
    const fc = draftToFeatureCollection([region]);
    const coords = fc.features[0].geometry.coordinates[0];
    expect(coords[0]).toEqual(coords[coords.length - 1]);
    const ring = coords.slice(0, -1).map(([lon, lat]) => ({ lat, lon }));
    expect(signedArea(ring)).toBeGreaterThan(0);
  });

  it("re-imports an exported draft identically", () => {
    const regions: DraftRegion[] = [
      { id: "roi_1", ring: normalizeWinding(triangle) },
      {
        id: "roi_2",
        ring: normalizeWinding([
          { lat: 40.01, lon: 23.01 },
          { lat: 40.01, lon: 23.012 },
          { lat: 40.012, lon: 23.012 },
          { lat: 40.012, lon: 23.01 },
        ]),
      },
    ];
    const fc = draftToFeatureCollection(regions);
    const back = featureCollectionToDraft(fc);
    expect(back.map((r) => r.id)).toEqual(["roi_1", "roi_2"]);
    expect(back.map((r) => r.ring)).toEqual(regions.map((r) => r.ring));
  });

  it("rejects holes", () => {
    const fc = draftToFeatureCollection([{ id: "a", ring: triangle }]);
    fc.features[0].geometry.coordinates.push(fc.features[0].geometry.coordinates[0]);
    expect(() => featureCollectionToDraft(fc)).toThrow(/holes/);
  });

  it("rejects non-polygon geometry", () => {
    const fc: any = {
      type: "FeatureCollection",
      features: [
        { type: "Feature", properties: {}, geometry: { type: "Point", coordinates: [23, 40] } },
      ],
    };
    expect(() => featureCollectionToDraft(fc)).toThrow(/Polygon/);
  });
});

describe("projection", () => {
  it("round-trips points", () => {
    const center: GeoPt = { lat: 40.0, lon: 23.0 };
    const p: GeoPt = { lat: 40.004, lon: 22.996 };
    const local = toLocal(center, p);
    const back = toGeo(center, local.x, local.y);
    expect(back.lat).toBeCloseTo(p.lat, 9);
    expect(back.lon).toBeCloseTo(p.lon, 9);
  });

  it("scales a degree of latitude to about 111 km", () => {
    const center: GeoPt = { lat: 40.0, lon: 23.0 };
    const { y } = toLocal(center, { lat: 41.0, lon: 23.0 });
    expect(y).toBeCloseTo(111320, 0);
  });
});
