import { describe, expect, it } from "vitest";
import { GeoOrigin, enuDistance, type Enu } from "../src/geodesy.js";

const ORIGIN = new GeoOrigin({ lat: 37.875, lon: -122.259, alt: 30.0 });

// Frozen from the ground station's geodesy (same origin); agreement must
// be far inside the 1 cm criterion.
const SERVER_CASES: { enu: [number, number, number]; geodetic: [number, number, number] }[] = [
  { enu: [0, 0, 0], geodetic: [37.875000000000064, -122.25899999999999, 30.0] },
  { enu: [100.0, 0.0, 0.0], geodetic: [37.87499999451377, -122.25786340066229, 30.000782933086157] },
  { enu: [0.0, 110.95, 0.0], geodetic: [37.87599959776782, -122.25899999999999, 30.000967832282186] },
  { enu: [-250.5, 375.25, 42.0], geodetic: [37.8783807362653, -122.26184729273938, 72.01598382368684] },
  { enu: [1234.5, -987.6, 15.0], geodetic: [37.866101451220736, -122.2449704018832, 45.196002600714564] },
];

const M_PER_DEG = 111_320;

describe("geodesy", () => {
  it("matches the server's conversions to well under 1 cm", () => {
    for (const { enu, geodetic } of SERVER_CASES) {
      const g = ORIGIN.toGeodetic({ east: enu[0], north: enu[1], up: enu[2] });
      expect(Math.abs(g.lat - geodetic[0]) * M_PER_DEG).toBeLessThan(1e-6);
      expect(Math.abs(g.lon - geodetic[1]) * M_PER_DEG).toBeLessThan(1e-6);
      expect(Math.abs(g.alt - geodetic[2])).toBeLessThan(1e-6);
      const back = ORIGIN.toLocal({ lat: geodetic[0], lon: geodetic[1], alt: geodetic[2] });
      expect(enuDistance(back, { east: enu[0], north: enu[1], up: enu[2] })).toBeLessThan(1e-6);
    }
  });

  it("round-trips random points within 5 km to < 1e-6 m", () => {
    let seed = 12345;
    const rand = () => {
      // deterministic LCG so failures reproduce
      seed = (seed * 1664525 + 1013904223) >>> 0;
      return seed / 2 ** 32;
    };
    for (let i = 0; i < 2000; i++) {
      const p: Enu = {
        east: (rand() - 0.5) * 10_000,
        north: (rand() - 0.5) * 10_000,
        up: rand() * 1000 - 100,
      };
      const round = ORIGIN.toLocal(ORIGIN.toGeodetic(p));
      expect(enuDistance(round, p)).toBeLessThan(1e-6);
    }
  });

  it("pure-up displacement maps to altitude", () => {
    const g = ORIGIN.toGeodetic({ east: 0, north: 0, up: 25 });
    expect(Math.abs(g.lat - 37.875) * M_PER_DEG).toBeLessThan(1e-6);
    expect(g.alt).toBeCloseTo(55.0, 6);
  });
});
