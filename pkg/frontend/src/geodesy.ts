/**
 * WGS84 geodetic <-> local ENU conversions, matching the ground
 * station's math (same algorithms, same operation order) so scene
 * coordinates agree with the server to well under a centimeter.
 */

export const WGS84_A = 6378137.0;
export const WGS84_F = 1.0 / 298.257223563;
export const WGS84_E2 = WGS84_F * (2.0 - WGS84_F);

const DEG = Math.PI / 180.0;

export interface Geodetic {
  lat: number;
  lon: number;
  alt: number;
}

export interface Enu {
  east: number;
  north: number;
  up: number;
}

export function geodeticToEcef(lat: number, lon: number, alt: number): [number, number, number] {
  const latR = lat * DEG;
  const lonR = lon * DEG;
  const sinLat = Math.sin(latR);
  const cosLat = Math.cos(latR);
  const sinLon = Math.sin(lonR);
  const cosLon = Math.cos(lonR);
  const n = WGS84_A / Math.sqrt(1.0 - WGS84_E2 * sinLat * sinLat);
  return [
    (n + alt) * cosLat * cosLon,
    (n + alt) * cosLat * sinLon,
    (n * (1.0 - WGS84_E2) + alt) * sinLat,
  ];
}

export function ecefToGeodetic(x: number, y: number, z: number): Geodetic {
  const p = Math.sqrt(x * x + y * y);
  const lon = Math.atan2(y, x);
  let lat = Math.atan2(z, p * (1.0 - WGS84_E2));
  for (let i = 0; i < 12; i++) {
    const sinLat = Math.sin(lat);
    const n = WGS84_A / Math.sqrt(1.0 - WGS84_E2 * sinLat * sinLat);
    const next = Math.atan2(z + WGS84_E2 * n * sinLat, p);
    const done = Math.abs(next - lat) < 1e-12;
    lat = next;
    if (done) break;
  }
  const sinLat = Math.sin(lat);
  const cosLat = Math.cos(lat);
  const alt = p * cosLat + z * sinLat - WGS84_A * Math.sqrt(1.0 - WGS84_E2 * sinLat * sinLat);
  return { lat: lat / DEG, lon: lon / DEG, alt };
}

/** Mission origin with its cached ECEF position and ENU rotation rows. */
export class GeoOrigin {
  readonly origin: Geodetic;
  private readonly ox: number;
  private readonly oy: number;
  private readonly oz: number;
  private readonly rows: number[];

  constructor(origin: Geodetic) {
    this.origin = origin;
    [this.ox, this.oy, this.oz] = geodeticToEcef(origin.lat, origin.lon, origin.alt);
    const latR = origin.lat * DEG;
    const lonR = origin.lon * DEG;
    const sinLat = Math.sin(latR);
    const cosLat = Math.cos(latR);
    const sinLon = Math.sin(lonR);
    const cosLon = Math.cos(lonR);
    this.rows = [
      -sinLon, cosLon, 0.0,
      -sinLat * cosLon, -sinLat * sinLon, cosLat,
      cosLat * cosLon, cosLat * sinLon, sinLat,
    ];
  }

  toLocal(g: Geodetic): Enu {
    const [x, y, z] = geodeticToEcef(g.lat, g.lon, g.alt);
    const dx = x - this.ox;
    const dy = y - this.oy;
    const dz = z - this.oz;
    const r = this.rows;
    return {
      east: r[0] * dx + r[1] * dy + r[2] * dz,
      north: r[3] * dx + r[4] * dy + r[5] * dz,
      up: r[6] * dx + r[7] * dy + r[8] * dz,
    };
  }

  toGeodetic(p: Enu): Geodetic {
    const r = this.rows;
    const x = this.ox + r[0] * p.east + r[3] * p.north + r[6] * p.up;
    const y = this.oy + r[1] * p.east + r[4] * p.north + r[7] * p.up;
    const z = this.oz + r[2] * p.east + r[5] * p.north + r[8] * p.up;
    return ecefToGeodetic(x, y, z);
  }
}

export function enuDistance(a: Enu, b: Enu): number {
  return Math.hypot(a.east - b.east, a.north - b.north, a.up - b.up);
}
