// Screen <-> map-frame transform. Strokes must leave the client in map
// meters, never pixels, so the transform is the one place pixels exist.

import type { MapDocument } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
  padding?: number;
}

export interface MapBounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export function mapBounds(map: MapDocument): MapBounds {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const region of map.regions) {
    for (const [x, y] of region.polygon) {
      minX = Math.min(minX, x);
      minY = Math.min(minY, y);
      maxX = Math.max(maxX, x);
      maxY = Math.max(maxY, y);
    }
  }
  if (!isFinite(minX)) return { minX: 0, minY: 0, maxX: 1, maxY: 1 };
  return { minX, minY, maxX, maxY };
}

/**
 * Uniform-scale fit of the map into a viewport, y flipped so map north is
 * screen up. Round-trips exactly up to floating point.
 */
export class MapTransform {
  readonly scale: number;
  readonly offsetX: number;
  readonly offsetY: number;
  private readonly bounds: MapBounds;

  constructor(map: MapDocument, viewport: Viewport) {
    const pad = viewport.padding ?? 16;
    this.bounds = mapBounds(map);
    const spanX = Math.max(this.bounds.maxX - this.bounds.minX, 1e-9);
    const spanY = Math.max(this.bounds.maxY - this.bounds.minY, 1e-9);
    this.scale = Math.min(
      (viewport.width - 2 * pad) / spanX,
      (viewport.height - 2 * pad) / spanY,
    );
    this.offsetX = pad - this.bounds.minX * this.scale;
    this.offsetY = viewport.height - pad + this.bounds.minY * this.scale;
  }

  toScreen(mx: number, my: number): [number, number] {
    return [mx * this.scale + this.offsetX, this.offsetY - my * this.scale];
  }

  toMap(sx: number, sy: number): [number, number] {
    return [(sx - this.offsetX) / this.scale, (this.offsetY - sy) / this.scale];
  }
}

export function pointInPolygon(point: [number, number], polygon: [number, number][]): boolean {
  const [x, y] = point;
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const [x1, y1] = polygon[i];
    const [x2, y2] = polygon[j];
    if (y1 > y !== y2 > y && x < ((x2 - x1) * (y - y1)) / (y2 - y1) + x1) {
      inside = !inside;
    }
  }
  return inside;
}

/** Region under a map-frame point, or null; used only for display hints. */
export function regionAt(map: MapDocument, point: [number, number]): string | null {
  let best: string | null = null;
  let bestArea = Infinity;
  for (const region of map.regions) {
    if (!pointInPolygon(point, region.polygon)) continue;
    const area = polygonArea(region.polygon);
    if (area < bestArea) {
      best = region.id;
      bestArea = area;
    }
  }
  return best;
}

export function polygonArea(polygon: [number, number][]): number {
  let total = 0;
  for (let i = 0; i < polygon.length; i++) {
    const [x1, y1] = polygon[i];
    const [x2, y2] = polygon[(i + 1) % polygon.length];
    total += x1 * y2 - x2 * y1;
  }
  return Math.abs(total) / 2;
}
