/** Scanline rasterizer for scene primitives: integer pixels, no
 * anti-aliasing, hence bit-identical output for identical scenes. */

import { GLYPH_H, GLYPH_W, glyph } from "./font";
import { Prim, Scene } from "./scene";

const TEXT_SCALE = 2;
const ADVANCE = (GLYPH_W + 1) * TEXT_SCALE;

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array; // RGB, 3 bytes per pixel

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.data[i] = rgb[0];
    this.data[i + 1] = rgb[1];
    this.data[i + 2] = rgb[2];
  }

  fillRect(x: number, y: number, w: number, h: number, rgb: [number, number, number]): void {
    const x0 = Math.round(x);
    const y0 = Math.round(y);
    const x1 = Math.round(x + w);
    const y1 = Math.round(y + h);
    for (let yy = y0; yy < y1; yy++) {
      for (let xx = x0; xx < x1; xx++) this.set(xx, yy, rgb);
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, rgb: [number, number, number],
       width: number): void {
    // Bresenham on rounded endpoints; thickness grows as a square pen
    let x = Math.round(x1);
    let y = Math.round(y1);
    const xe = Math.round(x2);
    const ye = Math.round(y2);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    const r = Math.max(0, Math.floor(width / 2));
    for (;;) {
      for (let oy = -r; oy <= r; oy++) {
        for (let ox = -r; ox <= r; ox++) this.set(x + ox, y + oy, rgb);
      }
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  text(x: number, y: number, s: string, rgb: [number, number, number],
       anchor: "start" | "middle" | "end"): void {
    const w = s.length * ADVANCE;
    let px = Math.round(anchor === "start" ? x : anchor === "middle" ? x - w / 2 : x - w);
    const py = Math.round(y - GLYPH_H * TEXT_SCALE + 2); // y is the baseline
    for (const ch of s) {
      const rows = glyph(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if (rows[gy] & (1 << (GLYPH_W - 1 - gx))) {
            this.fillRect(px + gx * TEXT_SCALE, py + gy * TEXT_SCALE,
                          TEXT_SCALE, TEXT_SCALE, rgb);
          }
        }
      }
      px += ADVANCE;
    }
  }
}

function hexColor(c: string): [number, number, number] {
  const v = parseInt(c.slice(1), 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

export function rasterize(scene: Scene): Raster {
  const img = new Raster(scene.width, scene.height);
  for (const p of scene.prims) {
    switch (p.kind) {
      case "rect":
        img.fillRect(p.x, p.y, p.w, p.h, hexColor(p.color));
        break;
      case "line":
        img.line(p.x1, p.y1, p.x2, p.y2, hexColor(p.color), p.width);
        break;
      case "polyline":
        for (let i = 1; i < p.points.length; i++) {
          img.line(p.points[i - 1][0], p.points[i - 1][1],
                   p.points[i][0], p.points[i][1], hexColor(p.color), p.width);
        }
        break;
      case "text":
        img.text(p.x, p.y, p.text, hexColor(p.color), p.anchor);
        break;
    }
  }
  return img;
}
