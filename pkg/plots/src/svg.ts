/** Deterministic SVG writer: fixed decimal places, no timestamps or ids. */

import { Prim, Scene } from "./scene";

const FONT = 'font-family="monospace" font-size="13px"';

function n(x: number): string {
  return x.toFixed(2).replace(/\.00$/, "");
}

function prim(p: Prim): string {
  switch (p.kind) {
    case "rect":
      return `<rect x="${n(p.x)}" y="${n(p.y)}" width="${n(p.w)}" height="${n(p.h)}" fill="${p.color}"/>`;
    case "line":
      return `<line x1="${n(p.x1)}" y1="${n(p.y1)}" x2="${n(p.x2)}" y2="${n(p.y2)}" stroke="${p.color}" stroke-width="${p.width}"/>`;
    case "polyline": {
      const pts = p.points.map(([x, y]) => `${n(x)},${n(y)}`).join(" ");
      return `<polyline points="${pts}" fill="none" stroke="${p.color}" stroke-width="${p.width}"/>`;
    }
    case "text": {
      const anchor = p.anchor === "start" ? "" : ` text-anchor="${p.anchor}"`;
      return `<text x="${n(p.x)}" y="${n(p.y)}" ${FONT} fill="${p.color}"${anchor}>${escapeXml(p.text)}</text>`;
    }
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function toSvg(scene: Scene): string {
  const body = scene.prims.map(prim).join("\n  ");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">
  <rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="#ffffff"/>
  ${body}
</svg>
`;
}
