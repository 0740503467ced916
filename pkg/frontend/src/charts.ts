// Small SVG chart builders: min/max band + mean line (exactly the shape the
// prototype and overview endpoints deliver) and the colored histogram.

import { OverviewPoint, PrototypeJson } from "./api.js";
import { binColor } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

export function makeSvg(width: number, height: number): SVGSVGElement {
  return svgEl("svg", { width, height, viewBox: `0 0 ${width} ${height}` });
}

interface Scale {
  (v: number): number;
}

function linScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function bandPath(
  xs: number[],
  lows: number[],
  highs: number[],
  x: Scale,
  y: Scale,
): string {
  const up = xs.map((v, i) => `${i ? "L" : "M"}${x(v)},${y(highs[i])}`).join("");
  const down = xs
    .map((v, i) => `L${x(v)},${y(lows[i])}`)
    .reverse()
    .join("");
  return up + down + "Z";
}

export function linePath(xs: number[], ys: number[], x: Scale, y: Scale): string {
  return xs.map((v, i) => `${i ? "L" : "M"}${x(v)},${y(ys[i])}`).join("");
}

const TRACK_COLORS = ["#3a6ea5", "#b0413e", "#2e7d32", "#8e6fbd", "#c07f00", "#3f7f7f"];

export function trackColor(j: number): string {
  return TRACK_COLORS[j % TRACK_COLORS.length];
}

// One track's downsampled overview band; markers drawn by the caller.
export function drawOverviewTrack(
  svg: SVGSVGElement,
  points: OverviewPoint[],
  trackIndex: number,
  width: number,
  height: number,
  y0: number,
) {
  const xs = points.map((p) => p[0]);
  const lows = points.map((p) => p[1]);
  const highs = points.map((p) => p[2]);
  const means = points.map((p) => p[3]);
  const x = linScale(xs[0], xs[xs.length - 1], 0, width);
  const y = linScale(Math.min(...lows), Math.max(...highs), y0 + height, y0);
  const color = trackColor(trackIndex);
  svg.appendChild(
    svgEl("path", { d: bandPath(xs, lows, highs, x, y), fill: color, opacity: 0.25 }),
  );
  svg.appendChild(
    svgEl("path", {
      d: linePath(xs, means, x, y),
      stroke: color,
      fill: "none",
      "stroke-width": 1,
    }),
  );
}

// Multi-track window curves (query, samples): one polyline per track.
export function drawWindowCurves(
  container: HTMLElement,
  values: number[][],
  width = 180,
  height = 70,
) {
  const svg = makeSvg(width, height);
  const t = values.length;
  const d = values[0]?.length ?? 0;
  const flat = values.flat();
  const y = linScale(Math.min(...flat), Math.max(...flat), height - 2, 2);
  const x = linScale(0, t - 1, 2, width - 2);
  for (let j = 0; j < d; j++) {
    const ys = values.map((row) => row[j]);
    svg.appendChild(
      svgEl("path", {
        d: linePath([...Array(t).keys()], ys, x, y),
        stroke: trackColor(j),
        fill: "none",
        "stroke-width": 1,
      }),
    );
  }
  container.appendChild(svg);
}

// Prototype: mean line inside its min/max variance band, per track.
export function drawPrototype(
  container: HTMLElement,
  proto: PrototypeJson,
  width = 260,
  height = 100,
) {
  const svg = makeSvg(width, height);
  const t = proto.mean.length;
  const d = proto.mean[0]?.length ?? 0;
  const flat = proto.min.flat().concat(proto.max.flat());
  const y = linScale(Math.min(...flat), Math.max(...flat), height - 2, 2);
  const x = linScale(0, t - 1, 2, width - 2);
  const xs = [...Array(t).keys()];
  for (let j = 0; j < d; j++) {
    svg.appendChild(
      svgEl("path", {
        d: bandPath(xs, proto.min.map((r) => r[j]), proto.max.map((r) => r[j]), x, y),
        fill: trackColor(j),
        opacity: 0.2,
      }),
    );
    svg.appendChild(
      svgEl("path", {
        d: linePath(xs, proto.mean.map((r) => r[j]), x, y),
        stroke: trackColor(j),
        fill: "none",
        "stroke-width": 1.2,
      }),
    );
  }
  container.appendChild(svg);
}

export function drawHistogram(
  container: HTMLElement,
  counts: number[],
  onBinClick?: (bin: number) => void,
  width = 260,
  height = 90,
) {
  const svg = makeSvg(width, height);
  const max = Math.max(...counts, 1);
  const barW = width / counts.length;
  counts.forEach((c, i) => {
    const h = (c / max) * (height - 14);
    const rect = svgEl("rect", {
      x: i * barW + 1,
      y: height - h - 12,
      width: barW - 2,
      height: h,
      fill: binColor(i, counts.length),
    });
    rect.addEventListener("click", () => onBinClick?.(i));
    if (onBinClick) rect.setAttribute("class", "clickable");
    svg.appendChild(rect);
    const label = svgEl("text", {
      x: i * barW + barW / 2,
      y: height - 2,
      "text-anchor": "middle",
      "font-size": 8,
    });
    label.textContent = String(i);
    svg.appendChild(label);
  });
  container.appendChild(svg);
}
