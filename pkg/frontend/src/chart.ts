// Minimal SVG power-curve rendering. Scaling maps service numbers to
// pixels; every label shown is a value taken verbatim from the response.

import type { CurveResponse } from "./api.js";

const W = 360;
const H = 180;
const PAD = 34;

export function renderCurve(container: HTMLElement, curve: CurveResponse): void {
  container.textContent = "";
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.setAttribute("width", String(W));
  svg.setAttribute("height", String(H));
  svg.setAttribute("role", "img");

  const xs = curve.rows.map((r) => r[0]);
  const ys = curve.rows.map((r) => r[1]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const sx = (x: number) =>
    PAD + ((x - xMin) / (xMax - xMin || 1)) * (W - 2 * PAD);
  const sy = (y: number) =>
    H - PAD - ((y - yMin) / (yMax - yMin || 1)) * (H - 2 * PAD);

  const line = document.createElementNS(svg.namespaceURI, "polyline");
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "#2a6fb0");
  line.setAttribute("stroke-width", "2");
  line.setAttribute(
    "points",
    curve.rows.map(([x, y]) => `${sx(x).toFixed(1)},${sy(y).toFixed(1)}`).join(" "),
  );
  svg.appendChild(line);

  const labels: Array<[number, number, string]> = [
    [PAD, H - 8, String(xMin)],
    [W - PAD, H - 8, String(xMax)],
    [4, H - PAD, String(yMin)],
    [4, PAD, String(yMax)],
  ];
  for (const [x, y, text] of labels) {
    const el = document.createElementNS(svg.namespaceURI, "text");
    el.setAttribute("x", String(x));
    el.setAttribute("y", String(y));
    el.setAttribute("font-size", "10");
    el.textContent = text;
    svg.appendChild(el);
  }
  const caption = document.createElement("div");
  caption.className = "chart-caption";
  caption.textContent = `${curve.y} vs ${curve.x}`;
  container.appendChild(svg);
  container.appendChild(caption);
}
