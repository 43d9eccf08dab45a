/**
 * Per-iteration metrics chart as a small inline SVG.
 *
 * Every plotted value is written verbatim into a data attribute, so the
 * chart can be checked against the service response without parsing pixel
 * coordinates.
 */
import { MetricsRow } from "./api.js";

const SERIES: { key: keyof MetricsRow; color: string }[] = [
  { key: "re", color: "#1f77b4" },
  { key: "fd", color: "#d62728" },
  { key: "precision", color: "#2ca02c" },
  { key: "recall", color: "#9467bd" },
];

const WIDTH = 420;
const HEIGHT = 200;
const PAD = 28;

export function renderMetricsChart(container: HTMLElement, rows: MetricsRow[]): void {
  container.textContent = "";
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "metrics-chart");

  if (rows.length === 0) {
    container.appendChild(svg);
    return;
  }
  const maxIteration = Math.max(...rows.map((r) => r.iteration));
  const x = (iteration: number) =>
    PAD + ((iteration - 1) / Math.max(1, maxIteration - 1)) * (WIDTH - 2 * PAD);
  const y = (value: number) => HEIGHT - PAD - (value / 100) * (HEIGHT - 2 * PAD);

  for (const series of SERIES) {
    const path = rows
      .map((row) => `${x(row.iteration)},${y(Number(row[series.key]))}`)
      .join(" ");
    const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
    line.setAttribute("points", path);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", series.color);
    line.setAttribute("data-series", series.key);
    svg.appendChild(line);
    for (const row of rows) {
      const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
      dot.setAttribute("cx", String(x(row.iteration)));
      dot.setAttribute("cy", String(y(Number(row[series.key]))));
      dot.setAttribute("r", "2.5");
      dot.setAttribute("fill", series.color);
      dot.setAttribute("data-series", series.key);
      dot.setAttribute("data-iteration", String(row.iteration));
      dot.setAttribute("data-value", String(row[series.key]));
      svg.appendChild(dot);
    }
  }
  container.appendChild(svg);
}

/** The values the chart is currently displaying, keyed by series. */
export function chartValues(container: HTMLElement): Record<string, number[]> {
  const values: Record<string, number[]> = {};
  container.querySelectorAll("circle[data-series]").forEach((dot) => {
    const series = dot.getAttribute("data-series") ?? "";
    (values[series] ??= []).push(Number(dot.getAttribute("data-value")));
  });
  return values;
}
