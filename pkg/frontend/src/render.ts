// Minimal DOM/SVG rendering. Values are printed exactly as the API returned
// them (toFixed for display only); all aggregation happened server-side.

import type { LineSeries, DisparityBadge } from "./charts.js";
import type { GraphLayout } from "./layout.js";
import type { Lexicon, TopicSummary } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PALETTE = ["#2563eb", "#dc2626", "#16a34a", "#9333ea", "#ea580c", "#0891b2", "#4d7c0f", "#be185d"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderTopicList(
  container: HTMLElement,
  topics: TopicSummary[],
  onSelect: (topicId: number) => void,
): void {
  container.replaceChildren();
  for (const topic of topics) {
    const row = el("div", topic.labeled ? "topic" : "topic unlabeled");
    row.appendChild(el("span", "topic-id", `#${topic.topic_id}`));
    row.appendChild(
      el("span", "topic-terms", topic.top_terms.map((t) => t.token).join(" ")),
    );
    row.appendChild(
      el("span", "topic-label", topic.need_label ?? "⚠ unlabeled"),
    );
    row.addEventListener("click", () => onSelect(topic.topic_id));
    container.appendChild(row);
  }
}

export function renderLexiconTable(container: HTMLElement, lexicon: Lexicon): void {
  container.replaceChildren();
  const table = el("table", "lexicon");
  const head = el("tr");
  for (const h of ["need", "kind", "topics", "keywords", "concept"]) {
    head.appendChild(el("th", undefined, h));
  }
  table.appendChild(head);
  for (const label of Object.keys(lexicon.entries).sort()) {
    const entry = lexicon.entries[label];
    const tr = el("tr");
    tr.appendChild(el("td", undefined, label));
    tr.appendChild(el("td", undefined, entry.kind));
    tr.appendChild(el("td", undefined, entry.topic_ids.join(", ")));
    tr.appendChild(el("td", undefined, entry.keywords.join(", ")));
    tr.appendChild(el("td", undefined, entry.moa_concept ?? "unresolved"));
    table.appendChild(tr);
  }
  container.appendChild(table);
}

/** Simple multi-series line chart as inline SVG. */
export function renderLineChart(
  container: HTMLElement,
  series: LineSeries[],
  opts: { width?: number; height?: number; min?: number; max?: number } = {},
): void {
  const width = opts.width ?? 480;
  const height = opts.height ?? 220;
  const pad = 36;
  const values = series.flatMap((s) => s.points.map((p) => p.value));
  const min = opts.min ?? Math.min(0, ...values);
  const max = opts.max ?? Math.max(1e-9, ...values);
  const waves = series[0]?.points.map((p) => p.wave) ?? [];

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  const sx = (i: number) =>
    pad + (waves.length > 1 ? (i * (width - 2 * pad)) / (waves.length - 1) : 0);
  const sy = (v: number) => height - pad - ((v - min) * (height - 2 * pad)) / (max - min);

  series.forEach((s, idx) => {
    const path = document.createElementNS(SVG_NS, "polyline");
    path.setAttribute(
      "points",
      s.points.map((p, i) => `${sx(i)},${sy(p.value)}`).join(" "),
    );
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", PALETTE[idx % PALETTE.length]);
    path.setAttribute("stroke-width", "2");
    path.setAttribute("data-series", s.name);
    svg.appendChild(path);
  });
  waves.forEach((wave, i) => {
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(sx(i)));
    label.setAttribute("y", String(height - 8));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("font-size", "11");
    label.textContent = wave;
    svg.appendChild(label);
  });
  container.replaceChildren(svg);

  const legend = el("div", "legend");
  series.forEach((s, idx) => {
    const item = el("span", "legend-item", s.name);
    item.style.color = PALETTE[idx % PALETTE.length];
    legend.appendChild(item);
  });
  container.appendChild(legend);
}

export function renderDisparityBadges(container: HTMLElement, badges: DisparityBadge[]): void {
  container.replaceChildren();
  for (const badge of badges) {
    container.appendChild(el("span", "disparity-badge", badge.text));
  }
}

export function renderGraph(container: HTMLElement, layout: GraphLayout): void {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  for (const edge of layout.edges) {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(edge.x1));
    line.setAttribute("y1", String(edge.y1));
    line.setAttribute("x2", String(edge.x2));
    line.setAttribute("y2", String(edge.y2));
    line.setAttribute("stroke", "#94a3b8");
    svg.appendChild(line);
  }
  for (const node of layout.nodes) {
    const g = document.createElementNS(SVG_NS, "g");
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", "6");
    circle.setAttribute("fill", PALETTE[node.column % PALETTE.length]);
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(node.x + 10));
    text.setAttribute("y", String(node.y + 4));
    text.setAttribute("font-size", "11");
    text.textContent = node.label;
    g.appendChild(circle);
    g.appendChild(text);
    svg.appendChild(g);
  }
  container.replaceChildren(svg);
}

export function renderEmptyState(container: HTMLElement, command: string): void {
  container.replaceChildren(
    el("div", "empty-state", `No analytics yet — run \`${command}\` and reload.`),
  );
}
