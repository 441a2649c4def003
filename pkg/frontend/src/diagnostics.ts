/** Diagnostics: eigenvalue scatter with the cluster-count marker, plus the
 * reordered similarity heatmap with block dividers. Purely informational;
 * renders placeholders when report assets are absent. */

import { ApiClient, RunSummary } from "./api.js";
import { clear, el, errorBanner } from "./dom.js";

const PLOT_WIDTH = 460;
const PLOT_HEIGHT = 180;
const MARGIN = 24;

export function eigenvalueScatter(summary: RunSummary): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${PLOT_WIDTH} ${PLOT_HEIGHT}`);
  svg.setAttribute("class", "eigenvalue-scatter");
  const values = summary.eigenvalues;
  const peak = Math.max(...values, 1e-12);
  const step = (PLOT_WIDTH - 2 * MARGIN) / Math.max(values.length - 1, 1);
  values.forEach((value, index) => {
    const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
    dot.setAttribute("cx", String(MARGIN + index * step));
    dot.setAttribute("cy", String(PLOT_HEIGHT - MARGIN - (value / peak) * (PLOT_HEIGHT - 2 * MARGIN)));
    dot.setAttribute("r", "3");
    dot.setAttribute("class", "eigenvalue-dot");
    svg.append(dot);
  });
  // vertical marker at the chosen community count
  const marker = document.createElementNS("http://www.w3.org/2000/svg", "line");
  const x = MARGIN + summary.n_c * step;
  marker.setAttribute("x1", String(x));
  marker.setAttribute("x2", String(x));
  marker.setAttribute("y1", String(MARGIN / 2));
  marker.setAttribute("y2", String(PLOT_HEIGHT - MARGIN / 2));
  marker.setAttribute("class", "n-c-marker");
  marker.setAttribute("data-n-c", String(summary.n_c));
  svg.append(marker);
  return svg;
}

export async function renderDiagnostics(
  container: HTMLElement,
  api: ApiClient,
  summary: RunSummary,
): Promise<void> {
  clear(container);
  container.append(el("h2", {}, "Diagnostics"));
  try {
    container.append(eigenvalueScatter(summary));
  } catch (err) {
    container.append(errorBanner(`eigenvalue plot failed: ${err}`));
  }

  const blocks = await api.blocks().catch(() => null);
  if (blocks === null) {
    container.append(
      el("div", { class: "heatmap-placeholder" }, "Report assets not generated yet."),
    );
    return;
  }

  const heatmap = el("div", { class: "heatmap-wrap" });
  heatmap.append(
    el("img", {
      class: "heatmap-image",
      src: api.reportAssetUrl("heatmap_reordered.png"),
      alt: "reordered similarity matrix",
    }),
  );
  const total = blocks.boundaries[blocks.boundaries.length - 1] ?? 1;
  // dividers between consecutive blocks (none after the last)
  for (const boundary of blocks.boundaries.slice(0, -1)) {
    const pct = (boundary / total) * 100;
    heatmap.append(
      el("div", { class: "block-divider block-divider-v", style: `left:${pct}%` }),
      el("div", { class: "block-divider block-divider-h", style: `top:${pct}%` }),
    );
  }
  container.append(
    el(
      "div",
      { class: "heatmap-caption", "data-block-count": String(blocks.n_c) },
      `${blocks.n_c} communities, sizes ${blocks.cluster_sizes.join(", ")}`,
    ),
    heatmap,
  );
}
