import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, RunSummary } from "../src/api.js";
import { eigenvalueScatter, renderDiagnostics } from "../src/diagnostics.js";
import { jsonResponse, mockFetch } from "./mockFetch.js";

const summary: RunSummary = {
  n_images: 45,
  n_c: 3,
  eigenvalues: [0, 0.001, 0.002, 0.5, 0.55, 0.6],
  gaps: [0.001, 0.001, 0.498, 0.05, 0.05],
  cluster_sizes: [15, 15, 15],
  has_spectrum: false,
  version: 0,
};

let container: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  container = document.createElement("div");
  document.body.append(container);
});

describe("diagnostics panel", () => {
  it("draws the community-count marker at index n_c", () => {
    const svg = eigenvalueScatter(summary);
    const marker = svg.querySelector(".n-c-marker")!;
    expect(marker.getAttribute("data-n-c")).toBe("3");
    // marker x = margin + n_c * step with margin 24, width 460, 6 values
    const step = (460 - 48) / 5;
    expect(Number(marker.getAttribute("x1"))).toBeCloseTo(24 + 3 * step, 6);
    expect(svg.querySelectorAll(".eigenvalue-dot")).toHaveLength(6);
  });

  it("shows a placeholder when report assets are missing", async () => {
    const api = new ApiClient(
      "",
      mockFetch([(url) => (url.endsWith("blocks.json") ? jsonResponse({ detail: "x" }, 404) : null)]),
    );
    await renderDiagnostics(container, api, summary);
    expect(container.querySelector(".heatmap-placeholder")).not.toBeNull();
    expect(container.querySelector(".heatmap-wrap")).toBeNull();
  });

  it("heatmap block count equals n_c from the summary", async () => {
    const api = new ApiClient(
      "",
      mockFetch([
        (url) =>
          url.endsWith("blocks.json")
            ? jsonResponse({ n_c: 3, boundaries: [15, 30, 45], cluster_sizes: [15, 15, 15] })
            : null,
      ]),
    );
    await renderDiagnostics(container, api, summary);
    const caption = container.querySelector(".heatmap-caption")!;
    expect(Number(caption.getAttribute("data-block-count"))).toBe(summary.n_c);
    // dividers sit between consecutive blocks
    expect(container.querySelectorAll(".block-divider-v")).toHaveLength(summary.n_c - 1);
    expect(container.querySelector(".heatmap-image")).not.toBeNull();
  });
});
