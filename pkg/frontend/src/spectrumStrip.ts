/** Severity-axis strip: images placed by position, borderline band shaded. */

import { ApiClient, SpectrumPayload, SpectrumRow } from "./api.js";
import { clear, el, errorBanner } from "./dom.js";

export interface SpectrumStripOptions {
  band?: number; // half-width of the highlighted borderline band
  onOverride?: (imageId: string, label: string) => void;
}

/** Rows sorted by position, the order the strip renders left to right. */
export function stripOrder(payload: SpectrumPayload): SpectrumRow[] {
  return [...payload.images].sort(
    (a, b) => a.position - b.position || a.id.localeCompare(b.id),
  );
}

export async function renderSpectrumStrip(
  container: HTMLElement,
  api: ApiClient,
  options: SpectrumStripOptions = {},
): Promise<void> {
  clear(container);
  let payload: SpectrumPayload | null;
  try {
    payload = await api.spectrum();
  } catch (err) {
    container.append(errorBanner(`could not load spectrum: ${err}`));
    return;
  }
  if (payload === null) {
    container.append(
      el("div", { class: "spectrum-missing" }, "No severity spectrum for this run."),
    );
    return;
  }

  const rows = stripOrder(payload);
  const extent = Math.max(...rows.map((r) => Math.abs(r.position)), 1e-12);
  const band = options.band ?? 0;

  const axis = el("div", { class: "spectrum-axis" });
  axis.append(el("div", { class: "spectrum-borderline", style: "left:50%" }));
  if (band > 0) {
    const halfWidthPct = Math.min(50, (band / extent) * 50);
    axis.append(
      el("div", {
        class: "spectrum-band",
        style: `left:${50 - halfWidthPct}%;width:${2 * halfWidthPct}%`,
      }),
    );
  }

  const detail = el("div", { class: "spectrum-detail" });
  for (const row of rows) {
    const leftPct = 50 + (row.position / extent) * 50;
    const marker = el("button", {
      class:
        "spectrum-marker" +
        (Math.abs(row.position) < band ? " in-band" : "") +
        (row.flags.includes("borderline") ? " flagged-borderline" : "") +
        (row.flags.includes("isolated") ? " flagged-isolated" : ""),
      style: `left:${leftPct}%`,
      title: row.id,
      "data-image-id": row.id,
      "data-position": String(row.position),
    });
    marker.addEventListener("click", () => {
      clear(detail);
      const overrideButton = el("button", { class: "spectrum-override" }, "Override label");
      overrideButton.addEventListener("click", () => {
        const label = window.prompt(`Label for ${row.id}`, row.label);
        if (label !== null && label.trim()) options.onOverride?.(row.id, label.trim());
      });
      detail.append(
        el("img", { src: `/api/image?id=${encodeURIComponent(row.id)}&size=full`, alt: row.id }),
        el(
          "dl",
          { class: "spectrum-facts" },
          el("dt", {}, "image"),
          el("dd", {}, row.id),
          el("dt", {}, "class"),
          el("dd", {}, row.label),
          el("dt", {}, "in-class similarity"),
          el("dd", {}, row.in.toFixed(4)),
          el("dt", {}, "out-class similarity"),
          el("dd", {}, row.out.toFixed(4)),
          el("dt", {}, "position"),
          el("dd", {}, row.position.toFixed(4)),
          el("dt", {}, "flags"),
          el("dd", {}, row.flags.join(", ") || "none"),
        ),
        overrideButton,
      );
    });
    axis.append(marker);
  }

  container.append(
    el("h2", {}, `Severity spectrum (positive: ${payload.positive_class})`),
    axis,
    detail,
  );
}
