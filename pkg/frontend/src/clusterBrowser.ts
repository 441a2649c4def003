/** Cluster grid: paged thumbnails, cluster-level labeling, per-image override. */

import { ApiClient, ClusterPage } from "./api.js";
import { clear, el, errorBanner } from "./dom.js";

export interface ClusterBrowserOptions {
  clusterId: number;
  page: number;
  pageSize?: number;
  onPageChange?: (page: number) => void;
  onLabeled?: (counts: Record<string, number>) => void;
}

export async function renderClusterBrowser(
  container: HTMLElement,
  api: ApiClient,
  options: ClusterBrowserOptions,
): Promise<void> {
  clear(container);
  const pageSize = options.pageSize ?? 24;
  let data: ClusterPage;
  try {
    data = await api.clusterImages(options.clusterId, options.page, pageSize);
  } catch (err) {
    container.append(errorBanner(`could not load cluster ${options.clusterId}: ${err}`));
    return;
  }

  const header = el(
    "div",
    { class: "cluster-header" },
    el("h2", {}, `Cluster ${data.cluster_id}`),
    el("span", { class: "cluster-count" }, `${data.total} images`),
  );

  const labelInput = el("input", {
    class: "cluster-label-input",
    type: "text",
    placeholder: "label for whole cluster",
  });
  const labelButton = el("button", { class: "cluster-label-button", disabled: "" }, "Label cluster");
  labelInput.addEventListener("input", () => {
    if (labelInput.value.trim()) labelButton.removeAttribute("disabled");
    else labelButton.setAttribute("disabled", "");
  });
  labelButton.addEventListener("click", async () => {
    const label = labelInput.value.trim();
    if (!label) return;
    try {
      const res = await api.labelCluster(data.cluster_id, label);
      options.onLabeled?.(res.effective_counts);
      await renderClusterBrowser(container, api, options);
    } catch (err) {
      container.prepend(errorBanner(`labeling failed: ${err}`));
    }
  });
  const labelBar = el("div", { class: "cluster-label-bar" }, labelInput, labelButton);

  const grid = el("div", { class: "thumb-grid" });
  if (data.images.length === 0) {
    grid.append(el("div", { class: "empty-state" }, "No images on this page."));
  }
  for (const image of data.images) {
    const overrideButton = el("button", { class: "override-button" }, "Override");
    overrideButton.addEventListener("click", async () => {
      const label = window.prompt(`Label for ${image.id}`, image.label ?? "");
      if (label === null || !label.trim()) return;
      try {
        const res = await api.labelImage(image.id, label.trim());
        options.onLabeled?.(res.effective_counts);
        await renderClusterBrowser(container, api, options);
      } catch (err) {
        container.prepend(errorBanner(`override failed: ${err}`));
      }
    });
    grid.append(
      el(
        "figure",
        { class: "thumb-card", "data-image-id": image.id },
        el("img", { src: image.thumbnail, alt: image.id, loading: "lazy" }),
        el(
          "figcaption",
          {},
          el("span", { class: "thumb-id" }, image.id),
          el("span", { class: "thumb-label" }, image.label ?? "unlabeled"),
        ),
        overrideButton,
      ),
    );
  }

  const lastPage = Math.max(0, Math.ceil(data.total / pageSize) - 1);
  const prev = el("button", { class: "page-prev" }, "Prev");
  const next = el("button", { class: "page-next" }, "Next");
  if (data.page === 0) prev.setAttribute("disabled", "");
  if (data.page >= lastPage) next.setAttribute("disabled", "");
  prev.addEventListener("click", () => options.onPageChange?.(data.page - 1));
  next.addEventListener("click", () => options.onPageChange?.(data.page + 1));
  const pager = el(
    "div",
    { class: "pager" },
    prev,
    el("span", {}, `page ${data.page + 1} / ${lastPage + 1}`),
    next,
  );

  container.append(header, labelBar, grid, pager);
}
