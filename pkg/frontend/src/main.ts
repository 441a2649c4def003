/** App wiring: sidebar of clusters, main pane, spectrum strip, diagnostics. */

import { ApiClient } from "./api.js";
import { renderClusterBrowser } from "./clusterBrowser.js";
import { renderDiagnostics } from "./diagnostics.js";
import { clear, el, errorBanner } from "./dom.js";
import { renderSpectrumStrip } from "./spectrumStrip.js";
import { initialState, navigate, setPage, ViewState } from "./state.js";

export async function startApp(root: HTMLElement, api: ApiClient = new ApiClient()): Promise<void> {
  clear(root);
  let state: ViewState = initialState();

  let summary;
  try {
    summary = await api.runSummary();
  } catch (err) {
    root.append(errorBanner(`no run loaded: ${err}`));
    return;
  }

  const sidebar = el("nav", { class: "sidebar" }, el("h1", {}, "Communities"));
  const main = el("main", { class: "main-pane" });
  const strip = el("section", { class: "spectrum-pane" });
  const diagnostics = el("section", { class: "diagnostics-pane" });
  const status = el("div", { class: "status-bar" }, `${summary.n_images} images, ${summary.n_c} communities`);

  const showCluster = async (clusterId: number) => {
    state = navigate(state, clusterId);
    await renderClusterBrowser(main, api, {
      clusterId,
      page: state.page,
      onPageChange: async (page) => {
        state = setPage(state, page);
        await renderClusterBrowser(main, api, {
          clusterId,
          page,
          onPageChange: (p) => showClusterPage(clusterId, p),
          onLabeled: updateCounts,
        });
      },
      onLabeled: updateCounts,
    });
  };

  const showClusterPage = async (clusterId: number, page: number) => {
    state = setPage(state, page);
    await showCluster(clusterId);
  };

  const updateCounts = (counts: Record<string, number>) => {
    clear(status);
    const parts = Object.entries(counts)
      .map(([label, count]) => `${label}: ${count}`)
      .join(", ");
    status.append(`${summary.n_images} images, ${summary.n_c} communities - ${parts || "unlabeled"}`);
  };

  summary.cluster_sizes.forEach((size, clusterId) => {
    const link = el("button", { class: "cluster-link" }, `Cluster ${clusterId} (${size})`);
    link.addEventListener("click", () => void showCluster(clusterId));
    sidebar.append(link);
  });

  root.append(status, sidebar, main, strip, diagnostics);
  await Promise.all([
    showCluster(0),
    renderSpectrumStrip(strip, api, {
      onOverride: async (imageId, label) => {
        const res = await api.labelImage(imageId, label);
        updateCounts(res.effective_counts);
      },
    }),
    renderDiagnostics(diagnostics, api, summary),
  ]);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void startApp(document.getElementById("app") as HTMLElement);
}
