// @vitest-environment node
//
// End-to-end labeling round trip against a live service: detect a run on
// the bundled dataset, serve it, label a cluster, override one member, and
// download the export - the CSV must reflect both within the same cycle.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";

const PORT = 8493;
const BASE = `http://127.0.0.1:${PORT}`;
const DATASET = resolve(__dirname, "..", "..", "data", "synthetic3");

let workdir: string;
let server: ChildProcess | null = null;
const api = new ApiClient(BASE);

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/api/run`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("service did not come up within 30s");
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "wavecomm-e2e-"));
  const run = join(workdir, "run");
  execFileSync(
    "wavecomm",
    ["detect", DATASET, "--out", run, "--size", "64x64", "--seed", "7", "--no-save-coeffs"],
    { stdio: "pipe" },
  );
  execFileSync("wavecomm", ["report", "--run", run], { stdio: "pipe" });
  server = spawn("wavecomm", ["serve", "--run", run, "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForService();
});

afterAll(() => {
  server?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe("labeling round trip over the live service", () => {
  it("labels a cluster, overrides one member, and the export reflects both", async () => {
    const summary = await api.runSummary();
    expect(summary.n_c).toBe(3);
    expect(summary.n_images).toBe(45);

    const page = await api.clusterImages(0, 0, 50);
    expect(page.total).toBe(15);
    const member = page.images[0].id;

    const labeled = await api.labelCluster(0, "frontal");
    expect(labeled.effective_counts["frontal"]).toBe(15);

    const overridden = await api.labelImage(member, "lateral");
    expect(overridden.effective_counts["frontal"]).toBe(14);
    expect(overridden.effective_counts["lateral"]).toBe(1);

    const csv = await api.exportCsv();
    const rows = csv.trim().split("\n").slice(1);
    expect(rows).toHaveLength(45);
    const byId = new Map(rows.map((row) => [row.split(",")[0], row.split(",")[2]]));
    expect(byId.get(member)).toBe("lateral");
    const clusterLabels = page.images.slice(1).map((img) => byId.get(img.id));
    expect(new Set(clusterLabels)).toEqual(new Set(["frontal"]));
  });

  it("serves thumbnails and report assets the UI embeds", async () => {
    const page = await api.clusterImages(1, 0, 1);
    const thumb = await fetch(`${BASE}${page.images[0].thumbnail}`);
    expect(thumb.status).toBe(200);
    expect(thumb.headers.get("content-type")).toBe("image/png");

    const blocks = await api.blocks();
    expect(blocks?.n_c).toBe(3);
    const heatmap = await fetch(api.reportAssetUrl("heatmap_reordered.png"));
    expect(heatmap.status).toBe(200);
  });

  it("rejects stale optimistic writes with 409", async () => {
    const res = await fetch(`${BASE}/api/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ cluster_id: 1, label: "x", base_version: 0 }),
    });
    expect(res.status).toBe(409);
  });

  it("spectrum endpoint reports absence cleanly for this run", async () => {
    expect(await api.spectrum()).toBeNull();
  });
});
