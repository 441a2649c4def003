/** Typed client for the labeling service JSON API. */

export interface RunSummary {
  n_images: number;
  n_c: number;
  eigenvalues: number[];
  gaps: number[];
  cluster_sizes: number[];
  has_spectrum: boolean;
  version: number;
}

export interface ImageCard {
  id: string;
  label: string | null;
  position: number | null;
  thumbnail: string;
  full: string;
}

export interface ClusterPage {
  cluster_id: number;
  total: number;
  page: number;
  page_size: number;
  images: ImageCard[];
}

export interface LabelResponse {
  version: number;
  effective_counts: Record<string, number>;
  unlabeled: number;
}

export interface SpectrumRow {
  id: string;
  label: string;
  in: number;
  out: number;
  position: number;
  flags: string[];
}

export interface SpectrumPayload {
  images: SpectrumRow[];
  classes: string[];
  positive_class: string;
}

export interface BlockInfo {
  n_c: number;
  boundaries: number[];
  cluster_sizes: number[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep statusText
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async runSummary(): Promise<RunSummary> {
    return asJson(await this.fetchImpl(this.url("/api/run")));
  }

  async clusterImages(clusterId: number, page = 0, pageSize = 24): Promise<ClusterPage> {
    const query = `?page=${page}&page_size=${pageSize}`;
    return asJson(
      await this.fetchImpl(this.url(`/api/clusters/${clusterId}/images${query}`)),
    );
  }

  async labelCluster(clusterId: number, label: string): Promise<LabelResponse> {
    return this.postLabel({ cluster_id: clusterId, label });
  }

  async labelImage(imageId: string, label: string): Promise<LabelResponse> {
    return this.postLabel({ image_id: imageId, label });
  }

  private async postLabel(body: Record<string, unknown>): Promise<LabelResponse> {
    return asJson(
      await this.fetchImpl(this.url("/api/labels"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  /** null when the run has no severity-axis report. */
  async spectrum(): Promise<SpectrumPayload | null> {
    const res = await this.fetchImpl(this.url("/api/spectrum"));
    if (res.status === 404) return null;
    return asJson(res);
  }

  /** null when report assets have not been generated. */
  async blocks(): Promise<BlockInfo | null> {
    const res = await this.fetchImpl(this.url("/api/report/blocks.json"));
    if (res.status === 404) return null;
    return asJson(res);
  }

  async exportCsv(): Promise<string> {
    const res = await this.fetchImpl(this.url("/api/export"));
    if (!res.ok) throw new ApiError(res.status, res.statusText);
    return res.text();
  }

  reportAssetUrl(name: string): string {
    return this.url(`/api/report/${name}`);
  }
}
