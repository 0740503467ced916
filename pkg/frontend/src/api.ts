// Typed client for the mtsearch REST API. Every response carries the
// session's round counter; callers use it to detect staleness.

export interface DatasetInfo {
  dataset_id: string;
  n: number;
  d: number;
  track_names: string[];
}

export type OverviewPoint = [number, number, number, number]; // time, min, max, mean

export interface OverviewResponse {
  dataset_id: string;
  n: number;
  points: number;
  tracks: Record<string, OverviewPoint[]>;
}

export interface SessionInfo {
  session_id: string;
  n_windows: number;
  model_digest: string;
  round: number;
}

export interface TopHit {
  window: number;
  start: number;
  score: number;
}

export interface PrototypeJson {
  mean: number[][];
  min: number[][];
  max: number[][];
  count: number;
}

export interface ResultSummary {
  round: number;
  stale: boolean;
  histogram: number[];
  expansions_used: number;
  n_windows: number;
  n_candidates: number;
  top: TopHit[];
  weight: number[];
  query_provenance: string | null;
  bin?: { index: number; prototype: PrototypeJson | null; count: number };
}

export interface TableSummaryJson {
  table: number;
  empty: boolean;
  histogram: number[];
  prototype: PrototypeJson | null;
}

export interface SampleJson {
  window: number;
  start: number;
  score: number;
  kind: "exploit" | "explore";
  values: number[][];
}

export interface TreeNodeJson {
  id: number;
  parent: number | null;
  children: number[];
  n_labels: number;
}

export interface TreeResponse {
  round: number;
  cursor: number;
  nodes: TreeNodeJson[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = "http_error";
    let message = resp.statusText;
    try {
      const body = await resp.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, code, message);
  }
  return resp.json() as Promise<T>;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl + path;
  }

  async uploadDataset(csv: string): Promise<DatasetInfo> {
    return unwrap(
      await fetch(this.url("/datasets"), {
        method: "POST",
        headers: { "content-type": "text/csv" },
        body: csv,
      }),
    );
  }

  async overview(datasetId: string, tracks: string[], points: number): Promise<OverviewResponse> {
    const params = new URLSearchParams({ points: String(points) });
    if (tracks.length) params.set("tracks", tracks.join(","));
    return unwrap(
      await fetch(this.url(`/datasets/${datasetId}/overview?${params}`)),
    );
  }

  async createSession(
    datasetId: string,
    t: number,
    stride = 1,
    seed = 0,
    config?: Record<string, unknown>,
  ): Promise<SessionInfo> {
    return unwrap(
      await fetch(this.url("/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ dataset_id: datasetId, t, stride, seed, config }),
      }),
    );
  }

  async setQuery(sessionId: string, start: number): Promise<ResultSummary> {
    return unwrap(
      await fetch(this.url(`/sessions/${sessionId}/query`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ start }),
      }),
    );
  }

  async results(sessionId: string, cutoff = 50, bin?: number): Promise<ResultSummary> {
    const params = new URLSearchParams({ cutoff: String(cutoff) });
    if (bin !== undefined) params.set("bin", String(bin));
    return unwrap(await fetch(this.url(`/sessions/${sessionId}/results?${params}`)));
  }

  async tables(sessionId: string): Promise<{ round: number; tables: TableSummaryJson[] }> {
    return unwrap(await fetch(this.url(`/sessions/${sessionId}/tables`)));
  }

  async samples(sessionId: string, k = 3, explore = 3): Promise<{ round: number; samples: SampleJson[] }> {
    const params = new URLSearchParams({ k: String(k), explore: String(explore) });
    return unwrap(await fetch(this.url(`/sessions/${sessionId}/samples?${params}`)));
  }

  async postLabels(
    sessionId: string,
    samples: Record<number, string>,
    tables: Record<number, string>,
  ): Promise<{ round: number; pending_samples: number; pending_tables: number }> {
    return unwrap(
      await fetch(this.url(`/sessions/${sessionId}/labels`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ samples, tables }),
      }),
    );
  }

  async train(sessionId: string): Promise<ResultSummary> {
    return unwrap(
      await fetch(this.url(`/sessions/${sessionId}/train`), { method: "POST" }),
    );
  }

  async tree(sessionId: string): Promise<TreeResponse> {
    return unwrap(await fetch(this.url(`/sessions/${sessionId}/tree`)));
  }

  async treeJump(sessionId: string, nodeId: number): Promise<ResultSummary> {
    return unwrap(
      await fetch(this.url(`/sessions/${sessionId}/tree`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ node_id: nodeId }),
      }),
    );
  }
}
