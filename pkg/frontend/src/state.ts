// Session controller: all UI state transitions live here, DOM-free, so the
// views stay thin projections and the loop is testable headless.

import {
  ApiClient,
  ResultSummary,
  SampleJson,
  TableSummaryJson,
  TreeResponse,
} from "./api.js";

export type SampleLabel = "positive" | "indecisive" | "negative";
export type TableLabel = "important" | "indecisive";

export interface ViewState {
  selectedTracks: string[];
  viewport: { start: number; end: number };
  querySpan: { start: number; length: number } | null;
  pendingSamples: Record<number, SampleLabel>;
  pendingTables: Record<number, TableLabel>;
  round: number;
  cursor: number;
  cutoff: number;
}

export type Listener = () => void;

// Histogram bars are color scaled green -> red strictly by bin index.
export function binColor(bin: number, bins = 10): string {
  const frac = bins <= 1 ? 0 : bin / (bins - 1);
  const hue = 120 * (1 - frac); // 120 = green, 0 = red
  return `hsl(${hue.toFixed(1)}, 70%, 45%)`;
}

export class SessionController {
  state: ViewState = {
    selectedTracks: [],
    viewport: { start: 0, end: 0 },
    querySpan: null,
    pendingSamples: {},
    pendingTables: {},
    round: 0,
    cursor: 0,
    cutoff: 50,
  };

  sessionId = "";
  datasetId = "";
  t = 0;
  n = 0;
  results: ResultSummary | null = null;
  samples: SampleJson[] = [];
  tables: TableSummaryJson[] = [];
  tree: TreeResponse | null = null;
  trainInFlight = false;

  private listeners: Listener[] = [];

  constructor(public api: ApiClient) {}

  onChange(fn: Listener) {
    this.listeners.push(fn);
  }

  private emit() {
    for (const fn of this.listeners) fn();
  }

  async startSession(datasetId: string, n: number, t: number, seed = 0) {
    const info = await this.api.createSession(datasetId, t, 1, seed);
    this.sessionId = info.session_id;
    this.datasetId = datasetId;
    this.t = t;
    this.n = n;
    this.state.round = info.round;
    this.state.viewport = { start: 0, end: n };
    this.emit();
    return info;
  }

  // Query-by-example: select a region in the overview.
  async selectQueryRegion(start: number) {
    const res = await this.api.setQuery(this.sessionId, start);
    this.state.querySpan = { start, length: this.t };
    this.state.pendingSamples = {};
    this.state.pendingTables = {};
    await this.adopt(res);
  }

  private async adopt(res: ResultSummary) {
    this.results = res;
    this.state.round = res.round;
    [this.samples, this.tables, this.tree] = await Promise.all([
      this.api.samples(this.sessionId).then((r) => r.samples),
      this.api.tables(this.sessionId).then((r) => r.tables),
      this.api.tree(this.sessionId),
    ]);
    this.state.cursor = this.tree.cursor;
    this.emit();
  }

  // Labels post immediately so a hard refresh mid-round loses nothing; the
  // server buffers them until Train.
  async labelSample(window: number, label: SampleLabel) {
    this.state.pendingSamples[window] = label;
    await this.api.postLabels(this.sessionId, { [window]: label }, {});
    this.emit();
  }

  async labelTable(table: number, label: TableLabel) {
    this.state.pendingTables[table] = label;
    await this.api.postLabels(this.sessionId, {}, { [table]: label });
    this.emit();
  }

  pendingCount(): number {
    return (
      Object.keys(this.state.pendingSamples).length +
      Object.keys(this.state.pendingTables).length
    );
  }

  // One Train click: synchronous round; inputs stay disabled while in flight.
  async train(): Promise<ResultSummary> {
    if (this.trainInFlight) throw new Error("train already in flight");
    this.trainInFlight = true;
    try {
      const res = await this.api.train(this.sessionId);
      this.state.pendingSamples = {};
      this.state.pendingTables = {};
      await this.adopt(res);
      return res;
    } finally {
      this.trainInFlight = false;
    }
  }

  async browseBin(bin: number): Promise<ResultSummary> {
    const res = await this.api.results(this.sessionId, this.state.cutoff, bin);
    this.maybeRefresh(res.round);
    this.results = res;
    this.emit();
    return res;
  }

  // Cut-off is a pure view parameter: it redraws overview markers only.
  setCutoff(k: number) {
    this.state.cutoff = k;
    this.emit();
  }

  topWindows(): number[] {
    if (!this.results) return [];
    return this.results.top.slice(0, this.state.cutoff).map((h) => h.window);
  }

  async treeJump(nodeId: number): Promise<ResultSummary> {
    const res = await this.api.treeJump(this.sessionId, nodeId);
    this.state.pendingSamples = {};
    this.state.pendingTables = {};
    await this.adopt(res);
    return res;
  }

  // A response from a newer round than ours means this tab is stale.
  maybeRefresh(serverRound: number): boolean {
    if (serverRound > this.state.round) {
      void this.api
        .results(this.sessionId, this.state.cutoff)
        .then((res) => this.adopt(res));
      return true;
    }
    return false;
  }
}
