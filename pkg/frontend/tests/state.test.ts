// Controller logic unit tests against a scripted fake API client.

import { describe, expect, it } from "vitest";

import type { ApiClient, ResultSummary } from "../src/api.js";
import { binColor, SessionController } from "../src/state.js";

function summary(round: number, top: number[] = []): ResultSummary {
  return {
    round,
    stale: false,
    histogram: [top.length, 0, 0, 0, 0, 0, 0, 0, 0, 100 - top.length],
    expansions_used: 1,
    n_windows: 100,
    n_candidates: top.length,
    top: top.map((w) => ({ window: w, start: w, score: 0 })),
    weight: [1, 1, 1],
    query_provenance: "user-selected",
  };
}

function fakeApi(log: string[], roundRef: { value: number }) {
  return {
    async createSession() {
      log.push("create");
      return { session_id: "s1", n_windows: 100, model_digest: "x", round: 0 };
    },
    async setQuery() {
      log.push("query");
      return summary(roundRef.value);
    },
    async train() {
      log.push("train");
      roundRef.value += 1;
      return summary(roundRef.value, [1, 2, 3]);
    },
    async postLabels(_sid: string, samples: Record<number, string>, tables: Record<number, string>) {
      log.push(`labels:${Object.keys(samples).length}/${Object.keys(tables).length}`);
      return { round: roundRef.value, pending_samples: 0, pending_tables: 0 };
    },
    async samples() {
      return { round: roundRef.value, samples: [] };
    },
    async tables() {
      return { round: roundRef.value, tables: [] };
    },
    async tree() {
      return {
        round: roundRef.value,
        cursor: roundRef.value,
        nodes: [{ id: 0, parent: null, children: [], n_labels: 0 }],
      };
    },
    async results(_sid: string, _cutoff: number, bin?: number) {
      log.push(`results:${bin}`);
      return summary(roundRef.value, [1, 2, 3]);
    },
    async treeJump(_sid: string, node: number) {
      log.push(`jump:${node}`);
      return summary(roundRef.value, [9, 8]);
    },
  } as unknown as ApiClient;
}

function makeController(log: string[] = [], roundRef = { value: 0 }) {
  const ctl = new SessionController(fakeApi(log, roundRef));
  return { ctl, log, roundRef };
}

describe("SessionController", () => {
  it("posts labels immediately and clears them after train", async () => {
    const { ctl, log } = makeController();
    await ctl.startSession("d", 100, 10);
    await ctl.selectQueryRegion(5);
    await ctl.labelSample(7, "positive");
    await ctl.labelTable(0, "important");
    expect(ctl.pendingCount()).toBe(2);
    expect(log.filter((l) => l.startsWith("labels:")).length).toBe(2);
    await ctl.train();
    expect(ctl.pendingCount()).toBe(0);
    expect(ctl.state.round).toBe(1);
  });

  it("rejects a second train while one is in flight", async () => {
    const { ctl } = makeController();
    await ctl.startSession("d", 100, 10);
    await ctl.selectQueryRegion(5);
    const first = ctl.train();
    await expect(ctl.train()).rejects.toThrow(/in flight/);
    await first;
    await ctl.train(); // allowed again afterwards
  });

  it("selecting a new query clears pending labels", async () => {
    const { ctl } = makeController();
    await ctl.startSession("d", 100, 10);
    await ctl.selectQueryRegion(5);
    await ctl.labelSample(3, "negative");
    await ctl.selectQueryRegion(9);
    expect(ctl.pendingCount()).toBe(0);
  });

  it("cutoff is a pure view parameter", async () => {
    const { ctl, log } = makeController();
    await ctl.startSession("d", 100, 10);
    await ctl.selectQueryRegion(5);
    await ctl.train();
    const before = log.length;
    ctl.setCutoff(2);
    expect(log.length).toBe(before); // no server call
    expect(ctl.topWindows()).toEqual([1, 2]);
  });

  it("detects stale rounds and refreshes", async () => {
    const { ctl, roundRef } = makeController();
    await ctl.startSession("d", 100, 10);
    await ctl.selectQueryRegion(5);
    expect(ctl.maybeRefresh(ctl.state.round)).toBe(false);
    roundRef.value = 5;
    expect(ctl.maybeRefresh(5)).toBe(true);
  });
});

describe("binColor", () => {
  it("runs strictly from green to red by bin index", () => {
    const hues = [...Array(10).keys()].map((i) => {
      const m = binColor(i, 10).match(/hsl\(([\d.]+)/);
      return Number(m![1]);
    });
    expect(hues[0]).toBe(120);
    expect(hues[9]).toBe(0);
    for (let i = 1; i < hues.length; i++) expect(hues[i]).toBeLessThan(hues[i - 1]);
  });
});
