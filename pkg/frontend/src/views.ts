// The four interlinked views, each a thin render of the controller state:
// dataset overview (mini-map, labeled-window markers, query selection),
// query view, feedback view (Samples / Tables / Labeled Data + Train) and
// results view (histogram, bin prototypes, cut-off, undo/redo tree).

import { ApiClient, OverviewResponse } from "./api.js";
import { drawHistogram, drawOverviewTrack, drawPrototype, drawWindowCurves, makeSvg } from "./charts.js";
import { SampleLabel, SessionController, TableLabel } from "./state.js";

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function button(label: string, onClick: () => void, className = ""): HTMLButtonElement {
  const b = el("button", className, label) as HTMLButtonElement;
  b.addEventListener("click", onClick);
  return b;
}

export class OverviewView {
  private overview: OverviewResponse | null = null;
  readonly root = el("section", "panel overview");

  constructor(
    private api: ApiClient,
    private ctl: SessionController,
  ) {
    ctl.onChange(() => this.render());
  }

  async load(datasetId: string, tracks: string[]) {
    this.overview = await this.api.overview(datasetId, tracks, 400);
    this.render();
  }

  render() {
    this.root.replaceChildren(el("h2", "", "Dataset overview"));
    if (!this.overview) return;
    const width = 860;
    const trackH = 56;
    const names = Object.keys(this.overview.tracks);
    const svg = makeSvg(width, trackH * names.length + 18);
    names.forEach((name, i) => {
      drawOverviewTrack(svg, this.overview!.tracks[name], i, width, trackH - 8, i * trackH);
    });

    const n = this.overview.n;
    // Markers for the current top-K hits (cut-off is a view parameter).
    for (const w of this.ctl.topWindows()) {
      const x = (w / n) * width;
      const m = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      m.setAttribute("x", String(x));
      m.setAttribute("y", String(trackH * names.length + 2));
      m.setAttribute("width", String(Math.max((this.ctl.t / n) * width, 1.5)));
      m.setAttribute("height", "6");
      m.setAttribute("class", "hit-marker");
      svg.appendChild(m);
    }
    // Labeled windows stand out separately.
    for (const w of Object.keys(this.ctl.state.pendingSamples)) {
      const x = (Number(w) / n) * width;
      const m = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      m.setAttribute("x", String(x));
      m.setAttribute("y", String(trackH * names.length + 10));
      m.setAttribute("width", "2");
      m.setAttribute("height", "6");
      m.setAttribute("class", "label-marker");
      svg.appendChild(m);
    }
    // Query span marker.
    const span = this.ctl.state.querySpan;
    if (span) {
      const m = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      m.setAttribute("x", String((span.start / n) * width));
      m.setAttribute("y", "0");
      m.setAttribute("width", String((span.length / n) * width));
      m.setAttribute("height", String(trackH * names.length));
      m.setAttribute("class", "query-span");
      svg.appendChild(m);
    }
    svg.addEventListener("click", (ev) => {
      const rect = (svg as unknown as Element).getBoundingClientRect();
      const frac = (ev.clientX - rect.left) / rect.width;
      const start = Math.min(Math.max(Math.round(frac * n), 0), n - this.ctl.t);
      void this.ctl.selectQueryRegion(start);
    });
    this.root.appendChild(svg);
    this.root.appendChild(
      el("p", "hint", "Click anywhere in the overview to set the query window."),
    );
  }
}

export class QueryView {
  readonly root = el("section", "panel query");

  constructor(private ctl: SessionController) {
    ctl.onChange(() => this.render());
    this.render();
  }

  render() {
    this.root.replaceChildren(el("h2", "", "Query"));
    const span = this.ctl.state.querySpan;
    if (!span) {
      this.root.appendChild(el("p", "hint", "No query yet."));
      return;
    }
    const prov = this.ctl.results?.query_provenance ?? "user-selected";
    this.root.appendChild(
      el("p", "", `start ${span.start}, length ${span.length} (${prov})`),
    );
    const sample = this.ctl.samples.find((s) => s.start === span.start);
    if (sample) drawWindowCurves(this.root, sample.values, 240, 90);
  }
}

type Tab = "samples" | "tables" | "labeled";

export class FeedbackView {
  readonly root = el("section", "panel feedback");
  private tab: Tab = "samples";

  constructor(private ctl: SessionController) {
    ctl.onChange(() => this.render());
    this.render();
  }

  private tabButton(tab: Tab, label: string) {
    const b = button(label, () => {
      this.tab = tab;
      this.render();
    }, this.tab === tab ? "tab active" : "tab");
    return b;
  }

  render() {
    this.root.replaceChildren(el("h2", "", "Feedback"));
    const bar = el("div", "tabbar");
    bar.append(
      this.tabButton("samples", "Samples"),
      this.tabButton("tables", "Tables"),
      this.tabButton("labeled", `Labeled data (${this.ctl.pendingCount()})`),
    );
    this.root.appendChild(bar);

    if (this.tab === "samples") this.renderSamples();
    else if (this.tab === "tables") this.renderTables();
    else this.renderLabeled();

    const train = button("Train", () => void this.ctl.train(), "train");
    train.disabled = this.ctl.trainInFlight || !this.ctl.results;
    this.root.appendChild(train);
  }

  private labelButtons(current: string | undefined, set: (label: SampleLabel) => void) {
    const wrap = el("span", "labels");
    const options: [SampleLabel, string][] = [
      ["positive", "✓"],
      ["indecisive", "·"],
      ["negative", "✗"],
    ];
    for (const [label, glyph] of options) {
      wrap.appendChild(
        button(glyph, () => set(label), current === label ? "label on" : "label"),
      );
    }
    return wrap;
  }

  private renderSamples() {
    const list = el("div", "cards");
    for (const s of this.ctl.samples) {
      const card = el("div", "card " + s.kind);
      // Frame color encodes the classifier's predicted similarity.
      card.style.borderColor = `hsl(${(120 * (1 - s.score)).toFixed(0)}, 70%, 45%)`;
      card.appendChild(
        this.labelButtons(this.ctl.state.pendingSamples[s.window], (label) =>
          void this.ctl.labelSample(s.window, label),
        ),
      );
      card.appendChild(el("div", "meta", `#${s.window} @${s.start} (${s.kind})`));
      drawWindowCurves(card, s.values);
      list.appendChild(card);
    }
    this.root.appendChild(list);
  }

  private renderTables() {
    const list = el("div", "cards");
    this.ctl.tables.forEach((t) => {
      const card = el("div", "card");
      const setter = (label: TableLabel) => void this.ctl.labelTable(t.table, label);
      const wrap = el("span", "labels");
      wrap.appendChild(
        button("✓", () => setter("important"),
          this.ctl.state.pendingTables[t.table] === "important" ? "label on" : "label"),
      );
      wrap.appendChild(
        button("·", () => setter("indecisive"),
          this.ctl.state.pendingTables[t.table] === "indecisive" ? "label on" : "label"),
      );
      card.appendChild(wrap);
      card.appendChild(el("div", "meta", `hash table ${t.table}${t.empty ? " (empty)" : ""}`));
      if (!t.empty) {
        drawHistogram(card, t.histogram, undefined, 180, 60);
        if (t.prototype) drawPrototype(card, t.prototype, 180, 70);
      }
      list.appendChild(card);
    });
    this.root.appendChild(list);
  }

  private renderLabeled() {
    const list = el("ul", "labeled");
    for (const [w, label] of Object.entries(this.ctl.state.pendingSamples)) {
      list.appendChild(el("li", "", `window ${w}: ${label}`));
    }
    for (const [t, label] of Object.entries(this.ctl.state.pendingTables)) {
      list.appendChild(el("li", "", `table ${t}: ${label}`));
    }
    if (!list.children.length) list.appendChild(el("li", "hint", "nothing labeled this round"));
    this.root.appendChild(list);
  }
}

export class ResultsView {
  readonly root = el("section", "panel results");

  constructor(private ctl: SessionController) {
    ctl.onChange(() => this.render());
    this.render();
  }

  render() {
    this.root.replaceChildren(el("h2", "", "Results"));
    const res = this.ctl.results;
    if (!res) {
      this.root.appendChild(el("p", "hint", "Run a query first."));
      return;
    }
    this.root.appendChild(
      el("p", "meta", `round ${res.round}; ${res.n_candidates} candidates of ${res.n_windows} windows`),
    );
    drawHistogram(this.root, res.histogram, (bin) => void this.ctl.browseBin(bin));

    if (res.bin && res.bin.prototype) {
      this.root.appendChild(
        el("p", "meta", `bin ${res.bin.index}: ${res.bin.count} windows`),
      );
      drawPrototype(this.root, res.bin.prototype);
    }

    const cut = el("div", "cutoff");
    cut.appendChild(el("span", "", `top-K cut-off: ${this.ctl.state.cutoff}`));
    const slider = el("input") as HTMLInputElement;
    slider.type = "range";
    slider.min = "5";
    slider.max = "200";
    slider.value = String(this.ctl.state.cutoff);
    slider.addEventListener("input", () => this.ctl.setCutoff(Number(slider.value)));
    cut.appendChild(slider);
    this.root.appendChild(cut);

    this.renderTree();
  }

  private renderTree() {
    const tree = this.ctl.tree;
    if (!tree) return;
    this.root.appendChild(el("h3", "", "Exploration tree"));
    const wrap = el("div", "tree");
    for (const node of tree.nodes) {
      const b = button(
        node.parent === null ? "root" : `#${node.id} (${node.n_labels} labels)`,
        () => void this.ctl.treeJump(node.id),
        node.id === tree.cursor ? "node cursor" : "node",
      );
      b.style.marginLeft = `${this.depth(node.id) * 14}px`;
      wrap.appendChild(b);
      wrap.appendChild(el("br"));
    }
    this.root.appendChild(wrap);
  }

  private depth(id: number): number {
    let d = 0;
    let cur = this.ctl.tree!.nodes.find((n) => n.id === id);
    while (cur && cur.parent !== null) {
      cur = this.ctl.tree!.nodes.find((n) => n.id === cur!.parent);
      d += 1;
    }
    return d;
  }
}
