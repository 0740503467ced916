// Bootstrap: wire the controller and the four views into the page. The only
// client persistence is the session id in the URL hash.

import { ApiClient } from "./api.js";
import { SessionController } from "./state.js";
import { FeedbackView, OverviewView, QueryView, ResultsView } from "./views.js";

const api = new ApiClient("");
const ctl = new SessionController(api);

async function boot() {
  const app = document.getElementById("app")!;
  const overview = new OverviewView(api, ctl);
  const query = new QueryView(ctl);
  const feedback = new FeedbackView(ctl);
  const results = new ResultsView(ctl);

  const top = document.createElement("div");
  top.className = "row";
  top.append(overview.root);
  const bottom = document.createElement("div");
  bottom.className = "row";
  bottom.append(query.root, feedback.root, results.root);
  app.append(top, bottom);

  const form = document.getElementById("setup") as HTMLFormElement;
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const file = (document.getElementById("csv") as HTMLInputElement).files?.[0];
    const t = Number((document.getElementById("t") as HTMLInputElement).value);
    const seed = Number((document.getElementById("seed") as HTMLInputElement).value);
    if (!file) return;
    const text = await file.text();
    const ds = await api.uploadDataset(text);
    const info = await ctl.startSession(ds.dataset_id, ds.n, t, seed);
    window.location.hash = info.session_id;
    document.getElementById("status")!.textContent =
      `session ${info.session_id.slice(0, 8)}: ${info.n_windows} windows (model ${info.model_digest.slice(0, 8)})`;
    await overview.load(ds.dataset_id, ds.track_names);
  });
}

void boot();
