"""Hashing and retrieval: codes, collisions, radius expansion, ranking."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mtsearch.data import extract_windows, query_from_series
from mtsearch.lsh import LshConfig, build_index, generate_candidates, generate_model, score_candidates
from mtsearch.pipeline import build_session, run_query, set_query
from mtsearch.synthetic import make_corpus

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

series = make_corpus(n_windows=4000, t=120, d=3, seed=11)
windows = extract_windows(series, t=120)
query = query_from_series(series, 900, 120)

# One model = l compound functions x k atomic Gaussian vectors.
config = LshConfig()  # l=5, k=3, DTW ranking, 5% band
model = generate_model(series.d, 120, config, seed=1).with_query(query)
index = build_index(model, windows)
print(f"model: l={model.l} tables x k={model.k} atomics, t_s={model.t_s} of t={model.t}")
print(f"window codes: {index.codes.shape} (atomics x windows x steps)")

# Candidate search widens the bucket until enough windows collide.
cands = generate_candidates(model, query, windows, index=index)
print(f"{len(cands)} candidates after {cands.expansions_used} radius expansions")

scored = score_candidates(model, query, cands, windows, index=index)
order = scored.indices[np.lexsort((scored.indices, scored.scores))]
print("top five:", [int(i) for i in order[:5]], "(query start was 900)")

# The full pipeline adds the histogram and per-bin prototypes.
session = build_session(series, t=120, seed=1)
set_query(session, 900)
result = run_query(session)
print("histogram:", result.histogram.tolist(), "sum =", int(result.histogram.sum()))

fig, axes = plt.subplots(1, 2, figsize=(11, 3))
axes[0].bar(range(10), result.histogram, color=plt.cm.RdYlGn_r(np.linspace(0.05, 0.95, 10)))
axes[0].set_title("similarity histogram (bin 0 = most similar)")
proto = result.bin_prototypes[0]
for j in range(series.d):
    axes[1].fill_between(range(120), proto.min[:, j], proto.max[:, j], alpha=0.25)
    axes[1].plot(proto.mean[:, j], lw=1)
axes[1].set_title(f"bin-0 prototype over {proto.count} windows")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "retrieval.png"), dpi=110)
print("wrote output/retrieval.png")
