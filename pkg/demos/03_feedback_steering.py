"""Relevance feedback: labels move the weights, DBA moves the query."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mtsearch.baselines import steerability_experiment
from mtsearch.feedback import LABEL_POSITIVE, TABLE_IMPORTANT, LabelSet
from mtsearch.pipeline import build_session, feedback_round, run_query, set_query, undo_redo
from mtsearch.sampling import SamplePlan, exploit_samples, explore_samples
from mtsearch.synthetic import make_planted_corpus

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# Corpus with planted per-track patterns: boosting track 1 should retrieve
# its pattern group, suppressing track 3 should push its group away.
series, info = make_planted_corpus(n_windows=6000, t=60, d=4, seed=3, n_boost=20, n_suppress=20)
session = build_session(series, t=60, seed=3)
set_query(session, info["query_start"])
run_query(session)

# The sampler proposes windows to label: per-table exploitation + random draws.
from mtsearch.sampling import build_table_rankings  # noqa: E402

plan = SamplePlan(k_top=2, n_explore=3, seed=1)
picks = exploit_samples(session.table_rankings, plan, session.window_set.starts, session.t)
randoms = explore_samples(len(session.window_set), plan, picks)
print("exploit picks:", picks[:6], "explore draws:", randoms)

# Label the proposed windows positive plus one table, then train.  Overlap
# suppression can shrink the exploit list to a single site, so pull from the
# exploration draws as well.
to_label = (picks + randoms)[:2]
labels = LabelSet(
    sample_labels={wi: LABEL_POSITIVE for wi in to_label},
    table_labels={0: TABLE_IMPORTANT},
)
feedback_round(session, labels)
print("after round 1: weights =", session.model.weight.round(3).tolist())
print("query provenance:", session.query.provenance)

# Undo back to the root restores the unsteered state.
undo_redo(session, 0)
print("after undo: weights =", session.model.weight.round(3).tolist())

# The manual-weight steering protocol, tracked as per-track DTW of the top-50.
per_round, weights = steerability_experiment(session, rounds=4, boost=1, suppress=3)
print("mean top-50 per-track DTW by round:")
for r, row in enumerate(per_round):
    print(f"  round {r}: {row.round(2).tolist()}  weights {weights[r].round(2).tolist()}")

fig, ax = plt.subplots(figsize=(6, 3.2))
for j in range(4):
    ax.plot(per_round[:, j], marker="o", label=f"track {j}")
ax.set_xlabel("feedback round")
ax.set_ylabel("mean top-50 DTW to query")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "steering.png"), dpi=110)
print("wrote output/steering.png")
