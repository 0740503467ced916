"""Replays a serialized session in a fresh interpreter and dumps the state.

Usage: python replay_helper.py <series.npz> <session.json> <out.npz>
Invoked by the determinism acceptance test via subprocess.
"""

import json
import sys

import numpy as np

from mtsearch.data import MultivariateTimeSeries
from mtsearch.pipeline import replay_document


def main():
    series_path, doc_path, out_path = sys.argv[1:4]
    blob = np.load(series_path, allow_pickle=False)
    series = MultivariateTimeSeries(
        values=blob["values"],
        track_names=tuple(str(n) for n in blob["track_names"]),
    )
    doc = json.loads(open(doc_path).read())
    session = replay_document(doc, series)
    np.savez(
        out_path,
        scores=session.results.scores,
        histogram=session.results.histogram,
        weights=np.stack(session.weight_state.history)
        if session.weight_state.history
        else np.zeros((0, series.d)),
        top_k=np.array(session.results.top_k, dtype=np.int64),
    )


if __name__ == "__main__":
    main()
