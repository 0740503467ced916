"""The REST loop end to end: upload, session, query, label, train, undo."""

import tempfile

from fastapi.testclient import TestClient

from mtsearch.service import create_app
from mtsearch.synthetic import make_corpus

series = make_corpus(n_windows=1200, t=60, d=3, seed=23)
csv_text = "\n".join(
    [",".join(series.track_names)]
    + [",".join(str(v) for v in row) for row in series.values]
)

with tempfile.TemporaryDirectory() as tmp:
    client = TestClient(create_app(data_dir=tmp))

    r = client.post("/datasets", content=csv_text.encode(),
                    headers={"content-type": "text/csv"})
    ds = r.json()
    print("dataset:", ds["dataset_id"][:8], f"n={ds['n']} d={ds['d']}")

    overview = client.get(f"/datasets/{ds['dataset_id']}/overview",
                          params={"points": 200}).json()
    print("overview points per track:", len(overview["tracks"]["track_0"]))

    sess = client.post("/sessions", json={
        "dataset_id": ds["dataset_id"], "t": 60, "stride": 1, "seed": 4,
    }).json()
    sid = sess["session_id"]
    print("session:", sid[:8], f"windows={sess['n_windows']} digest={sess['model_digest'][:12]}")

    res = client.post(f"/sessions/{sid}/query", json={"start": 300}).json()
    print("query round", res["round"], "histogram", res["histogram"])
    print("best hit:", res["top"][0])

    samples = client.get(f"/sessions/{sid}/samples", params={"k": 2, "explore": 2}).json()
    shown = [s["window"] for s in samples["samples"]]
    print("samples to label:", shown)

    client.post(f"/sessions/{sid}/labels", json={
        "samples": {str(shown[0]): "positive"},
        "tables": {"0": "important"},
    })
    trained = client.post(f"/sessions/{sid}/train").json()
    print("after train: round", trained["round"], "weights", [round(w, 3) for w in trained["weight"]])

    tree = client.get(f"/sessions/{sid}/tree").json()
    print("tree nodes:", [(n["id"], n["parent"]) for n in tree["nodes"]], "cursor:", tree["cursor"])

    back = client.post(f"/sessions/{sid}/tree", json={"node_id": 0}).json()
    print("after undo: round", back["round"], "weights", back["weight"])
