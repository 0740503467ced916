"""REST service exposing datasets and retrieval sessions over HTTP/JSON.

Datasets are uploaded as CSV (multipart or raw body) and persisted to disk;
sessions persist as replayable JSON documents on every mutation, so a
restarted server resumes exactly where it stopped.  Training is synchronous
and guarded by a per-session lock: a second Train for the same session while
one is running gets 409.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .data import MultivariateTimeSeries, downsample_track, load_csv
from .errors import (
    BadRequest,
    MtsError,
    TrainInProgress,
    UnknownDataset,
    UnknownSession,
    UnknownTrack,
)
from .feedback import LabelSet
from .lsh import LshConfig
from .pipeline import (
    Session,
    build_session,
    feedback_round,
    replay_document,
    run_query,
    session_to_document,
    set_query,
    undo_redo,
)
from .sampling import SamplePlan, exploit_samples, explore_samples, table_summary


class SessionRequest(BaseModel):
    dataset_id: str
    t: int
    stride: int = 1
    seed: Optional[int] = None
    config: Optional[dict] = None


class QueryRequest(BaseModel):
    start: int


class LabelsRequest(BaseModel):
    samples: dict[int, str] = {}
    tables: dict[int, str] = {}


class TreeJumpRequest(BaseModel):
    node_id: int


def _parse_multipart(body: bytes, content_type: str) -> bytes:
    """Extract the first file part of a multipart/form-data body."""
    boundary = None
    for piece in content_type.split(";"):
        piece = piece.strip()
        if piece.startswith("boundary="):
            boundary = piece[len("boundary="):].strip('"')
    if not boundary:
        raise ValueError("multipart body without boundary")
    delim = b"--" + boundary.encode()
    for part in body.split(delim):
        if b"\r\n\r\n" not in part:
            continue
        headers, _, payload = part.partition(b"\r\n\r\n")
        if b"content-disposition" in headers.lower():
            return payload.rstrip(b"\r\n-")
    raise ValueError("no file part in multipart body")


class ServiceStore:
    """Disk-backed datasets and sessions plus per-session train locks."""

    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        self.series: dict[str, MultivariateTimeSeries] = {}
        self.sessions: dict[str, Session] = {}
        self.pending: dict[str, LabelSet] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.store_lock = threading.Lock()

    # -- datasets ------------------------------------------------------------
    def add_dataset(self, csv_bytes: bytes) -> tuple[str, MultivariateTimeSeries]:
        dataset_id = uuid.uuid4().hex
        path = self.root / "datasets" / f"{dataset_id}.csv"
        path.write_bytes(csv_bytes)
        try:
            series = load_csv(path, has_header=self._sniff_header(csv_bytes))
        except MtsError:
            path.unlink(missing_ok=True)  # keep the store free of bad uploads
            raise
        self.series[dataset_id] = series
        return dataset_id, series

    @staticmethod
    def _sniff_header(csv_bytes: bytes) -> bool:
        first = csv_bytes.split(b"\n", 1)[0].decode("utf-8", "replace")
        for cell in first.split(","):
            try:
                float(cell)
            except ValueError:
                return True
        return False

    def get_series(self, dataset_id: str) -> MultivariateTimeSeries:
        if dataset_id not in self.series:
            path = self.root / "datasets" / f"{dataset_id}.csv"
            if not path.exists():
                raise UnknownDataset(f"no dataset {dataset_id}")
            self.series[dataset_id] = load_csv(
                path, has_header=self._sniff_header(path.read_bytes())
            )
        return self.series[dataset_id]

    # -- sessions ------------------------------------------------------------
    def add_session(self, session: Session) -> str:
        session_id = uuid.uuid4().hex
        self.sessions[session_id] = session
        self.locks[session_id] = threading.Lock()
        self.pending[session_id] = LabelSet()
        self.persist(session_id)
        return session_id

    def get_session(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            path = self.root / "sessions" / f"{session_id}.json"
            if not path.exists():
                raise UnknownSession(f"no session {session_id}")
            doc = json.loads(path.read_text())
            series = self.get_series(doc["dataset_id"])
            self.sessions[session_id] = replay_document(doc, series)
            self.locks[session_id] = threading.Lock()
            self.pending[session_id] = LabelSet.from_document(doc.get("pending", {}))
        return self.sessions[session_id]

    def lock_for(self, session_id: str) -> threading.Lock:
        return self.locks.setdefault(session_id, threading.Lock())

    def persist(self, session_id: str) -> None:
        session = self.sessions[session_id]
        doc = session_to_document(session)
        doc["pending"] = self.pending.get(session_id, LabelSet()).to_document()
        path = self.root / "sessions" / f"{session_id}.json"
        path.write_text(json.dumps(doc))


def _proto_json(proto) -> Optional[dict]:
    if proto is None:
        return None
    return {
        "mean": proto.mean.tolist(),
        "min": proto.min.tolist(),
        "max": proto.max.tolist(),
        "count": proto.count,
    }


def _result_summary(session: Session, cutoff: int = 50) -> dict:
    result = session.results
    top = result.top_k[:cutoff]
    return {
        "round": session.round_counter,
        "stale": session.stale,
        "histogram": result.histogram.tolist(),
        "expansions_used": result.expansions_used,
        "n_windows": len(session.window_set),
        "n_candidates": len(result.top_k),
        "top": [
            {
                "window": int(wi),
                "start": int(session.window_set.windows[wi].start),
                "score": float(result.scores[wi]),
            }
            for wi in top
        ],
        "weight": session.model.weight.tolist(),
        "query_provenance": session.query.provenance if session.query else None,
    }


def create_app(data_dir: str = "./mtsearch-data", default_seed: int = 0) -> FastAPI:
    app = FastAPI(title="mtsearch", version=__version__)
    store = ServiceStore(Path(data_dir))
    app.state.store = store

    @app.exception_handler(MtsError)
    async def mts_error_handler(request: Request, exc: MtsError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"code": exc.code, "message": str(exc)},
        )

    # -- datasets --------------------------------------------------------
    @app.post("/datasets", status_code=201)
    async def upload_dataset(request: Request):
        body = await request.body()
        ctype = request.headers.get("content-type", "")
        if ctype.startswith("multipart/form-data"):
            try:
                csv_bytes = _parse_multipart(body, ctype)
            except ValueError as exc:
                raise BadRequest(str(exc)) from exc
        else:
            csv_bytes = body
        dataset_id, series = store.add_dataset(csv_bytes)
        return {
            "dataset_id": dataset_id,
            "n": series.n,
            "d": series.d,
            "track_names": list(series.track_names),
        }

    @app.get("/datasets/{dataset_id}/overview")
    def dataset_overview(dataset_id: str, tracks: str = "", points: int = 500):
        series = store.get_series(dataset_id)
        if tracks.strip():
            names = [t.strip() for t in tracks.split(",") if t.strip()]
        else:
            names = list(series.track_names)
        points = max(1, min(points, series.n))
        out = {}
        for name in names:
            if name not in series.track_names:
                raise UnknownTrack(f"no track named {name!r}")
            j = series.track_names.index(name)
            out[name] = downsample_track(series, j, points)
        return {"dataset_id": dataset_id, "n": series.n, "points": points, "tracks": out}

    # -- sessions --------------------------------------------------------
    @app.post("/sessions", status_code=201)
    def create_session(req: SessionRequest):
        series = store.get_series(req.dataset_id)
        try:
            config = LshConfig(**req.config) if req.config else LshConfig()
            session = build_session(
                series,
                t=req.t,
                stride=req.stride,
                config=config,
                seed=req.seed if req.seed is not None else default_seed,
                dataset_id=req.dataset_id,
            )
        except (TypeError, ValueError) as exc:
            raise BadRequest(str(exc)) from exc
        session_id = store.add_session(session)
        return {
            "session_id": session_id,
            "n_windows": len(session.window_set),
            "model_digest": session.model_digest(),
            "round": session.round_counter,
        }

    @app.post("/sessions/{session_id}/query")
    def post_query(session_id: str, req: QueryRequest):
        session = store.get_session(session_id)
        set_query(session, req.start)
        run_query(session)
        store.pending[session_id] = LabelSet()
        store.persist(session_id)
        return _result_summary(session)

    @app.get("/sessions/{session_id}/results")
    def get_results(session_id: str, cutoff: int = 50, bin: Optional[int] = None):
        session = store.get_session(session_id)
        if session.results is None:
            raise BadRequest("no results yet; set a query first")
        payload = _result_summary(session, cutoff=cutoff)
        if bin is not None:
            if not 0 <= bin < len(session.results.bin_prototypes):
                raise BadRequest(f"bin {bin} out of range")
            payload["bin"] = {
                "index": bin,
                "prototype": _proto_json(session.results.bin_prototypes[bin]),
                "count": int(session.results.histogram[bin]),
            }
        return payload

    @app.get("/sessions/{session_id}/tables")
    def get_tables(session_id: str):
        session = store.get_session(session_id)
        if session.table_rankings is None:
            raise BadRequest("no results yet; set a query first")
        summaries = table_summary(session.table_rankings, session.window_set)
        return {
            "round": session.round_counter,
            "tables": [
                {
                    "table": s.table,
                    "empty": s.empty,
                    "histogram": s.histogram.tolist(),
                    "prototype": _proto_json(s.prototype),
                }
                for s in summaries
            ],
        }

    @app.get("/sessions/{session_id}/samples")
    def get_samples(session_id: str, k: int = 3, explore: Optional[int] = None, seed: Optional[int] = None):
        session = store.get_session(session_id)
        if session.table_rankings is None:
            raise BadRequest("no results yet; set a query first")
        plan = SamplePlan(
            k_top=k,
            n_explore=explore,
            exclude=frozenset(session.labeled_windows()),
            seed=seed if seed is not None else session.seed * 1000003 + session.round_counter,
        )
        starts = session.window_set.starts
        picks = exploit_samples(session.table_rankings, plan, starts, session.t)
        randoms = explore_samples(
            len(session.window_set), plan, picks, n_tables=session.model.l
        )

        def sample_json(wi, kind):
            return {
                "window": int(wi),
                "start": int(session.window_set.windows[wi].start),
                "score": float(session.results.scores[wi]),
                "kind": kind,
                "values": session.window_set.windows[wi].values.tolist(),
            }

        return {
            "round": session.round_counter,
            "samples": [sample_json(w, "exploit") for w in picks]
            + [sample_json(w, "explore") for w in randoms],
        }

    @app.post("/sessions/{session_id}/labels")
    def post_labels(session_id: str, req: LabelsRequest):
        session = store.get_session(session_id)
        for wi in req.samples:
            if not 0 <= wi < len(session.window_set):
                raise BadRequest(f"window index {wi} out of range")
        for ti in req.tables:
            if not 0 <= ti < session.model.l:
                raise BadRequest(f"table index {ti} out of range")
        current = store.pending.get(session_id, LabelSet())
        try:
            merged = LabelSet(
                sample_labels={**current.sample_labels, **req.samples},
                table_labels={**current.table_labels, **req.tables},
            )
        except ValueError as exc:
            raise BadRequest(str(exc)) from exc
        store.pending[session_id] = merged
        store.persist(session_id)
        return {
            "round": session.round_counter,
            "pending_samples": len(merged.sample_labels),
            "pending_tables": len(merged.table_labels),
        }

    @app.post("/sessions/{session_id}/train")
    def post_train(session_id: str):
        session = store.get_session(session_id)
        lock = store.lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise TrainInProgress("another train is already running for this session")
        try:
            labels = store.pending.get(session_id, LabelSet())
            feedback_round(session, labels)
            store.pending[session_id] = LabelSet()
            store.persist(session_id)
            return _result_summary(session)
        finally:
            lock.release()

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        session = store.get_session(session_id)
        return {
            "round": session.round_counter,
            "cursor": session.tree.cursor,
            "nodes": [
                {
                    "id": node.node_id,
                    "parent": node.parent,
                    "children": list(node.children),
                    "n_labels": len(node.labels.sample_labels) + len(node.labels.table_labels),
                }
                for _, node in sorted(session.tree.nodes.items())
            ],
        }

    @app.post("/sessions/{session_id}/tree")
    def jump_tree(session_id: str, req: TreeJumpRequest):
        session = store.get_session(session_id)
        lock = store.lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise TrainInProgress("session is busy")
        try:
            undo_redo(session, req.node_id)
            store.persist(session_id)
            return _result_summary(session)
        finally:
            lock.release()

    @app.get("/healthz")
    def healthz():
        return {"ok": True, "version": __version__}

    frontend_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if frontend_dist.exists():
        app.mount("/", StaticFiles(directory=frontend_dist, html=True), name="ui")

    return app
