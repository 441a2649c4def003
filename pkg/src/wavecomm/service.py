"""HTTP labeling service over a completed run.

Serves cluster/membership/spectrum data to the review UI and accepts label
decisions.  Label state lives in ``labels.json`` beside the pipeline
artifacts (which are never mutated); every write appends to an audit log
and bumps a version counter, so the export is reproducible by replaying
the log.  Writes are serialized and persisted atomically.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import io
import json
import os
import threading
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, PlainTextResponse, Response
from pydantic import BaseModel, Field

from .artifacts import RunDirectory
from .dataset import read_manifest_csv
from .errors import MissingArtifactError

THUMBNAIL_SIZE = 128


class LabelRequest(BaseModel):
    label: str = Field(min_length=1)
    cluster_id: int | None = None
    image_id: str | None = None
    base_version: int | None = None
    actor: str = "reviewer"


class LabelStore:
    """Cluster labels + per-image overrides with an append-only audit log."""

    def __init__(self, path: Path):
        self.path = path
        self.version = 0
        self.cluster_labels: dict[str, str] = {}
        self.image_overrides: dict[str, str] = {}
        self.audit: list[dict] = []
        self._lock = threading.Lock()
        if path.exists():
            state = json.loads(path.read_text(encoding="utf-8"))
            self.version = state.get("version", 0)
            self.cluster_labels = state.get("cluster_labels", {})
            self.image_overrides = state.get("image_overrides", {})
            self.audit = state.get("audit", [])

    def _persist(self) -> None:
        payload = {
            "version": self.version,
            "cluster_labels": self.cluster_labels,
            "image_overrides": self.image_overrides,
            "audit": self.audit,
        }
        tmp = self.path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        os.replace(tmp, self.path)

    def apply(self, *, cluster_id=None, image_id=None, label, actor, base_version=None):
        """Apply one labeling action; returns the new version.

        Raises ValueError("conflict") when the caller's base_version is
        stale (writes are otherwise last-writer-wins, all audited).
        """
        with self._lock:
            if base_version is not None and base_version != self.version:
                raise ValueError("conflict")
            entry = {
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                "actor": actor,
                "action": "label_cluster" if cluster_id is not None else "label_image",
                "target": str(cluster_id) if cluster_id is not None else image_id,
                "label": label,
            }
            if cluster_id is not None:
                self.cluster_labels[str(cluster_id)] = label
            else:
                self.image_overrides[image_id] = label
            self.audit.append(entry)
            self.version += 1
            self._persist()
            return self.version

    def effective_labels(self, assignments: dict[str, int]) -> dict[str, str | None]:
        """Override if present, else the image's cluster label, else None."""
        return {
            image_id: self.image_overrides.get(
                image_id, self.cluster_labels.get(str(cluster))
            )
            for image_id, cluster in assignments.items()
        }

    @classmethod
    def replay(cls, audit: list[dict], path: Path) -> "LabelStore":
        """Rebuild a store purely from an audit log (for verification)."""
        store = cls(path)
        for entry in audit:
            if entry["action"] == "label_cluster":
                store.cluster_labels[entry["target"]] = entry["label"]
            else:
                store.image_overrides[entry["target"]] = entry["label"]
            store.audit.append(entry)
            store.version += 1
        return store


def _default_ui_dir() -> Path | None:
    # repo checkout layout: src/wavecomm/service.py -> <root>/frontend/dist
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if (candidate / "index.html").exists() else None


def create_app(
    run_path: str | Path,
    token: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    run = RunDirectory(run_path)
    if not run.path.is_dir():
        raise MissingArtifactError(f"run directory {run.path} does not exist")

    app = FastAPI(title="wavecomm labeling service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    state: dict = {"store": LabelStore(run.labels_json)}

    def _auth(request: Request):
        if token is not None:
            supplied = request.headers.get("authorization", "")
            if supplied != f"Bearer {token}":
                raise HTTPException(status_code=401, detail="bad or missing token")

    def _communities():
        if "communities" not in state:
            try:
                state["communities"] = run.load_communities()
            except MissingArtifactError:
                raise HTTPException(status_code=404, detail="no completed run loaded")
        return state["communities"]

    def _manifest_entries():
        if "entries" not in state:
            if not run.manifest_csv.exists():
                raise HTTPException(status_code=404, detail="run has no manifest")
            state["entries"] = {e.id: e for e in read_manifest_csv(run.manifest_csv)}
        return state["entries"]

    def _spectrum_positions() -> dict[str, float]:
        if "positions" not in state:
            positions: dict[str, float] = {}
            if run.spectrum_json.exists():
                payload = json.loads(run.spectrum_json.read_text(encoding="utf-8"))
                positions = {row["id"]: row["position"] for row in payload["images"]}
            state["positions"] = positions
        return state["positions"]

    def _dataset_base() -> Path | None:
        if "base" not in state:
            base = None
            if run.run_config_json.exists():
                cfg = json.loads(run.run_config_json.read_text(encoding="utf-8"))
                source = Path(cfg.get("dataset", ""))
                if source.is_dir():
                    base = source
                elif source.is_file():
                    base = source.parent
            state["base"] = base
        return state["base"]

    @app.get("/api/run", dependencies=[Depends(_auth)])
    def run_summary():
        result = _communities()
        return {
            "n_images": len(result.image_ids),
            "n_c": result.n_c,
            "eigenvalues": [float(v) for v in result.eigenvalues],
            "gaps": [float(g) for g in result.eigengap_profile],
            "cluster_sizes": result.cluster_sizes(),
            "has_spectrum": run.spectrum_json.exists(),
            "version": state["store"].version,
        }

    @app.get("/api/clusters/{cluster_id}/images", dependencies=[Depends(_auth)])
    def cluster_images(
        cluster_id: int,
        page: int = Query(default=0, ge=0),
        page_size: int = Query(default=24, ge=1, le=500),
    ):
        result = _communities()
        if cluster_id < 0 or cluster_id >= result.n_c:
            raise HTTPException(status_code=404, detail=f"unknown cluster {cluster_id}")
        members = result.members(cluster_id)
        positions = _spectrum_positions()
        members.sort(key=lambda i: (positions.get(i, 0.0), i))
        start = page * page_size
        chunk = members[start : start + page_size]
        store: LabelStore = state["store"]
        effective = store.effective_labels(result.assignments)
        return {
            "cluster_id": cluster_id,
            "total": len(members),
            "page": page,
            "page_size": page_size,
            "images": [
                {
                    "id": image_id,
                    "label": effective.get(image_id),
                    "position": positions.get(image_id),
                    "thumbnail": f"/api/image?id={image_id}&size=thumb",
                    "full": f"/api/image?id={image_id}&size=full",
                }
                for image_id in chunk
            ],
        }

    @app.post("/api/labels", dependencies=[Depends(_auth)])
    def post_label(body: LabelRequest):
        result = _communities()
        if (body.cluster_id is None) == (body.image_id is None):
            raise HTTPException(
                status_code=422, detail="give exactly one of cluster_id or image_id"
            )
        if not body.label.strip():
            raise HTTPException(status_code=422, detail="label must be non-empty")
        if body.cluster_id is not None and not 0 <= body.cluster_id < result.n_c:
            raise HTTPException(status_code=404, detail=f"unknown cluster {body.cluster_id}")
        if body.image_id is not None and body.image_id not in result.assignments:
            raise HTTPException(status_code=404, detail=f"unknown image {body.image_id!r}")
        store: LabelStore = state["store"]
        try:
            version = store.apply(
                cluster_id=body.cluster_id,
                image_id=body.image_id,
                label=body.label.strip(),
                actor=body.actor,
                base_version=body.base_version,
            )
        except ValueError:
            raise HTTPException(
                status_code=409,
                detail=f"stale base_version {body.base_version}, store is at {store.version}",
            )
        effective = store.effective_labels(result.assignments)
        counts: dict[str, int] = {}
        for label in effective.values():
            if label:
                counts[label] = counts.get(label, 0) + 1
        return {
            "version": version,
            "effective_counts": dict(sorted(counts.items())),
            "unlabeled": sum(1 for v in effective.values() if not v),
        }

    @app.get("/api/labels", dependencies=[Depends(_auth)])
    def get_labels():
        store: LabelStore = state["store"]
        return {
            "version": store.version,
            "cluster_labels": store.cluster_labels,
            "image_overrides": store.image_overrides,
            "audit": store.audit,
        }

    @app.get("/api/export", dependencies=[Depends(_auth)])
    def export_csv():
        result = _communities()
        entries = _manifest_entries()
        store: LabelStore = state["store"]
        effective = store.effective_labels(result.assignments)
        lines = ["id,path,label"]
        for image_id in sorted(result.image_ids):
            entry = entries.get(image_id)
            path = entry.path if entry else image_id
            lines.append(f"{image_id},{path},{effective.get(image_id) or ''}")
        return PlainTextResponse(
            "\n".join(lines) + "\n",
            media_type="text/csv",
            headers={"Content-Disposition": "attachment; filename=labeled_manifest.csv"},
        )

    @app.get("/api/spectrum", dependencies=[Depends(_auth)])
    def spectrum_payload():
        if not run.spectrum_json.exists():
            raise HTTPException(status_code=404, detail="no spectrum report for this run")
        return json.loads(run.spectrum_json.read_text(encoding="utf-8"))

    @app.get("/api/image", dependencies=[Depends(_auth)])
    def image_bytes(id: str, size: str = "thumb"):
        entries = _manifest_entries()
        entry = entries.get(id)
        base = _dataset_base()
        if entry is None or base is None:
            raise HTTPException(status_code=404, detail=f"unknown image {id!r}")
        source = base / entry.path
        if not source.exists():
            raise HTTPException(status_code=404, detail=f"image file missing: {entry.path}")
        if size == "full":
            return FileResponse(source)
        cache = run.thumbs_dir
        cache.mkdir(exist_ok=True)
        thumb = cache / (hashlib.sha1(id.encode()).hexdigest() + ".png")
        if not thumb.exists():
            from PIL import Image

            with Image.open(source) as img:
                img = img.convert("L")
                img.thumbnail((THUMBNAIL_SIZE, THUMBNAIL_SIZE))
                buf = io.BytesIO()
                img.save(buf, format="PNG")
            thumb.write_bytes(buf.getvalue())
        return Response(thumb.read_bytes(), media_type="image/png")

    @app.get("/api/report/{name}", dependencies=[Depends(_auth)])
    def report_asset(name: str):
        path = run.report_dir / name
        if "/" in name or ".." in name or not path.exists():
            raise HTTPException(status_code=404, detail=f"no report asset {name!r}")
        media = "image/png" if name.endswith(".png") else "text/plain"
        if name.endswith(".json"):
            media = "application/json"
        if name.endswith(".csv"):
            media = "text/csv"
        return Response(path.read_bytes(), media_type=media)

    static_dir = Path(ui_dir) if ui_dir is not None else _default_ui_dir()
    if static_dir is not None and static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        # mounted last so every /api route keeps precedence
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
