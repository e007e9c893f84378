"""HTTP facade for the human study: trials out, judgments in, results back.

Trial payloads carry rendered segmentations only; system identities stay
server-side so pairwise comparisons remain blind. Results endpoints are
pure recomputations from the judgment store, so a restart that replays the
store serves identical numbers.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .core import Transcript
from .decode import render_labels
from .humaneval import (
    BalancedSampler,
    DuplicateJudgmentError,
    Judgment,
    JudgmentStore,
    MODE_AB,
    MODE_LIKERT,
    PoolExhausted,
    compute_elo,
    compute_likert,
)
from .ingest import read_jsonl_dataset, read_labels_file

DEFAULT_TRIAL_TIMEOUT = 900.0


@dataclass(frozen=True, slots=True)
class StudyConfig:
    """What the study serves: documents and each system's segmentations."""

    dataset: Path
    systems: dict[str, Path]
    documents: tuple[str, ...] = ()

    @classmethod
    def from_file(cls, path: str | Path) -> "StudyConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        base = path.parent
        try:
            return cls(
                dataset=base / payload["dataset"],
                systems={
                    name: base / labels_path
                    for name, labels_path in payload["systems"].items()
                },
                documents=tuple(payload.get("documents", ())),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"study config needs dataset and systems fields: {exc}") from exc


def load_renderings(config: StudyConfig) -> tuple[tuple[str, ...], dict[tuple[str, str], str]]:
    """Render every (system, document) segmentation up front.

    Returns the served document ids and a (system, doc_id) → text map.
    Only documents present in the dataset and in every system's labels are
    served, unless the config pins an explicit document list.
    """
    records = {r.id: r for r in read_jsonl_dataset(config.dataset)}
    system_labels = {
        name: read_labels_file(path) for name, path in config.systems.items()
    }
    if config.documents:
        doc_ids = config.documents
    else:
        doc_ids = tuple(
            doc_id
            for doc_id in records
            if all(doc_id in labels for labels in system_labels.values())
        )
    renderings: dict[tuple[str, str], str] = {}
    for doc_id in doc_ids:
        if doc_id not in records:
            raise ValueError(f"document {doc_id!r} not in dataset")
        transcript = Transcript.from_sentence_texts(
            doc_id, records[doc_id].sentence_texts()
        )
        for system, labels in system_labels.items():
            if doc_id not in labels:
                raise ValueError(f"system {system!r} has no labels for {doc_id!r}")
            renderings[(system, doc_id)] = render_labels(transcript, labels[doc_id])
    if not doc_ids:
        raise ValueError("no documents are covered by every system")
    return doc_ids, renderings


class JudgmentBody(BaseModel):
    trial_id: str
    response: str | int


def create_app(
    store_path: str | Path,
    config: StudyConfig,
    seed: int | None = None,
    trial_timeout: float = DEFAULT_TRIAL_TIMEOUT,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    doc_ids, renderings = load_renderings(config)
    store = JudgmentStore(store_path)
    sampler = BalancedSampler(
        systems=sorted(config.systems),
        doc_ids=doc_ids,
        seed=seed,
        trial_timeout=trial_timeout,
    )
    sampler.replay(store.load())

    app = FastAPI()
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    lock = threading.Lock()
    completed: set[str] = set(store.trial_ids())

    @app.get("/api/trial")
    def get_trial(participant: str = "", mode: str = MODE_AB) -> Response:
        if not participant:
            return JSONResponse({"error": "participant is required"}, status_code=400)
        if mode not in (MODE_AB, MODE_LIKERT):
            return JSONResponse({"error": f"unknown mode {mode!r}"}, status_code=400)
        with lock:
            try:
                trial = sampler.next_trial(participant, mode)
            except PoolExhausted:
                return Response(status_code=204)
        if mode == MODE_AB:
            payload = {
                "trial_id": trial.trial_id,
                "mode": mode,
                "doc_id": trial.doc_id,
                "renderings": [
                    {"side": side, "text": renderings[(system, trial.doc_id)]}
                    for side, system in zip(("A", "B"), trial.systems)
                ],
                "response_schema": {"type": "choice", "options": ["A", "B", "TIE"]},
            }
        else:
            payload = {
                "trial_id": trial.trial_id,
                "mode": mode,
                "doc_id": trial.doc_id,
                "renderings": [
                    {"text": renderings[(trial.systems[0], trial.doc_id)]}
                ],
                "response_schema": {"type": "scale", "min": 1, "max": 5},
            }
        return JSONResponse(payload)

    @app.post("/api/judgment")
    def post_judgment(body: JudgmentBody) -> Response:
        with lock:
            if body.trial_id in completed:
                return JSONResponse(
                    {"error": f"trial {body.trial_id!r} already judged"},
                    status_code=409,
                )
            trial = sampler.pending(body.trial_id)
            if trial is None:
                return JSONResponse(
                    {"error": f"trial {body.trial_id!r} was never issued or expired"},
                    status_code=404,
                )
            try:
                judgment = Judgment(
                    trial_id=trial.trial_id,
                    participant=trial.participant,
                    mode=trial.mode,
                    doc_id=trial.doc_id,
                    systems=trial.systems,
                    response=body.response,
                    timestamp=time.time(),
                )
            except ValueError as exc:
                return JSONResponse({"error": str(exc)}, status_code=422)
            try:
                store.append(judgment)
            except DuplicateJudgmentError as exc:
                return JSONResponse({"error": str(exc)}, status_code=409)
            sampler.complete(trial.trial_id)
            completed.add(trial.trial_id)
        return JSONResponse({"status": "ok", "trial_id": trial.trial_id})

    @app.get("/api/results/elo")
    def get_elo() -> Response:
        snapshot = [j for j in store.load() if j.mode == MODE_AB]
        state = compute_elo(snapshot)
        ratings = sorted(
            (
                {"system": system, "rating": rating, "n": state.counts.get(system, 0)}
                for system, rating in state.ratings.items()
            ),
            key=lambda row: -row["rating"],
        )
        return JSONResponse(
            {"k": state.k, "initial": state.initial, "ratings": ratings}
        )

    @app.get("/api/results/likert")
    def get_likert() -> Response:
        snapshot = [j for j in store.load() if j.mode == MODE_LIKERT]
        summaries = compute_likert(snapshot)
        return JSONResponse(
            {
                "ratings": [
                    {"system": s, "mean": v.mean, "std": v.std, "n": v.n}
                    for s, v in summaries.items()
                ]
            }
        )

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "documents": len(doc_ids), "judgments": len(store)}

    return app
