"""HTTP surface for running listening tests.

Five endpoints on one FastAPI app: publish a test, fetch a listener's
assignment, submit one screen of scores, export everything as a response
CSV, and stream audio by content hash. Listeners only ever see opaque
labels and hashed audio URLs; system identities stay server-side until
export.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import (FileResponse, JSONResponse, PlainTextResponse,
                               Response)
from fastapi.staticfiles import StaticFiles

from ..evalstats import CSV_COLUMNS
from ..evalstats import Response as RatingRow
from .models import (AssignmentView, LabeledStimulus, Screen,
                     ScreenSubmission, TestDefinition, validate_definition)
from .store import (QuotaExceeded, Store, StoreConflict, TestState,
                    assigned_utterances, screen_labels)


def _audio_url(test_id: str, state: TestState, path: str) -> str:
    key = state.url_by_path[str(Path(path).resolve())]
    return f"/tests/{test_id}/audio/{key}"


def _build_view(state: TestState, listener_id: str) -> AssignmentView:
    definition = state.definition
    stimuli_by_utt = {u.utterance_id: u for u in definition.utterances}
    show_reference = definition.resolved_show_reference()
    screens = []
    for utt_id in assigned_utterances(definition, listener_id):
        utt = stimuli_by_utt[utt_id]
        labels = screen_labels(definition, listener_id, utt_id)
        stimuli = [LabeledStimulus(
            label=label,
            audio_url=_audio_url(definition.test_id, state,
                                 utt.stimuli[system_id]))
            for label, system_id in sorted(labels.items())]
        reference_url = None
        if show_reference and utt.reference:
            reference_url = _audio_url(definition.test_id, state, utt.reference)
        screens.append(Screen(utterance_id=utt_id, stimuli=stimuli,
                              reference_url=reference_url))
    progress = sum(1 for key in state.responses if key[0] == listener_id)
    return AssignmentView(test_id=definition.test_id, listener_id=listener_id,
                          aspect=definition.aspect,
                          show_reference=show_reference,
                          default_slider=definition.default_slider,
                          screens=screens, progress=progress)


def _export_rows(state: TestState) -> list[RatingRow]:
    definition = state.definition
    roles = state.roles
    rows = []
    for (listener_id, utterance_id), scores in state.responses.items():
        for system_id, score in scores.items():
            rows.append(RatingRow(listener_id=listener_id,
                                  utterance_id=utterance_id,
                                  aspect=definition.aspect,
                                  system_id=system_id, score=score,
                                  role=roles[system_id]))
    rows.sort(key=lambda r: (r.listener_id, r.utterance_id, r.system_id))
    return rows


def create_app(data_dir, ui_dir=None) -> FastAPI:
    """Build the service around one data directory.

    ui_dir, when given, is a directory of static files (the listener
    page) mounted at the root; API routes win on path conflicts.
    """
    store = Store(data_dir)
    app = FastAPI(title="voxbridge listening tests")
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def _shape_errors_as_400(request, exc: RequestValidationError):
        # same field-to-message contract as the semantic checks
        detail = {}
        for err in exc.errors():
            loc = ".".join(str(part) for part in err["loc"] if part != "body")
            detail[loc or "body"] = err["msg"]
        return JSONResponse(status_code=400, content={"detail": detail})

    def _state_or_404(test_id: str) -> TestState:
        state = store.get(test_id)
        if state is None:
            raise HTTPException(status_code=404,
                                detail=f"no test {test_id!r}")
        return state

    @app.post("/tests", status_code=201)
    def create_test(definition: TestDefinition) -> dict:
        errors = validate_definition(definition)
        if errors:
            raise HTTPException(status_code=400, detail=errors)
        try:
            store.create_test(definition)
        except StoreConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"test_id": definition.test_id,
                "screens": definition.sample_size,
                "listener_quota": definition.listener_quota}

    @app.get("/tests/{test_id}/assignment")
    def get_assignment(test_id: str, listener: str) -> AssignmentView:
        state = _state_or_404(test_id)
        try:
            store.ensure_listener(test_id, listener)
        except QuotaExceeded as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return _build_view(state, listener)

    @app.post("/tests/{test_id}/responses", status_code=204)
    def submit_screen(test_id: str, submission: ScreenSubmission) -> Response:
        state = _state_or_404(test_id)
        definition = state.definition
        if submission.listener_id not in state.listeners:
            raise HTTPException(
                status_code=400,
                detail=f"listener {submission.listener_id!r} has no assignment")
        assigned = assigned_utterances(definition, submission.listener_id)
        if submission.utterance_id not in assigned:
            raise HTTPException(
                status_code=400,
                detail=f"utterance {submission.utterance_id!r} is not on this "
                       "listener's assignment")
        labels = screen_labels(definition, submission.listener_id,
                               submission.utterance_id)
        if set(submission.scores) != set(labels):
            raise HTTPException(
                status_code=400,
                detail=f"scores must cover exactly the labels "
                       f"{sorted(labels)}, got {sorted(submission.scores)}")
        for label, score in submission.scores.items():
            if not 0.0 <= score <= 100.0:
                raise HTTPException(
                    status_code=400,
                    detail=f"score {score} for label {label!r} outside [0, 100]")
        scores_by_system = {labels[label]: score
                            for label, score in submission.scores.items()}
        try:
            store.add_response(test_id, submission.listener_id,
                               submission.utterance_id, scores_by_system)
        except StoreConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return Response(status_code=204)

    @app.get("/tests/{test_id}/export.csv")
    def export_csv(test_id: str) -> PlainTextResponse:
        state = _state_or_404(test_id)
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(CSV_COLUMNS)
        for row in _export_rows(state):
            writer.writerow([row.listener_id, row.utterance_id, row.aspect,
                             row.system_id, repr(row.score), row.role])
        return PlainTextResponse(buffer.getvalue(), media_type="text/csv")

    @app.get("/tests/{test_id}/audio/{content_hash}")
    def get_audio(test_id: str, content_hash: str) -> FileResponse:
        state = _state_or_404(test_id)
        path = state.audio.get(content_hash)
        if path is None:
            raise HTTPException(status_code=404,
                                detail=f"no audio {content_hash!r}")
        return FileResponse(path, media_type="audio/wav")

    if ui_dir is not None:
        if not Path(ui_dir).is_dir():
            raise ValueError(f"ui directory not found: {ui_dir}")
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
