"""HTTP+JSON service: event feed (with server-push stream), door control,
summaries, and profile management over the store/pipeline/door runtime."""
from __future__ import annotations

import asyncio
import base64
import json
from datetime import datetime
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.responses import Response, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import Runtime
from .door import CommandKind, DoorCommand, state_payload
from .frames import decode_gray
from .geometry import FaceBox, guide_capture
from .store import (
    AllViewsRejectedError,
    DuplicatePersonError,
    EnrollmentImage,
    NotFoundError,
    Period,
    Relationship,
    canonical_json,
    screen_enrollment_image,
)


class ViewUpload(BaseModel):
    png_base64: str
    face_box: list[int] | None = None
    pose: str | None = None


class ProfileUpload(BaseModel):
    name: str
    email: str = ""
    contact: str = ""
    address: str = ""
    relationship: str = "Friend"
    override_duplicate: bool = False
    views: list[ViewUpload] = []


class ViewsUpload(BaseModel):
    views: list[ViewUpload]


class GuidanceRequest(BaseModel):
    face_box: list[int]
    width: int | None = None
    height: int | None = None
    png_base64: str | None = None


class DoorRequest(BaseModel):
    correlation: int | None = None


def _bad_request(message: str, status: int = 422) -> HTTPException:
    return HTTPException(status_code=status, detail={"error": message})


def _decode_views(views: list[ViewUpload]) -> list[EnrollmentImage]:
    images: list[EnrollmentImage] = []
    for i, view in enumerate(views):
        try:
            frame = decode_gray(base64.b64decode(view.png_base64, validate=True))
        except Exception:
            raise _bad_request(f"view {i}: not a decodable image")
        box = None
        if view.face_box is not None:
            if len(view.face_box) != 4:
                raise _bad_request(f"view {i}: face_box must be [x, y, w, h]")
            try:
                box = FaceBox(*view.face_box)
            except ValueError as exc:
                raise _bad_request(f"view {i}: {exc}")
        images.append(EnrollmentImage(frame, box, pose=view.pose))
    return images


def _screen_report(images: list[EnrollmentImage]) -> list[dict]:
    rejected = []
    for i, image in enumerate(images):
        reason = screen_enrollment_image(image)
        if reason is not None:
            rejected.append({"index": i, "reason": reason})
    return rejected


def create_app(runtime: Runtime, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="gatehouse")
    store = runtime.store
    operators = set(runtime.config.operators)

    def authorize(token: str | None) -> str:
        if token is None:
            raise _bad_request("missing X-Operator-Token header", status=401)
        if token not in operators:
            raise _bad_request("operator not in allow-list", status=403)
        return token

    def retrain_if_needed() -> None:
        if store.retrain_needed:
            runtime.pipeline.retrain()

    # ------------------------------------------------------------ events

    @app.get("/events")
    def get_events(since: int = Query(0, ge=0)):
        return {"events": [e.payload() for e in store.events_since(since)]}

    @app.get("/events/stream")
    async def stream_events(
        since: int = Query(default=None),
        max_events: int | None = Query(None, ge=1),
    ):
        start_after = store.last_event_id() if since is None else since

        async def gen():
            last = start_after
            sent = 0
            while True:
                for event in store.events_since(last):
                    last = event.event_id
                    yield f"id: {event.event_id}\ndata: {json.dumps(event.payload())}\n\n"
                    sent += 1
                    if max_events is not None and sent >= max_events:
                        return
                await asyncio.sleep(0.05)

        return StreamingResponse(gen(), media_type="text/event-stream")

    @app.get("/events/{event_id}/scene")
    def get_scene(event_id: int):
        try:
            event = store.get_event(event_id)
        except NotFoundError:
            raise _bad_request(f"no event {event_id}", status=404)
        if not event.scene_path:
            raise _bad_request(f"event {event_id} has no scene image", status=404)
        path = store.root / event.scene_path
        if not path.is_file():
            raise _bad_request(f"scene file missing for event {event_id}", status=404)
        return Response(content=path.read_bytes(), media_type="image/png")

    # ------------------------------------------------------------ door

    @app.get("/door")
    def get_door():
        state = runtime.door.tick(runtime.door_clock())
        return state_payload(state)

    def door_command(kind: CommandKind, token: str | None, body: DoorRequest | None):
        identity = authorize(token)
        now = runtime.door_clock()
        runtime.door.tick(now)
        cmd = DoorCommand(
            kind=kind,
            issued_by=identity,
            issued_at=now,
            correlation=body.correlation if body else None,
        )
        state = runtime.door.command(cmd, now)
        return state_payload(state)

    @app.post("/door/open")
    def open_door(
        body: DoorRequest | None = None,
        x_operator_token: str | None = Header(default=None),
    ):
        return door_command(CommandKind.OPEN, x_operator_token, body)

    @app.post("/door/close")
    def close_door(
        body: DoorRequest | None = None,
        x_operator_token: str | None = Header(default=None),
    ):
        return door_command(CommandKind.CLOSE, x_operator_token, body)

    # ------------------------------------------------------------ summary

    @app.get("/summary")
    def get_summary(period: str = Query(...), anchor: str | None = Query(None)):
        try:
            parsed_period = Period(period)
        except ValueError:
            raise _bad_request("period must be daily, weekly, or monthly")
        anchor_dt = None
        if anchor is not None:
            try:
                anchor_dt = datetime.fromisoformat(anchor)
            except ValueError:
                raise _bad_request("anchor must be an ISO 8601 timestamp")
        try:
            report = store.query_summary(parsed_period, anchor_dt)
        except ValueError as exc:
            raise _bad_request(str(exc))
        return Response(
            content=canonical_json(report.payload()), media_type="application/json"
        )

    # ------------------------------------------------------------ profiles

    @app.get("/profiles")
    def list_profiles():
        return {
            "persons": [
                {
                    "subject_id": p.subject_id,
                    "name": p.name,
                    "email": p.email,
                    "contact": p.contact,
                    "address": p.address,
                    "relationship": p.relationship.value,
                    "views": [{"view_id": v.view_id, "pose": v.pose} for v in p.views],
                }
                for p in store.list_persons()
            ]
        }

    @app.post("/profiles", status_code=201)
    def add_profile(body: ProfileUpload):
        try:
            relationship = Relationship(body.relationship)
        except ValueError:
            raise _bad_request(f"unknown relationship {body.relationship!r}")
        images = _decode_views(body.views)
        rejected = _screen_report(images)
        try:
            subject_id = store.add_person(
                name=body.name,
                email=body.email,
                contact=body.contact,
                address=body.address,
                relationship=relationship,
                initial_images=images,
                override_duplicate=body.override_duplicate,
            )
        except DuplicatePersonError as exc:
            raise _bad_request(str(exc), status=409)
        except AllViewsRejectedError:
            raise _bad_request("every view failed the capture quality gate")
        except ValueError as exc:
            raise _bad_request(str(exc))
        retrain_if_needed()
        person = store.get_person(subject_id)
        return {
            "subject_id": subject_id,
            "accepted_views": [v.view_id for v in person.views],
            "rejected": rejected,
        }

    @app.post("/profiles/{subject_id}/views")
    def add_profile_views(subject_id: int, body: ViewsUpload):
        images = _decode_views(body.views)
        try:
            accepted, rejections = store.add_views_detailed(subject_id, images)
        except NotFoundError:
            raise _bad_request(f"no person {subject_id}", status=404)
        except AllViewsRejectedError:
            raise _bad_request("every view failed the capture quality gate")
        retrain_if_needed()
        return {
            "accepted_views": accepted,
            "rejected": [{"index": i, "reason": r} for i, r in rejections],
        }

    @app.delete("/profiles/{subject_id}")
    def delete_profile(subject_id: int):
        try:
            removed = store.delete_person(subject_id)
        except NotFoundError:
            raise _bad_request(f"no person {subject_id}", status=404)
        retrain_if_needed()
        return {"removed_views": removed}

    @app.post("/profiles/guidance")
    def profile_guidance(body: GuidanceRequest):
        if body.png_base64 is not None:
            try:
                frame = decode_gray(base64.b64decode(body.png_base64, validate=True))
            except Exception:
                raise _bad_request("not a decodable image")
            width, height = frame.width, frame.height
        elif body.width is not None and body.height is not None:
            width, height = body.width, body.height
        else:
            raise _bad_request("provide png_base64 or width and height")
        if len(body.face_box) != 4:
            raise _bad_request("face_box must be [x, y, w, h]")
        try:
            box = FaceBox(*body.face_box)
            guidance = guide_capture(width, height, box)
        except ValueError as exc:
            raise _bad_request(str(exc))
        return {"guidance": guidance.value}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
