"""Command-line interface over the same runtime the HTTP service uses."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path

from .change_gate import evaluate_gate, read_stream_manifest
from .config import AppConfig, build_runtime, config_from_file
from .door import CommandKind, DoorCommand, state_payload
from .frames import load_gray
from .geometry import FaceBox
from .store import (
    AllViewsRejectedError,
    DuplicatePersonError,
    EnrollmentImage,
    NotFoundError,
    Period,
    Relationship,
    canonical_json,
)


def _load_config(args: argparse.Namespace) -> AppConfig:
    cfg = config_from_file(args.config) if args.config else AppConfig()
    if args.data_dir:
        cfg = replace(cfg, data_dir=args.data_dir)
    return cfg


def _enrollment_images(paths: list[str]) -> list[EnrollmentImage]:
    # CLI enrollment images are assumed to be face crops: the whole image
    # is treated as the face region for the quality gate
    images = []
    for p in paths:
        frame = load_gray(p)
        images.append(
            EnrollmentImage(frame, FaceBox(0, 0, frame.width, frame.height))
        )
    return images


def _print_events(events) -> None:
    for event in events:
        print(f"event {event.event_id}: {event.summary_text}")


def cmd_run(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    runtime = build_runtime(_load_config(args))
    for camera in runtime.config.cameras:
        if camera.frames_dir:
            report = runtime.pipeline.run_stream(camera)
            _print_events(report.events)
            print(
                f"camera {camera.camera_id}: {report.frames_processed} frames, "
                f"{len(report.events)} events"
            )
    app = create_app(runtime, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    runtime = build_runtime(_load_config(args))
    camera = replace(runtime.config.camera(args.camera), frames_dir=args.directory)
    report = runtime.pipeline.run_stream(camera)
    _print_events(report.events)
    print(f"{report.frames_processed} frames, {len(report.events)} events")
    return 0


def cmd_evaluate_gate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    stream = read_stream_manifest(args.manifest)
    precision, recall = evaluate_gate(stream, cfg.gate)
    print(f"precision={precision} recall={recall}")
    return 0


def cmd_profile(args: argparse.Namespace) -> int:
    runtime = build_runtime(_load_config(args))
    store = runtime.store
    if args.profile_cmd == "add":
        try:
            subject_id = store.add_person(
                name=args.name,
                email=args.email,
                contact=args.contact,
                address=args.address,
                relationship=Relationship(args.relationship),
                initial_images=_enrollment_images(args.images),
                override_duplicate=args.override,
            )
        except (DuplicatePersonError, AllViewsRejectedError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"added person {subject_id}")
        return 0
    if args.profile_cmd == "add-views":
        try:
            view_ids = store.add_views(args.subject_id, _enrollment_images(args.images))
        except (NotFoundError, AllViewsRejectedError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"added views {view_ids}")
        return 0
    if args.profile_cmd == "delete":
        try:
            removed = store.delete_person(args.subject_id)
        except NotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"removed person {args.subject_id} ({removed} views)")
        return 0
    for person in store.list_persons():
        print(
            f"{person.subject_id}\t{person.name}\t{person.relationship.value}\t"
            f"views={len(person.views)}"
        )
    return 0


def cmd_door(args: argparse.Namespace) -> int:
    import time

    runtime = build_runtime(_load_config(args))
    now = time.time()
    runtime.door.tick(now)
    if args.door_cmd in ("open", "close"):
        if args.operator not in runtime.config.operators:
            print(f"error: operator {args.operator!r} not in allow-list", file=sys.stderr)
            return 1
        kind = CommandKind.OPEN if args.door_cmd == "open" else CommandKind.CLOSE
        state = runtime.door.command(
            DoorCommand(kind=kind, issued_by=args.operator, issued_at=now), now
        )
    else:
        state = runtime.door.state
    print(json.dumps(state_payload(state)))
    return 0


def cmd_summary(args: argparse.Namespace) -> int:
    runtime = build_runtime(_load_config(args))
    anchor = datetime.fromisoformat(args.anchor) if args.anchor else None
    try:
        report = runtime.store.query_summary(Period(args.period), anchor)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(canonical_json(report.payload()).decode("utf-8"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gatehouse")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--data-dir", help="override the configured data directory")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process configured camera directories, then serve the API")
    run.add_argument("--host", default="127.0.0.1")
    run.add_argument("--port", type=int, default=8000)
    run.add_argument("--ui-dir", default=None, help="static console directory to mount at /ui")
    run.set_defaults(func=cmd_run)

    ingest = sub.add_parser("ingest", help="process one directory of numbered frames")
    ingest.add_argument("directory")
    ingest.add_argument("--camera", default=None, help="camera id to ingest as")
    ingest.set_defaults(func=cmd_ingest)

    gate = sub.add_parser("evaluate-gate", help="score the change gate on a labeled manifest")
    gate.add_argument("manifest")
    gate.set_defaults(func=cmd_evaluate_gate)

    profile = sub.add_parser("profile", help="manage enrolled persons")
    psub = profile.add_subparsers(dest="profile_cmd", required=True)
    padd = psub.add_parser("add")
    padd.add_argument("--name", required=True)
    padd.add_argument("--email", default="")
    padd.add_argument("--contact", default="")
    padd.add_argument("--address", default="")
    padd.add_argument(
        "--relationship",
        default="Friend",
        choices=[r.value for r in Relationship],
    )
    padd.add_argument("--override", action="store_true")
    padd.add_argument("--images", nargs="*", default=[])
    padd.set_defaults(func=cmd_profile)
    pviews = psub.add_parser("add-views")
    pviews.add_argument("subject_id", type=int)
    pviews.add_argument("--images", nargs="+", required=True)
    pviews.set_defaults(func=cmd_profile)
    pdel = psub.add_parser("delete")
    pdel.add_argument("subject_id", type=int)
    pdel.set_defaults(func=cmd_profile)
    plist = psub.add_parser("list")
    plist.set_defaults(func=cmd_profile)

    door = sub.add_parser("door", help="door control")
    dsub = door.add_subparsers(dest="door_cmd", required=True)
    for verb in ("open", "close"):
        d = dsub.add_parser(verb)
        d.add_argument("--operator", default="admin")
        d.set_defaults(func=cmd_door)
    dstatus = dsub.add_parser("status")
    dstatus.set_defaults(func=cmd_door)

    summary = sub.add_parser("summary", help="periodic event summaries")
    summary.add_argument("period", choices=[p.value for p in Period])
    summary.add_argument("--anchor", default=None, help="ISO timestamp ending the window")
    summary.set_defaults(func=cmd_summary)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
