"""File-backed store for personal profiles and the append-only event
history, with periodic summary queries.

Layout under one root directory:
  profiles/<subject_id>/meta          key=value text
  profiles/<subject_id>/views/<n>.png enrolled face views
  events.log                          TSV, one checksummed record per line
  notifications.log                   TSV sidecar of delivery attempts
  tombstones.log                      subjects deleted but referenced by history
"""
from __future__ import annotations

import json
import os
import shutil
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .frames import GrayFrame, load_gray, save_gray
from .geometry import CaptureGuidance, FaceBox, Rect, SizeBand, guide_capture, patch_size_band
from .summary import AttributeLabel, Verdict, VerdictKind


class NotFoundError(KeyError):
    pass


class DuplicatePersonError(ValueError):
    pass


class AllViewsRejectedError(ValueError):
    def __init__(self, reasons: Sequence[str]):
        super().__init__("every provided view failed the capture quality gate")
        self.reasons = list(reasons)


class StaleReferenceError(ValueError):
    pass


class Relationship(str, Enum):
    FAMILY = "Family"
    FRIEND = "Friend"
    CAREGIVER = "Caregiver"


class Period(str, Enum):
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"

    @property
    def span(self) -> timedelta:
        if self is Period.DAILY:
            return timedelta(days=1)
        if self is Period.WEEKLY:
            return timedelta(days=7)
        return timedelta(days=30)


@dataclass(frozen=True)
class ViewRef:
    view_id: int
    path: str
    pose: str | None = None


@dataclass(frozen=True)
class PersonRecord:
    subject_id: int
    name: str
    email: str = ""
    contact: str = ""
    address: str = ""
    relationship: Relationship = Relationship.FRIEND
    views: tuple[ViewRef, ...] = ()


@dataclass(frozen=True)
class NotificationRecord:
    channel: str
    destination: str
    status: str


@dataclass(frozen=True)
class EventRecord:
    event_id: int
    timestamp: datetime
    camera_id: str
    location: str
    verdict: Verdict
    attributes: frozenset[AttributeLabel]
    summary_text: str
    scene_path: str
    tombstoned: bool = False
    notifications: tuple[NotificationRecord, ...] = ()

    def payload(self) -> dict:
        return {
            "event_id": self.event_id,
            "timestamp": self.timestamp.isoformat(),
            "camera_id": self.camera_id,
            "location": self.location,
            "verdict": {
                "kind": self.verdict.kind.value,
                "subject_id": self.verdict.subject_id,
                "name": self.verdict.name,
                "tombstoned": self.tombstoned,
            },
            "attributes": [a.value for a in AttributeLabel if a in self.attributes],
            "summary": self.summary_text,
            "scene_path": self.scene_path,
            "notifications": [
                {"channel": n.channel, "destination": n.destination, "status": n.status}
                for n in self.notifications
            ],
        }


@dataclass(frozen=True)
class SummaryReport:
    period: Period
    window_start: datetime
    window_end: datetime
    verdict_counts: Mapping[str, int]
    location_counts: Mapping[str, int]
    unknown_digests: tuple[dict, ...]

    def payload(self) -> dict:
        return {
            "period": self.period.value,
            "window": {
                "start": self.window_start.isoformat(),
                "end": self.window_end.isoformat(),
            },
            "verdict_counts": dict(self.verdict_counts),
            "location_counts": dict(self.location_counts),
            "unknown_events": list(self.unknown_digests),
        }


def canonical_json(payload: dict) -> bytes:
    """One serialization for summaries everywhere, so byte comparison between
    the API and direct store queries is meaningful."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


@dataclass(frozen=True)
class EnrollmentImage:
    image: GrayFrame
    face_box: FaceBox | None = None
    pose: str | None = None


def screen_enrollment_image(img: EnrollmentImage) -> str | None:
    """Reason the view fails the capture quality gate, or None if usable."""
    if img.face_box is None:
        return "no face detected"
    guidance = guide_capture(img.image.width, img.image.height, img.face_box)
    if guidance is CaptureGuidance.TOO_SMALL_COME_CLOSER:
        return guidance.value
    box_rect = Rect(0, 0, img.face_box.width, img.face_box.height)
    if patch_size_band(box_rect) is SizeBand.REJECT:
        return "face smaller than 20x20"
    return None


def _esc(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unesc(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _verdict_text(v: Verdict) -> str:
    if v.kind is VerdictKind.KNOWN:
        return f"Known:{v.subject_id}:{_esc(v.name)}"
    return v.kind.value


def _parse_verdict(text: str) -> Verdict:
    if text.startswith("Known:"):
        _, sid, name = text.split(":", 2)
        return Verdict.known(int(sid), _unesc(name))
    return Verdict(VerdictKind(text))


def _attrs_text(attrs: Iterable[AttributeLabel]) -> str:
    present = set(attrs)
    return ",".join(a.value for a in AttributeLabel if a in present)


def _parse_attrs(text: str) -> frozenset[AttributeLabel]:
    if not text:
        return frozenset()
    return frozenset(AttributeLabel(part) for part in text.split(","))


def _crc(body: str) -> str:
    return f"{zlib.crc32(body.encode('utf-8')) & 0xFFFFFFFF:08x}"


def _append_line(path: Path, line: str) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line + "\n")
        fh.flush()
        os.fsync(fh.fileno())


class ProfileStore:
    def __init__(self, root: str | Path, locations: Mapping[str, str] | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.locations = dict(locations or {})
        self.retrain_needed = False
        self._persons: dict[int, PersonRecord] = {}
        self._tombstoned: dict[int, str] = {}
        self._events: list[EventRecord] = []
        self._events_by_id: dict[int, int] = {}
        self._notifications: dict[int, list[NotificationRecord]] = {}
        self._last_ts_per_camera: dict[str, datetime] = {}
        self._load_profiles()
        self._load_tombstones()
        self._load_events()
        self._load_notifications()

    # ------------------------------------------------------------ paths

    @property
    def profiles_dir(self) -> Path:
        return self.root / "profiles"

    @property
    def events_path(self) -> Path:
        return self.root / "events.log"

    @property
    def notifications_path(self) -> Path:
        return self.root / "notifications.log"

    @property
    def tombstones_path(self) -> Path:
        return self.root / "tombstones.log"

    def location_of(self, camera_id: str) -> str:
        return self.locations.get(camera_id, camera_id)

    # ------------------------------------------------------------ loading

    def _load_profiles(self) -> None:
        if not self.profiles_dir.is_dir():
            return
        for person_dir in sorted(self.profiles_dir.iterdir()):
            if not person_dir.is_dir() or not person_dir.name.isdigit():
                continue
            meta_path = person_dir / "meta"
            if not meta_path.is_file():
                continue
            fields: dict[str, str] = {}
            for raw in meta_path.read_text(encoding="utf-8").splitlines():
                if "=" in raw:
                    key, value = raw.split("=", 1)
                    fields[key] = _unesc(value)
            subject_id = int(person_dir.name)
            views = []
            views_dir = person_dir / "views"
            if views_dir.is_dir():
                for view_file in sorted(views_dir.glob("*.png"), key=lambda p: int(p.stem)):
                    vid = int(view_file.stem)
                    views.append(
                        ViewRef(
                            view_id=vid,
                            path=str(view_file.relative_to(self.root)),
                            pose=fields.get(f"view.{vid}.pose") or None,
                        )
                    )
            self._persons[subject_id] = PersonRecord(
                subject_id=subject_id,
                name=fields.get("name", ""),
                email=fields.get("email", ""),
                contact=fields.get("contact", ""),
                address=fields.get("address", ""),
                relationship=Relationship(fields.get("relationship", "Friend")),
                views=tuple(views),
            )

    def _load_tombstones(self) -> None:
        if not self.tombstones_path.is_file():
            return
        for raw in self.tombstones_path.read_text(encoding="utf-8").splitlines():
            parts = raw.split("\t")
            if len(parts) >= 2:
                self._tombstoned[int(parts[0])] = _unesc(parts[1])

    def _load_events(self) -> None:
        if not self.events_path.is_file():
            return
        raw = self.events_path.read_bytes()
        good_bytes = 0
        for line in raw.decode("utf-8", errors="replace").splitlines(keepends=True):
            if not line.endswith("\n"):
                break  # torn trailing write
            record = self._parse_event_line(line.rstrip("\n"))
            if record is None:
                break
            expected = self._events[-1].event_id + 1 if self._events else 1
            if record.event_id != expected:
                break
            self._events.append(record)
            self._events_by_id[record.event_id] = len(self._events) - 1
            self._last_ts_per_camera[record.camera_id] = record.timestamp
            good_bytes += len(line.encode("utf-8"))
        if good_bytes < len(raw):
            # drop the torn tail so future appends start on a clean boundary
            with open(self.events_path, "rb+") as fh:
                fh.truncate(good_bytes)

    def _parse_event_line(self, line: str) -> EventRecord | None:
        parts = line.split("\t")
        if len(parts) != 8:
            return None
        body = "\t".join(parts[:7])
        if _crc(body) != parts[7]:
            return None
        try:
            event_id = int(parts[0])
            ts = datetime.fromisoformat(parts[1])
            camera_id = _unesc(parts[2])
            verdict = _parse_verdict(parts[3])
            attrs = _parse_attrs(parts[4])
            summary = _unesc(parts[5])
            scene = _unesc(parts[6])
        except (ValueError, KeyError):
            return None
        return EventRecord(
            event_id=event_id,
            timestamp=ts,
            camera_id=camera_id,
            location=self.location_of(camera_id),
            verdict=verdict,
            attributes=attrs,
            summary_text=summary,
            scene_path=scene,
        )

    def _load_notifications(self) -> None:
        if not self.notifications_path.is_file():
            return
        for raw in self.notifications_path.read_text(encoding="utf-8").splitlines():
            parts = raw.split("\t")
            if len(parts) != 5 or _crc("\t".join(parts[:4])) != parts[4]:
                continue
            event_id = int(parts[0])
            self._notifications.setdefault(event_id, []).append(
                NotificationRecord(
                    channel=_unesc(parts[1]),
                    destination=_unesc(parts[2]),
                    status=_unesc(parts[3]),
                )
            )

    # ------------------------------------------------------------ persons

    def add_person(
        self,
        name: str,
        email: str = "",
        contact: str = "",
        address: str = "",
        relationship: Relationship = Relationship.FRIEND,
        initial_images: Sequence[EnrollmentImage] = (),
        override_duplicate: bool = False,
    ) -> int:
        if not name:
            raise ValueError("person name must be non-empty")
        if not override_duplicate:
            for person in self._persons.values():
                if person.name == name and person.contact == contact:
                    raise DuplicatePersonError(
                        f"{name!r} with contact {contact!r} already exists"
                    )
        accepted, rejections = self._screen(initial_images)
        if initial_images and not accepted:
            raise AllViewsRejectedError([reason for _, reason in rejections])
        subject_id = self._next_subject_id()
        person_dir = self.profiles_dir / str(subject_id)
        (person_dir / "views").mkdir(parents=True)
        meta = {
            "name": name,
            "email": email,
            "contact": contact,
            "address": address,
            "relationship": relationship.value,
        }
        self._persons[subject_id] = PersonRecord(
            subject_id=subject_id,
            name=name,
            email=email,
            contact=contact,
            address=address,
            relationship=relationship,
        )
        self._write_meta(subject_id, meta)
        if accepted:
            self._store_views(subject_id, accepted)
        self.retrain_needed = True
        return subject_id

    def add_views(self, subject_id: int, images: Sequence[EnrollmentImage]) -> list[int]:
        ids, _ = self.add_views_detailed(subject_id, images)
        return ids

    def add_views_detailed(
        self, subject_id: int, images: Sequence[EnrollmentImage]
    ) -> tuple[list[int], list[tuple[int, str]]]:
        if subject_id not in self._persons:
            raise NotFoundError(f"no person with id {subject_id}")
        accepted, rejections = self._screen(images)
        if images and not accepted:
            raise AllViewsRejectedError([reason for _, reason in rejections])
        view_ids = self._store_views(subject_id, accepted) if accepted else []
        if view_ids:
            self.retrain_needed = True
        return view_ids, rejections

    def _screen(
        self, images: Sequence[EnrollmentImage]
    ) -> tuple[list[EnrollmentImage], list[tuple[int, str]]]:
        accepted: list[EnrollmentImage] = []
        rejections: list[tuple[int, str]] = []
        for i, img in enumerate(images):
            reason = screen_enrollment_image(img)
            if reason is None:
                accepted.append(img)
            else:
                rejections.append((i, reason))
        return accepted, rejections

    def _store_views(self, subject_id: int, images: Sequence[EnrollmentImage]) -> list[int]:
        person = self._persons[subject_id]
        views_dir = self.profiles_dir / str(subject_id) / "views"
        views_dir.mkdir(parents=True, exist_ok=True)
        next_vid = max((v.view_id for v in person.views), default=0) + 1
        new_views = list(person.views)
        ids: list[int] = []
        meta_extra: dict[str, str] = {}
        for img in images:
            vid = next_vid
            next_vid += 1
            path = views_dir / f"{vid}.png"
            save_gray(img.image, path)
            new_views.append(
                ViewRef(view_id=vid, path=str(path.relative_to(self.root)), pose=img.pose)
            )
            if img.pose:
                meta_extra[f"view.{vid}.pose"] = img.pose
            ids.append(vid)
        self._persons[subject_id] = PersonRecord(
            subject_id=person.subject_id,
            name=person.name,
            email=person.email,
            contact=person.contact,
            address=person.address,
            relationship=person.relationship,
            views=tuple(new_views),
        )
        if meta_extra:
            self._append_meta(subject_id, meta_extra)
        return ids

    def _write_meta(self, subject_id: int, fields: Mapping[str, str]) -> None:
        meta_path = self.profiles_dir / str(subject_id) / "meta"
        lines = [f"{key}={_esc(value)}" for key, value in fields.items()]
        meta_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def _append_meta(self, subject_id: int, fields: Mapping[str, str]) -> None:
        meta_path = self.profiles_dir / str(subject_id) / "meta"
        with open(meta_path, "a", encoding="utf-8") as fh:
            for key, value in fields.items():
                fh.write(f"{key}={_esc(value)}\n")

    def _next_subject_id(self) -> int:
        used = set(self._persons) | set(self._tombstoned)
        return max(used, default=0) + 1

    def delete_person(self, subject_id: int) -> int:
        person = self._persons.pop(subject_id, None)
        if person is None:
            raise NotFoundError(f"no person with id {subject_id}")
        removed = len(person.views)
        shutil.rmtree(self.profiles_dir / str(subject_id), ignore_errors=True)
        self._tombstoned[subject_id] = person.name
        _append_line(
            self.tombstones_path,
            f"{subject_id}\t{_esc(person.name)}\t{datetime.now(timezone.utc).isoformat()}",
        )
        self.retrain_needed = True
        return removed

    def get_person(self, subject_id: int) -> PersonRecord:
        if subject_id not in self._persons:
            raise NotFoundError(f"no person with id {subject_id}")
        return self._persons[subject_id]

    def list_persons(self) -> list[PersonRecord]:
        return [self._persons[sid] for sid in sorted(self._persons)]

    def view_image(self, subject_id: int, view_id: int) -> GrayFrame:
        person = self.get_person(subject_id)
        for view in person.views:
            if view.view_id == view_id:
                return load_gray(self.root / view.path)
        raise NotFoundError(f"person {subject_id} has no view {view_id}")

    def enrollment(self) -> dict[int, list[GrayFrame]]:
        out: dict[int, list[GrayFrame]] = {}
        for sid in sorted(self._persons):
            person = self._persons[sid]
            if person.views:
                out[sid] = [load_gray(self.root / v.path) for v in person.views]
        return out

    # ------------------------------------------------------------ events

    def record_event(
        self,
        timestamp: datetime,
        camera_id: str,
        verdict: Verdict,
        attributes: Iterable[AttributeLabel],
        summary_text: str,
        scene_path: str = "",
    ) -> int:
        if timestamp.tzinfo is None:
            raise ValueError("event timestamps must be timezone-aware")
        timestamp = timestamp.astimezone(timezone.utc)
        if verdict.kind is VerdictKind.KNOWN and verdict.subject_id not in self._persons:
            raise StaleReferenceError(
                f"event references missing subject {verdict.subject_id}"
            )
        last = self._last_ts_per_camera.get(camera_id)
        if last is not None and timestamp < last:
            raise ValueError(
                f"timestamp for camera {camera_id!r} moves backwards: {timestamp} < {last}"
            )
        event_id = self._events[-1].event_id + 1 if self._events else 1
        record = EventRecord(
            event_id=event_id,
            timestamp=timestamp,
            camera_id=camera_id,
            location=self.location_of(camera_id),
            verdict=verdict,
            attributes=frozenset(attributes),
            summary_text=summary_text,
            scene_path=scene_path,
        )
        body = "\t".join(
            [
                str(record.event_id),
                record.timestamp.isoformat(),
                _esc(record.camera_id),
                _verdict_text(record.verdict),
                _attrs_text(record.attributes),
                _esc(record.summary_text),
                _esc(record.scene_path),
            ]
        )
        _append_line(self.events_path, body + "\t" + _crc(body))
        self._events.append(record)
        self._events_by_id[event_id] = len(self._events) - 1
        self._last_ts_per_camera[camera_id] = timestamp
        return event_id

    def record_notification(
        self, event_id: int, channel: str, destination: str, status: str
    ) -> None:
        if event_id not in self._events_by_id:
            raise NotFoundError(f"no event {event_id}")
        body = "\t".join([str(event_id), _esc(channel), _esc(destination), _esc(status)])
        _append_line(self.notifications_path, body + "\t" + _crc(body))
        self._notifications.setdefault(event_id, []).append(
            NotificationRecord(channel=channel, destination=destination, status=status)
        )

    def _materialize(self, record: EventRecord) -> EventRecord:
        tombstoned = (
            record.verdict.kind is VerdictKind.KNOWN
            and record.verdict.subject_id in self._tombstoned
        )
        notifications = tuple(self._notifications.get(record.event_id, ()))
        if tombstoned == record.tombstoned and notifications == record.notifications:
            return record
        return EventRecord(
            event_id=record.event_id,
            timestamp=record.timestamp,
            camera_id=record.camera_id,
            location=record.location,
            verdict=record.verdict,
            attributes=record.attributes,
            summary_text=record.summary_text,
            scene_path=record.scene_path,
            tombstoned=tombstoned,
            notifications=notifications,
        )

    def get_event(self, event_id: int) -> EventRecord:
        if event_id not in self._events_by_id:
            raise NotFoundError(f"no event {event_id}")
        return self._materialize(self._events[self._events_by_id[event_id]])

    def events_since(self, after_id: int = 0) -> list[EventRecord]:
        return [self._materialize(e) for e in self._events if e.event_id > after_id]

    def last_event_id(self) -> int:
        return self._events[-1].event_id if self._events else 0

    # ------------------------------------------------------------ summaries

    def query_summary(self, period: Period, anchor: datetime | None = None) -> SummaryReport:
        if anchor is None:
            anchor = datetime.now(timezone.utc)
        if anchor.tzinfo is None:
            raise ValueError("anchor must be timezone-aware")
        anchor = anchor.astimezone(timezone.utc)
        start = anchor - period.span
        verdict_counts = {kind.value: 0 for kind in VerdictKind}
        location_counts: dict[str, int] = {}
        digests: list[dict] = []
        for record in self._events:
            if not (start <= record.timestamp < anchor):
                continue
            verdict_counts[record.verdict.kind.value] += 1
            location_counts[record.location] = location_counts.get(record.location, 0) + 1
            if record.verdict.kind is VerdictKind.UNKNOWN:
                digests.append(
                    {
                        "event_id": record.event_id,
                        "timestamp": record.timestamp.isoformat(),
                        "camera_id": record.camera_id,
                        "location": record.location,
                        "summary": record.summary_text,
                    }
                )
        digests.sort(key=lambda d: d["event_id"])
        return SummaryReport(
            period=period,
            window_start=start,
            window_end=anchor,
            verdict_counts=verdict_counts,
            location_counts=dict(sorted(location_counts.items())),
            unknown_digests=tuple(digests),
        )
