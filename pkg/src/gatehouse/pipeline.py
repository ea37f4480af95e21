"""End-to-end frame pipeline: change gate, detection, orientation,
recognition, attribute labeling, summary, persistence, notification.

Detection itself is pluggable; the shipped implementation replays a
per-frame fixture file so whole runs are deterministic."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from .change_gate import GateConfig, detect_change
from .frames import GrayFrame, load_gray, save_gray
from .geometry import (
    DegenerateGeometryError,
    DegenerateLandmarksError,
    FaceBox,
    LandmarkSet,
    OrientationEstimate,
    estimate_orientation,
    crop_patches,
    needs_frontalization,
)
from .lbp import FaceRecognizer
from .notifications import Notifier
from .store import EventRecord, NotFoundError, ProfileStore
from .summary import (
    AttributeClassifier,
    AttributeLabel,
    AttributeStageError,
    Verdict,
    attribute_phrase_list,
    classify_attributes,
    compose_summary,
)


@dataclass(frozen=True)
class CameraSource:
    camera_id: str
    location: str
    frames_dir: str | None = None

    def __post_init__(self):
        if not self.camera_id:
            raise ValueError("camera_id must be non-empty")
        if not self.location:
            raise ValueError("location label must be non-empty")


@dataclass(frozen=True)
class FrameClock:
    """Injectable time base: frame index -> wall timestamp and stream seconds."""

    start: datetime
    frame_interval: float = 1.0

    def __post_init__(self):
        if self.start.tzinfo is None:
            raise ValueError("clock start must be timezone-aware")
        if self.frame_interval <= 0:
            raise ValueError("frame interval must be positive")

    def at(self, frame_index: int) -> datetime:
        return self.start + timedelta(seconds=frame_index * self.frame_interval)

    def seconds(self, frame_index: int) -> float:
        return frame_index * self.frame_interval


@dataclass(frozen=True)
class FaceObservation:
    box: FaceBox
    landmarks: LandmarkSet


@dataclass(frozen=True)
class PersonObservation:
    box: FaceBox
    face: FaceObservation | None = None


class Detector(Protocol):
    """Stands in for the person/face detector pair; returns every person in
    the frame with an optional face observation."""

    def detect(self, frame_index: int, frame: GrayFrame) -> Sequence[PersonObservation]: ...


def load_detection_fixture(path: str | Path) -> dict[int, tuple[PersonObservation, ...]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    table: dict[int, tuple[PersonObservation, ...]] = {}
    for key, entries in data.items():
        persons = []
        for entry in entries:
            x, y, w, h = entry["person_box"]
            face = None
            if entry.get("face") is not None:
                fx, fy, fw, fh = entry["face"]["box"]
                face = FaceObservation(
                    box=FaceBox(fx, fy, fw, fh),
                    landmarks=LandmarkSet(entry["face"]["landmarks"]),
                )
            persons.append(PersonObservation(box=FaceBox(x, y, w, h), face=face))
        table[int(key)] = tuple(persons)
    return table


@dataclass
class FixtureDetector:
    table: Mapping[int, Sequence[PersonObservation]]

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureDetector":
        return cls(load_detection_fixture(path))

    def detect(self, frame_index: int, frame: GrayFrame) -> Sequence[PersonObservation]:
        persons = self.table.get(frame_index, ())
        for person in persons:
            _check_box(person.box, frame, "person")
            if person.face is not None:
                _check_box(person.face.box, frame, "face")
        return persons


def _check_box(box: FaceBox, frame: GrayFrame, what: str) -> None:
    if box.x < 0 or box.y < 0 or box.x + box.width > frame.width or box.y + box.height > frame.height:
        raise ValueError(f"{what} box {box} falls outside the {frame.width}x{frame.height} frame")


def _crop(frame: GrayFrame, box: FaceBox) -> GrayFrame:
    return GrayFrame(frame.pixels[box.y : box.y + box.height, box.x : box.x + box.width])


@dataclass(frozen=True)
class PersonResult:
    box: FaceBox
    verdict: Verdict
    attributes: frozenset[AttributeLabel]
    orientation: OrientationEstimate | None
    needs_frontalization: bool | None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class FrameOutcome:
    frame_index: int
    active: bool
    score: int
    persons: tuple[PersonResult, ...] = ()
    event: EventRecord | None = None


@dataclass(frozen=True)
class StreamReport:
    frames_processed: int
    events: tuple[EventRecord, ...]
    frame_seconds: tuple[float, ...]

    @property
    def max_frame_seconds(self) -> float:
        return max(self.frame_seconds, default=0.0)


@dataclass(frozen=True)
class NotificationMessage:
    subject: str
    body: str
    attachment: str | None


def build_notification_message(event: EventRecord) -> NotificationMessage:
    phrases = attribute_phrase_list(event.attributes)
    body = (
        f"{event.summary_text}\n"
        f"attributes: {phrases if phrases else 'none'}\n"
        f"time: {event.timestamp.isoformat()}\n"
        f"location: {event.location}\n"
    )
    return NotificationMessage(
        subject=f"Alert at {event.location}",
        body=body,
        attachment=event.scene_path or None,
    )


class Pipeline:
    def __init__(
        self,
        store: ProfileStore,
        detector: Detector,
        recognizer: FaceRecognizer,
        classifier: AttributeClassifier,
        notifier: Notifier | None = None,
        clock: FrameClock | None = None,
        gate_config: GateConfig = GateConfig(),
        tau: float = 5.0,
        alpha_band: float = 15.0,
        beta_band: float = 10.0,
        head_reach: int = 180,
    ):
        self.store = store
        self.detector = detector
        self.recognizer = recognizer
        self.classifier = classifier
        self.notifier = notifier
        self.clock = clock or FrameClock(datetime.now(timezone.utc))
        self.gate_config = gate_config
        self.tau = tau
        self.alpha_band = alpha_band
        self.beta_band = beta_band
        self.head_reach = head_reach
        self.on_event: list[Callable[[EventRecord], None]] = []

    # ------------------------------------------------------------ training

    def retrain(self) -> None:
        self.recognizer.train(self.store.enrollment())
        self.store.retrain_needed = False

    # ------------------------------------------------------------ one frame

    def process_frame(
        self,
        camera: CameraSource,
        frame_index: int,
        frame: GrayFrame,
        prev_frame: GrayFrame | None,
    ) -> FrameOutcome:
        if prev_frame is None:
            return FrameOutcome(frame_index=frame_index, active=False, score=0)
        decision = detect_change(prev_frame, frame, self.gate_config)
        if not decision.active:
            return FrameOutcome(frame_index=frame_index, active=False, score=decision.score)

        observations = self.detector.detect(frame_index, frame)
        persons = tuple(self._assess_person(frame, obs) for obs in observations)
        if not persons:
            return FrameOutcome(frame_index=frame_index, active=True, score=decision.score)

        headline = self._headline(persons)
        visual = compose_summary(headline.verdict, camera.location, headline.attributes)
        scene_rel = self._save_scene(camera, frame_index, frame)
        event_id = self.store.record_event(
            timestamp=self.clock.at(frame_index),
            camera_id=camera.camera_id,
            verdict=headline.verdict,
            attributes=headline.attributes,
            summary_text=visual.sentence,
            scene_path=scene_rel,
        )
        self._notify(event_id, camera, frame_index)
        event = self.store.get_event(event_id)
        for callback in self.on_event:
            callback(event)
        return FrameOutcome(
            frame_index=frame_index,
            active=True,
            score=decision.score,
            persons=persons,
            event=event,
        )

    def _assess_person(self, frame: GrayFrame, obs: PersonObservation) -> PersonResult:
        notes: list[str] = []
        if obs.face is None:
            return PersonResult(
                box=obs.box,
                verdict=Verdict.person_no_face(),
                attributes=frozenset(),
                orientation=None,
                needs_frontalization=None,
            )

        orientation: OrientationEstimate | None = None
        frontalize: bool | None = None
        try:
            orientation = estimate_orientation(obs.face.landmarks, tau=self.tau)
            frontalize = needs_frontalization(orientation, self.alpha_band, self.beta_band)
        except DegenerateGeometryError as exc:
            notes.append(f"orientation failed: {exc}")

        verdict = self._identify(frame, obs.face, notes)
        attributes = self._attributes(frame, obs, notes)
        return PersonResult(
            box=obs.box,
            verdict=verdict,
            attributes=attributes,
            orientation=orientation,
            needs_frontalization=frontalize,
            notes=tuple(notes),
        )

    def _identify(self, frame: GrayFrame, face: FaceObservation, notes: list[str]) -> Verdict:
        try:
            result = self.recognizer.predict(_crop(frame, face.box))
        except Exception as exc:
            notes.append(f"recognizer failed: {exc}")
            return Verdict.unknown()
        if result.subject_id is None:
            return Verdict.unknown()
        try:
            name = self.store.get_person(result.subject_id).name
        except NotFoundError:
            notes.append(f"recognized subject {result.subject_id} no longer enrolled")
            return Verdict.unknown()
        return Verdict.known(result.subject_id, name)

    def _attributes(
        self, frame: GrayFrame, obs: PersonObservation, notes: list[str]
    ) -> frozenset[AttributeLabel]:
        patches = None
        if obs.face is not None:
            try:
                patches = crop_patches(
                    frame, obs.face.landmarks, obs.face.box, head_reach=self.head_reach
                )
            except (DegenerateLandmarksError, ValueError) as exc:
                notes.append(f"patch cropping failed: {exc}")
        try:
            labels = classify_attributes(patches, _crop(frame, obs.box), self.classifier)
        except AttributeStageError as exc:
            notes.append(f"attributes unavailable: {exc}")
            return frozenset()
        return frozenset(labels)

    @staticmethod
    def _headline(persons: Sequence[PersonResult]) -> PersonResult:
        for person in persons:
            if person.verdict.kind.value == "Known":
                return person
        for person in persons:
            if person.verdict.kind.value == "Unknown":
                return person
        return persons[0]

    def _save_scene(self, camera: CameraSource, frame_index: int, frame: GrayFrame) -> str:
        rel = f"scenes/{camera.camera_id}-{frame_index}.png"
        path = self.store.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        save_gray(frame, path)
        return rel

    def _notify(self, event_id: int, camera: CameraSource, frame_index: int) -> None:
        if self.notifier is None:
            return
        message = build_notification_message(self.store.get_event(event_id))
        outcomes = self.notifier.notify(
            event_id,
            camera.camera_id,
            message.body,
            message.attachment,
            now=self.clock.seconds(frame_index),
        )
        for outcome in outcomes:
            self.store.record_notification(
                event_id, outcome.channel.value, outcome.destination, outcome.status.value
            )

    # ------------------------------------------------------------ streams

    def run_stream(self, camera: CameraSource, frames: Sequence[GrayFrame] | None = None) -> StreamReport:
        if frames is None:
            if camera.frames_dir is None:
                raise ValueError(f"camera {camera.camera_id!r} has no frame directory")
            frames = load_frame_directory(camera.frames_dir)
        events: list[EventRecord] = []
        timings: list[float] = []
        prev: GrayFrame | None = None
        for index, frame in enumerate(frames):
            started = time.perf_counter()
            outcome = self.process_frame(camera, index, frame, prev)
            timings.append(time.perf_counter() - started)
            if outcome.event is not None:
                events.append(outcome.event)
            prev = frame
        return StreamReport(
            frames_processed=len(frames),
            events=tuple(events),
            frame_seconds=tuple(timings),
        )


def load_frame_directory(directory: str | Path) -> list[GrayFrame]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"frame directory {root} does not exist")
    paths = [p for p in root.iterdir() if p.suffix.lower() in {".png", ".jpg", ".jpeg"}]
    paths.sort(key=lambda p: (0, int(p.stem)) if p.stem.isdigit() else (1, p.stem))
    frames = [load_gray(p) for p in paths]
    for frame in frames[1:]:
        if not frame.same_size(frames[0]):
            raise ValueError("all frames in a directory must share dimensions")
    return frames
