"""Synthetic demo assets: a small procedurally generated home-camera scene
with an enrolled resident, an unknown visitor, and a no-face sighting.

Everything is deterministic so demo runs double as regression fixtures."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .frames import GrayFrame, save_gray
from .geometry import FaceBox, LandmarkSet
from .summary import AttributeLabel, patch_fingerprint


def synthetic_face_landmarks(box: FaceBox) -> LandmarkSet:
    """A plausible 68-point layout filling the given face box; every derived
    patch rectangle (eye, head, beard, mustache) is non-empty."""
    pts = np.zeros((68, 2), dtype=np.float64)

    def put(i: int, fx: float, fy: float) -> None:
        pts[i] = (box.x + fx * box.width, box.y + fy * box.height)

    for t in range(17):  # jaw arc, ears to chin and back
        put(t, 0.08 + 0.84 * t / 16.0, 0.55 + 0.40 * float(np.sin(np.pi * t / 16.0)))
    for i, fx in enumerate(np.linspace(0.15, 0.45, 5)):  # left brow
        put(17 + i, float(fx), 0.30)
    for i, fx in enumerate(np.linspace(0.55, 0.85, 5)):  # right brow
        put(22 + i, float(fx), 0.30)
    for i, fy in enumerate((0.35, 0.42, 0.48, 0.54)):  # nose bridge
        put(27 + i, 0.50, fy)
    for i, fx in enumerate(np.linspace(0.42, 0.58, 5)):  # nostril row
        put(31 + i, float(fx), 0.58)
    put(33, 0.50, 0.62)  # nose tip below the bridge
    for i in range(6):  # left eye ring
        angle = 2.0 * np.pi * i / 6.0
        put(36 + i, 0.30 + 0.05 * float(np.cos(angle)), 0.40 + 0.03 * float(np.sin(angle)))
    for i in range(6):  # right eye ring
        angle = 2.0 * np.pi * i / 6.0
        put(42 + i, 0.70 + 0.05 * float(np.cos(angle)), 0.40 + 0.03 * float(np.sin(angle)))
    for i in range(12):  # outer lips
        angle = 2.0 * np.pi * i / 12.0
        put(48 + i, 0.50 + 0.15 * float(np.cos(angle)), 0.78 + 0.05 * float(np.sin(angle)))
    for i in range(8):  # inner lips
        angle = 2.0 * np.pi * i / 8.0
        put(60 + i, 0.50 + 0.08 * float(np.cos(angle)), 0.78 + 0.02 * float(np.sin(angle)))
    return LandmarkSet(pts)


def striped_texture(height: int, width: int, fx: float, fy: float) -> np.ndarray:
    """Sinusoidal grating; orientation and frequency make subjects separable."""
    ys, xs = np.mgrid[0:height, 0:width]
    wave = np.sin(2.0 * np.pi * (fx * xs + fy * ys))
    return np.clip(np.floor(127.5 + 100.0 * wave), 0, 255).astype(np.uint8)


def gradient_texture(height: int, width: int) -> np.ndarray:
    ramp = np.linspace(30.0, 220.0, height)
    return np.repeat(ramp[:, None], width, axis=1).astype(np.uint8)


@dataclass(frozen=True)
class DemoLayout:
    frames_dir: Path
    fixture_path: Path
    manifest_path: Path
    enroll_path: Path
    frame_count: int
    person_box: FaceBox
    face_box: FaceBox
    expected_summaries: tuple[str, ...]


def _paste(frame: np.ndarray, box: FaceBox, tile: np.ndarray) -> None:
    frame[box.y : box.y + box.height, box.x : box.x + box.width] = tile


def _face_entry(box: FaceBox, landmarks: LandmarkSet) -> dict:
    return {
        "box": [box.x, box.y, box.width, box.height],
        "landmarks": [[float(x), float(y)] for x, y in landmarks.points],
    }


def build_demo(root: str | Path, width: int = 320, height: int = 240) -> DemoLayout:
    """Author the eight-frame entrance scene.

    Frames: 0-1 static background, 2 the enrolled resident (with a phone in
    the stub manifest), 3 background, 4 an unknown visitor, 5 background,
    6 a person with no visible face, 7 background. One event per visit."""
    root = Path(root)
    frames_dir = root / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)

    background = np.full((height, width), 40, dtype=np.uint8)
    background[height // 2 :, :] = 60  # porch floor line

    person_box = FaceBox(120, 40, 80, 180)
    face_box = FaceBox(136, 60, 48, 48)
    landmarks = synthetic_face_landmarks(face_box)

    john_face = striped_texture(face_box.height, face_box.width, 0.18, 0.02)
    visitor_face = gradient_texture(face_box.height, face_box.width)
    body = striped_texture(person_box.height, person_box.width, 0.03, 0.11)

    def with_person(face_tile: np.ndarray | None) -> np.ndarray:
        frame = background.copy()
        _paste(frame, person_box, body)
        if face_tile is not None:
            _paste(frame, face_box, face_tile)
        return frame

    frames = [
        background.copy(),
        background.copy(),
        with_person(john_face),
        background.copy(),
        with_person(visitor_face),
        background.copy(),
        with_person(None),
        background.copy(),
    ]
    for i, pixels in enumerate(frames):
        save_gray(GrayFrame(pixels), frames_dir / f"{i:03d}.png")

    fixture = {
        "2": [
            {
                "person_box": [person_box.x, person_box.y, person_box.width, person_box.height],
                "face": _face_entry(face_box, landmarks),
            }
        ],
        "4": [
            {
                "person_box": [person_box.x, person_box.y, person_box.width, person_box.height],
                "face": _face_entry(face_box, landmarks),
            }
        ],
        "6": [
            {
                "person_box": [person_box.x, person_box.y, person_box.width, person_box.height],
                "face": None,
            }
        ],
    }
    fixture_path = root / "fixture.json"
    fixture_path.write_text(json.dumps(fixture, indent=2), encoding="utf-8")

    # the resident holds a phone: label the frame-2 person crop via the stub
    john_crop = GrayFrame(frames[2][
        person_box.y : person_box.y + person_box.height,
        person_box.x : person_box.x + person_box.width,
    ])
    manifest_path = root / "attribute_manifest.tsv"
    manifest_path.write_text(
        f"{patch_fingerprint(john_crop)}\t{AttributeLabel.CELLPHONE.value}\n",
        encoding="utf-8",
    )

    enroll_path = root / "enroll_john.png"
    save_gray(GrayFrame(john_face), enroll_path)

    return DemoLayout(
        frames_dir=frames_dir,
        fixture_path=fixture_path,
        manifest_path=manifest_path,
        enroll_path=enroll_path,
        frame_count=len(frames),
        person_box=person_box,
        face_box=face_box,
        expected_summaries=(
            "John at entrance talking over the phone",
            "An unknown person at entrance",
            "A person (no face visible) at entrance",
        ),
    )
