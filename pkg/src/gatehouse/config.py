"""Application configuration (JSON file) and runtime assembly."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .change_gate import GateConfig, PixelMode
from .door import DoorController, HttpRelayActuator, MockActuator
from .lbp import LbpConfig, LbpFaceRecognizer
from .notifications import Channel, Notifier, Recipient, outbox_transports
from .pipeline import CameraSource, FixtureDetector, FrameClock, Pipeline
from .store import ProfileStore
from .summary import ManifestStubClassifier


@dataclass(frozen=True)
class AppConfig:
    data_dir: str = "data"
    cameras: tuple[CameraSource, ...] = (CameraSource("cam1", "entrance"),)
    gate: GateConfig = field(default_factory=GateConfig)
    tau: float = 5.0
    alpha_band: float = 15.0
    beta_band: float = 10.0
    head_reach: int = 180
    unknown_threshold: float | None = None
    door_hold_seconds: float = 30.0
    notification_window_seconds: float = 60.0
    recipients: tuple[Recipient, ...] = ()
    operators: tuple[str, ...] = ("admin",)
    detection_fixture: str | None = None
    attribute_manifest: str | None = None
    clock_start: datetime | None = None
    frame_interval: float = 1.0
    relay_url: str | None = None

    def __post_init__(self):
        ids = [c.camera_id for c in self.cameras]
        if len(ids) != len(set(ids)):
            raise ValueError("camera ids must be unique")
        if not self.cameras:
            raise ValueError("at least one camera must be configured")

    @property
    def locations(self) -> dict[str, str]:
        return {c.camera_id: c.location for c in self.cameras}

    def camera(self, camera_id: str | None = None) -> CameraSource:
        if camera_id is None:
            return self.cameras[0]
        for cam in self.cameras:
            if cam.camera_id == camera_id:
                return cam
        raise KeyError(f"no camera {camera_id!r} configured")


def config_from_dict(data: dict) -> AppConfig:
    cfg = AppConfig()
    kwargs: dict = {}
    if "cameras" in data:
        kwargs["cameras"] = tuple(
            CameraSource(
                camera_id=c["camera_id"],
                location=c["location"],
                frames_dir=c.get("frames_dir"),
            )
            for c in data["cameras"]
        )
    if "gate" in data:
        g = dict(data["gate"])
        if "pixel_mode" in g:
            g["pixel_mode"] = PixelMode(g["pixel_mode"])
        kwargs["gate"] = GateConfig(**g)
    if "recipients" in data:
        kwargs["recipients"] = tuple(
            Recipient(
                user_id=r["user_id"],
                destinations={Channel(k): v for k, v in r["destinations"].items()},
            )
            for r in data["recipients"]
        )
    if "clock_start" in data and data["clock_start"] is not None:
        kwargs["clock_start"] = datetime.fromisoformat(data["clock_start"])
    if "operators" in data:
        kwargs["operators"] = tuple(data["operators"])
    for key in (
        "data_dir",
        "tau",
        "alpha_band",
        "beta_band",
        "head_reach",
        "unknown_threshold",
        "door_hold_seconds",
        "notification_window_seconds",
        "detection_fixture",
        "attribute_manifest",
        "frame_interval",
        "relay_url",
    ):
        if key in data:
            kwargs[key] = data[key]
    unknown = set(data) - set(kwargs) - {"cameras", "gate", "recipients", "clock_start", "operators"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return replace(cfg, **kwargs)


def config_from_file(path: str | Path) -> AppConfig:
    return config_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class Runtime:
    config: AppConfig
    store: ProfileStore
    pipeline: Pipeline
    door: DoorController
    notifier: Notifier
    door_clock: Callable[[], float]


def build_runtime(
    config: AppConfig, door_clock: Callable[[], float] | None = None
) -> Runtime:
    import time

    data_dir = Path(config.data_dir)
    store = ProfileStore(data_dir / "store", locations=config.locations)

    lbp_cfg = LbpConfig(unknown_threshold=config.unknown_threshold)
    recognizer = LbpFaceRecognizer(cfg=lbp_cfg)

    classifier = (
        ManifestStubClassifier.from_file(config.attribute_manifest)
        if config.attribute_manifest
        else ManifestStubClassifier()
    )
    detector = (
        FixtureDetector.from_file(config.detection_fixture)
        if config.detection_fixture
        else FixtureDetector({})
    )
    notifier = Notifier(
        outbox_transports(data_dir / "outbox"),
        config.recipients,
        window_seconds=config.notification_window_seconds,
    )
    clock = FrameClock(
        config.clock_start or datetime.now(timezone.utc),
        frame_interval=config.frame_interval,
    )
    pipeline = Pipeline(
        store=store,
        detector=detector,
        recognizer=recognizer,
        classifier=classifier,
        notifier=notifier,
        clock=clock,
        gate_config=config.gate,
        tau=config.tau,
        alpha_band=config.alpha_band,
        beta_band=config.beta_band,
        head_reach=config.head_reach,
    )
    pipeline.retrain()

    actuator = (
        HttpRelayActuator(config.relay_url) if config.relay_url else MockActuator()
    )
    door = DoorController(actuator, hold_seconds=config.door_hold_seconds)
    return Runtime(
        config=config,
        store=store,
        pipeline=pipeline,
        door=door,
        notifier=notifier,
        # Unlock instants cross the API to clients that compare them against
        # their own wall clocks, so the default must be epoch time.
        door_clock=door_clock or time.time,
    )
