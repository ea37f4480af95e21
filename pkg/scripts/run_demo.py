"""Run the whole pipeline once over the synthetic demo home.

Builds the demo assets, enrolls the known visitor, processes the frame
stream, and prints the resulting events, notification outcomes, and outbox
files.  Everything lands under the chosen work directory.
"""
import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gatehouse.demo import build_demo
from gatehouse.frames import load_gray
from gatehouse.geometry import FaceBox
from gatehouse.lbp import LbpFaceRecognizer
from gatehouse.notifications import Channel, Notifier, Recipient, outbox_transports
from gatehouse.pipeline import CameraSource, FixtureDetector, FrameClock, Pipeline
from gatehouse.store import EnrollmentImage, ProfileStore
from gatehouse.summary import ManifestStubClassifier


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="demo_run", help="directory for assets and state")
    args = parser.parse_args()

    work = Path(args.workdir)
    layout = build_demo(work / "assets")
    store = ProfileStore(work / "store", locations={"cam1": "entrance"})
    face = load_gray(layout.enroll_path)
    store.add_person(
        "John",
        contact="555-0100",
        initial_images=[EnrollmentImage(face, FaceBox(0, 0, face.width, face.height))],
    )
    notifier = Notifier(
        outbox_transports(work / "outbox"),
        [Recipient("owner", {Channel.MMS: "555-0100", Channel.EMAIL: "owner@example.com"})],
    )
    pipeline = Pipeline(
        store=store,
        detector=FixtureDetector.from_file(layout.fixture_path),
        recognizer=LbpFaceRecognizer(),
        classifier=ManifestStubClassifier.from_file(layout.manifest_path),
        notifier=notifier,
        clock=FrameClock(datetime.now(timezone.utc)),
    )
    pipeline.retrain()

    camera = CameraSource("cam1", "entrance", frames_dir=str(layout.frames_dir))
    report = pipeline.run_stream(camera)
    print(f"processed {report.frames_processed} frames in {sum(report.frame_seconds):.3f}s")
    for event in report.events:
        print(f"event {event.event_id} [{event.timestamp.isoformat()}] {event.summary_text}")
        for outcome in event.notifications:
            print(f"  {outcome.channel}-> {outcome.destination}: {outcome.status}")
    outbox = sorted((work / "outbox").rglob("*.txt"))
    print(f"outbox files: {[str(p.relative_to(work)) for p in outbox]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
