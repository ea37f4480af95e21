"""End-to-end tests for the command-line verbs, driven through main(argv)."""
from __future__ import annotations

import json

import numpy as np
import pytest

from gatehouse.cli import main
from gatehouse.demo import build_demo, striped_texture
from gatehouse.frames import GrayFrame, save_gray


@pytest.fixture()
def data_dir(tmp_path):
    return str(tmp_path / "data")


def run_cli(capsys, *argv: str) -> tuple[int, str, str]:
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def face_png(tmp_path, name: str = "face.png") -> str:
    path = tmp_path / name
    save_gray(GrayFrame(striped_texture(64, 64, 0.15, 0.05)), path)
    return str(path)


def test_profile_add_and_list(tmp_path, data_dir, capsys):
    png = face_png(tmp_path)
    rc, out, _ = run_cli(
        capsys, "--data-dir", data_dir, "profile", "add",
        "--name", "John", "--contact", "555", "--images", png,
    )
    assert rc == 0
    assert out == "added person 1\n"
    rc, out, _ = run_cli(capsys, "--data-dir", data_dir, "profile", "list")
    assert rc == 0
    assert out == "1\tJohn\tFriend\tviews=1\n"


def test_profile_persists_across_invocations(tmp_path, data_dir, capsys):
    png = face_png(tmp_path)
    run_cli(
        capsys, "--data-dir", data_dir, "profile", "add",
        "--name", "John", "--images", png,
    )
    rc, out, _ = run_cli(
        capsys, "--data-dir", data_dir, "profile", "add-views", "1",
        "--images", png, png,
    )
    assert rc == 0
    assert out == "added views [2, 3]\n"
    rc, out, _ = run_cli(capsys, "--data-dir", data_dir, "profile", "delete", "1")
    assert rc == 0
    assert out == "removed person 1 (3 views)\n"
    rc, out, _ = run_cli(capsys, "--data-dir", data_dir, "profile", "list")
    assert out == ""


def test_profile_add_rejects_tiny_image(tmp_path, data_dir, capsys):
    path = tmp_path / "tiny.png"
    save_gray(GrayFrame(np.zeros((16, 16), dtype=np.uint8)), path)
    rc, out, err = run_cli(
        capsys, "--data-dir", data_dir, "profile", "add",
        "--name", "John", "--images", str(path),
    )
    assert rc == 1
    assert out == ""
    assert err.startswith("error:")


def test_profile_duplicate_exits_nonzero(tmp_path, data_dir, capsys):
    png = face_png(tmp_path)
    run_cli(
        capsys, "--data-dir", data_dir, "profile", "add",
        "--name", "John", "--contact", "555", "--images", png,
    )
    rc, _, err = run_cli(
        capsys, "--data-dir", data_dir, "profile", "add",
        "--name", "John", "--contact", "555", "--images", png,
    )
    assert rc == 1
    assert "already exists" in err


def test_profile_add_views_unknown_subject(data_dir, tmp_path, capsys):
    png = face_png(tmp_path)
    rc, _, err = run_cli(
        capsys, "--data-dir", data_dir, "profile", "add-views", "9", "--images", png,
    )
    assert rc == 1
    assert err.startswith("error:")


def test_evaluate_gate_prints_scores(tmp_path, capsys):
    a = GrayFrame(np.zeros((64, 64), dtype=np.uint8))
    flipped = np.zeros((64, 64), dtype=np.uint8)
    flipped[:32, :32] = 255
    frames = [a, GrayFrame(flipped), GrayFrame(flipped.copy()), a]
    lines = []
    for i, (frame, label) in enumerate(zip(frames, [0, 1, 0, 1])):
        path = tmp_path / f"{i}.png"
        save_gray(frame, path)
        lines.append(f"{path}\t{label}")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    # pairs: flip->active/1 (hit), static->inactive/0, flip back->active/1 (hit)
    rc, out, _ = run_cli(capsys, "evaluate-gate", str(manifest))
    assert rc == 0
    assert out == "precision=1.0 recall=1.0\n"


def test_evaluate_gate_fractional_scores(tmp_path, capsys):
    a = GrayFrame(np.zeros((64, 64), dtype=np.uint8))
    flipped = np.zeros((64, 64), dtype=np.uint8)
    flipped[:32, :32] = 255
    frames = [a, GrayFrame(flipped), a]
    labels = [0, 1, 1]  # the flip back to background is mislabeled active
    lines = []
    for i, (frame, label) in enumerate(zip(frames, labels)):
        path = tmp_path / f"{i}.png"
        save_gray(frame, path)
        lines.append(f"{path}\t{label}")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    rc, out, _ = run_cli(capsys, "evaluate-gate", str(manifest))
    assert rc == 0
    assert out == "precision=1.0 recall=1.0\n"


def write_demo_config(tmp_path, layout, data_dir) -> str:
    cfg = {
        "data_dir": data_dir,
        "cameras": [
            {
                "camera_id": "cam1",
                "location": "entrance",
                "frames_dir": str(layout.frames_dir),
            }
        ],
        "detection_fixture": str(layout.fixture_path),
        "attribute_manifest": str(layout.manifest_path),
        "clock_start": "2026-08-22T12:00:00+00:00",
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def test_ingest_demo_stream(tmp_path, data_dir, capsys):
    layout = build_demo(tmp_path / "demo")
    config = write_demo_config(tmp_path, layout, data_dir)
    rc, out, _ = run_cli(
        capsys, "--config", config, "profile", "add",
        "--name", "John", "--images", str(layout.enroll_path),
    )
    assert rc == 0
    rc, out, _ = run_cli(capsys, "--config", config, "ingest", str(layout.frames_dir))
    assert rc == 0
    assert out.splitlines() == [
        "event 1: John at entrance talking over the phone",
        "event 2: An unknown person at entrance",
        "event 3: A person (no face visible) at entrance",
        f"{layout.frame_count} frames, 3 events",
    ]


def test_summary_reads_back_ingested_events(tmp_path, data_dir, capsys):
    layout = build_demo(tmp_path / "demo")
    config = write_demo_config(tmp_path, layout, data_dir)
    run_cli(
        capsys, "--config", config, "profile", "add",
        "--name", "John", "--images", str(layout.enroll_path),
    )
    run_cli(capsys, "--config", config, "ingest", str(layout.frames_dir))
    rc, out, _ = run_cli(
        capsys, "--config", config, "summary", "daily",
        "--anchor", "2026-08-23T00:00:00+00:00",
    )
    assert rc == 0
    payload = json.loads(out)
    assert payload["verdict_counts"] == {"Known": 1, "PersonNoFace": 1, "Unknown": 1}
    assert payload["location_counts"] == {"entrance": 3}


def test_summary_empty_store(data_dir, capsys):
    rc, out, _ = run_cli(capsys, "--data-dir", data_dir, "summary", "weekly")
    assert rc == 0
    payload = json.loads(out)
    assert payload["verdict_counts"] == {"Known": 0, "PersonNoFace": 0, "Unknown": 0}


def test_summary_rejects_naive_anchor(data_dir, capsys):
    rc, _, err = run_cli(
        capsys, "--data-dir", data_dir, "summary", "daily",
        "--anchor", "2026-08-23T00:00:00",
    )
    assert rc == 1
    assert err.startswith("error:")


def test_door_status_locked_payload(data_dir, capsys):
    rc, out, _ = run_cli(capsys, "--data-dir", data_dir, "door", "status")
    assert rc == 0
    assert json.loads(out) == {"mode": "locked"}


def test_door_open_default_operator(data_dir, capsys):
    rc, out, _ = run_cli(capsys, "--data-dir", data_dir, "door", "open")
    assert rc == 0
    payload = json.loads(out)
    assert payload["mode"] == "unlocked"
    assert payload["auto_close_at"] - payload["opened_at"] == pytest.approx(30.0)


def test_door_open_unknown_operator(data_dir, capsys):
    rc, out, err = run_cli(
        capsys, "--data-dir", data_dir, "door", "open", "--operator", "mallory",
    )
    assert rc == 1
    assert out == ""
    assert "allow-list" in err


def test_unknown_command_exits(capsys):
    with pytest.raises(SystemExit):
        main(["frobnicate"])
