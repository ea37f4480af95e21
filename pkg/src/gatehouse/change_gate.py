"""Two-level change gate: per-pixel binarization of consecutive-frame
differences, then a global activity score that decides whether a frame is
worth full processing."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .frames import GrayFrame, load_gray

CONSERVATIVE_GLOBAL_THRESHOLD = 32 * 32 * 255  # 261120, one 32x32 block fully flipped


class PixelMode(str, Enum):
    BINARY = "binary"
    ADAPTIVE_GAUSSIAN = "adaptive_gaussian"


@dataclass(frozen=True)
class GateConfig:
    gamma: float = 1.0
    pixel_mode: PixelMode = PixelMode.BINARY
    pixel_threshold: int = 25
    adaptive_window: int = 11
    adaptive_offset: int = 5
    global_threshold: int = 100000
    conservative: bool = False

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0 <= self.pixel_threshold <= 255:
            raise ValueError("pixel_threshold must lie in [0, 255]")
        if self.adaptive_window < 3 or self.adaptive_window % 2 == 0:
            raise ValueError("adaptive_window must be odd and >= 3")
        if self.global_threshold < 0:
            raise ValueError("global_threshold must be non-negative")

    @property
    def effective_global_threshold(self) -> int:
        return CONSERVATIVE_GLOBAL_THRESHOLD if self.conservative else self.global_threshold


@dataclass(frozen=True)
class ChangeDecision:
    score: int
    active: bool
    binary_mask: GrayFrame


def gamma_correct(frame: GrayFrame, gamma: float) -> GrayFrame:
    """Power-law intensity remap via a 256-entry lookup table, rounding
    half-up."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    lut = np.empty(256, dtype=np.uint8)
    for v in range(256):
        mapped = math.floor(255.0 * (v / 255.0) ** gamma + 0.5)
        lut[v] = min(255, max(0, mapped))
    return GrayFrame(lut[frame.pixels])


def frame_diff(a: GrayFrame, b: GrayFrame) -> GrayFrame:
    if not a.same_size(b):
        raise ValueError(f"frame sizes differ: {a.pixels.shape} vs {b.pixels.shape}")
    wide = np.abs(a.pixels.astype(np.int16) - b.pixels.astype(np.int16))
    return GrayFrame(wide.astype(np.uint8))


def binarize(diff: GrayFrame, t: int) -> GrayFrame:
    if not 0 <= t <= 255:
        raise ValueError("threshold must lie in [0, 255]")
    return GrayFrame(np.where(diff.pixels > t, 255, 0).astype(np.uint8))


def _gaussian_kernel_1d(window: int) -> np.ndarray:
    # sigma follows the usual size-derived convention for small windows
    sigma = 0.3 * ((window - 1) * 0.5 - 1.0) + 0.8
    half = (window - 1) // 2
    xs = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(xs**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def adaptive_binarize(diff: GrayFrame, window: int, offset: int) -> GrayFrame:
    """Set a pixel when it exceeds the Gaussian-weighted mean of its
    neighborhood minus ``offset``; edges use mirror padding."""
    if window % 2 == 0 or window < 3:
        raise ValueError("window must be odd and >= 3")
    if window > min(diff.width, diff.height):
        raise ValueError("window exceeds the frame's smaller dimension")
    k1 = _gaussian_kernel_1d(window)
    kernel = np.outer(k1, k1)
    mean = ndimage.correlate(diff.pixels.astype(np.float64), kernel, mode="mirror")
    mask = diff.pixels.astype(np.float64) > (mean - float(offset))
    return GrayFrame(np.where(mask, 255, 0).astype(np.uint8))


def detect_change(prev: GrayFrame, curr: GrayFrame, cfg: GateConfig) -> ChangeDecision:
    if not prev.same_size(curr):
        raise ValueError(f"frame sizes differ: {prev.pixels.shape} vs {curr.pixels.shape}")
    a = gamma_correct(prev, cfg.gamma)
    b = gamma_correct(curr, cfg.gamma)
    diff = frame_diff(a, b)
    if cfg.pixel_mode is PixelMode.BINARY:
        mask = binarize(diff, cfg.pixel_threshold)
    else:
        mask = adaptive_binarize(diff, cfg.adaptive_window, cfg.adaptive_offset)
    score = int(mask.pixels.astype(np.uint64).sum())
    return ChangeDecision(
        score=score,
        active=score >= cfg.effective_global_threshold,
        binary_mask=mask,
    )


def evaluate_gate(
    stream: Sequence[tuple[GrayFrame, bool]], cfg: GateConfig
) -> tuple[float, float]:
    """Score consecutive-pair decisions against each second frame's label;
    empty denominators count as perfect."""
    if len(stream) < 2:
        raise ValueError("stream must contain at least two labeled frames")
    tp = fp = fn = 0
    for (prev, _), (curr, label) in zip(stream, stream[1:]):
        decision = detect_change(prev, curr, cfg)
        if decision.active and label:
            tp += 1
        elif decision.active and not label:
            fp += 1
        elif not decision.active and label:
            fn += 1
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return precision, recall


def gate_decisions(
    stream: Iterable[tuple[GrayFrame, bool]], cfg: GateConfig
) -> list[tuple[int, int, bool, bool]]:
    """Per-pair rows (index, score, active, label) for the evaluation CSV;
    index counts second frames starting at 1."""
    rows: list[tuple[int, int, bool, bool]] = []
    prev: GrayFrame | None = None
    for i, (frame, label) in enumerate(stream):
        if prev is not None:
            decision = detect_change(prev, frame, cfg)
            rows.append((i, decision.score, decision.active, label))
        prev = frame
    return rows


def read_stream_manifest(path: str | Path) -> list[tuple[GrayFrame, bool]]:
    """Load `frame_path<TAB>label` records; relative frame paths resolve
    against the manifest's directory."""
    manifest = Path(path)
    base = manifest.parent
    stream: list[tuple[GrayFrame, bool]] = []
    for lineno, raw in enumerate(manifest.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in ("0", "1"):
            raise ValueError(f"{manifest}:{lineno}: expected 'frame_path<TAB>0|1'")
        frame_path = Path(parts[0])
        if not frame_path.is_absolute():
            frame_path = base / frame_path
        stream.append((load_gray(frame_path), parts[1] == "1"))
    return stream
