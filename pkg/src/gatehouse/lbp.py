"""Local-binary-pattern face recognizer: code maps, grid histograms,
chi-square nearest neighbor, and a distance cutoff for the Unknown verdict."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence

import numpy as np

from .frames import GrayFrame, resize_bilinear

MODEL_MAGIC = "LBPMODEL 1"

# neighbor offsets in bit order: TL, T, TR, R, BR, B, BL, L with weights 2^0..2^7
_NEIGHBOR_OFFSETS = (
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
)


@dataclass(frozen=True)
class LbpConfig:
    radius: int = 1
    neighbors: int = 8
    grid_x: int = 8
    grid_y: int = 8
    normalize_cells: bool = True
    unknown_threshold: float | None = None  # None: derived from intra-subject spread
    fallback_threshold: float = 20.0
    canonical_size: int = 96

    def __post_init__(self) -> None:
        if self.radius != 1 or self.neighbors != 8:
            raise ValueError("only radius-1 8-neighbor codes are supported")
        if self.grid_x < 1 or self.grid_y < 1:
            raise ValueError("grid dimensions must be positive")
        if self.unknown_threshold is not None and self.unknown_threshold <= 0:
            raise ValueError("unknown_threshold must be positive")
        if self.fallback_threshold <= 0:
            raise ValueError("fallback_threshold must be positive")
        if self.canonical_size - 2 < max(self.grid_x, self.grid_y):
            raise ValueError("canonical_size too small for the cell grid")


@dataclass(frozen=True)
class FaceTemplate:
    subject_id: Any
    view_id: int
    features: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FaceTemplate):
            return NotImplemented
        return (
            self.subject_id == other.subject_id
            and self.view_id == other.view_id
            and np.array_equal(self.features, other.features)
        )


@dataclass(frozen=True)
class RecognitionResult:
    subject_id: Any  # None when no enrolled face is close enough
    best_distance: float
    runner_up_distance: float | None = None

    @property
    def known(self) -> bool:
        return self.subject_id is not None


@dataclass
class LbpModel:
    cfg: LbpConfig
    templates: list[FaceTemplate]
    unknown_threshold: float


class FaceRecognizer(Protocol):
    """Interchange contract for recognizer backends."""

    def train(self, enrollment: Mapping[Any, Sequence[GrayFrame]]) -> None: ...

    def predict(self, face: GrayFrame) -> RecognitionResult: ...


def lbp_code(neighborhood: np.ndarray) -> int:
    """Code for one 3x3 patch: bit p set iff that neighbor >= the center."""
    patch = np.asarray(neighborhood)
    if patch.shape != (3, 3):
        raise ValueError("neighborhood must be 3x3")
    center = int(patch[1, 1])
    code = 0
    for bit, (dy, dx) in enumerate(_NEIGHBOR_OFFSETS):
        if int(patch[1 + dy, 1 + dx]) >= center:
            code |= 1 << bit
    return code


def lbp_image(face: GrayFrame) -> np.ndarray:
    """Code map over every interior pixel; output is (height-2, width-2)."""
    if face.width < 3 or face.height < 3:
        raise ValueError("face image must be at least 3x3")
    px = face.pixels
    center = px[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for bit, (dy, dx) in enumerate(_NEIGHBOR_OFFSETS):
        neighbor = px[1 + dy : px.shape[0] - 1 + dy, 1 + dx : px.shape[1] - 1 + dx]
        codes |= (neighbor >= center).astype(np.uint8) << bit
    return codes


def grid_histogram(codes: np.ndarray, cfg: LbpConfig) -> np.ndarray:
    """Concatenated per-cell 256-bin histograms, cells walked row-major;
    remainder pixels join the last row/column of cells."""
    h, w = codes.shape
    if cfg.grid_x > w or cfg.grid_y > h:
        raise ValueError("cell grid exceeds the code map")
    cell_h = h // cfg.grid_y
    cell_w = w // cfg.grid_x
    out = np.zeros(cfg.grid_x * cfg.grid_y * 256, dtype=np.float64)
    for gy in range(cfg.grid_y):
        top = gy * cell_h
        bottom = (gy + 1) * cell_h if gy < cfg.grid_y - 1 else h
        for gx in range(cfg.grid_x):
            left = gx * cell_w
            right = (gx + 1) * cell_w if gx < cfg.grid_x - 1 else w
            cell = codes[top:bottom, left:right]
            hist = np.bincount(cell.ravel(), minlength=256).astype(np.float64)
            if cfg.normalize_cells:
                total = hist.sum()
                if total > 0:
                    hist /= total
            start = (gy * cfg.grid_x + gx) * 256
            out[start : start + 256] = hist
    return out


def chi_square(h1: np.ndarray, h2: np.ndarray) -> float:
    a = np.asarray(h1, dtype=np.float64)
    b = np.asarray(h2, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("histograms must have equal length")
    s = a + b
    mask = s > 0
    d = a - b
    return float(((d[mask] ** 2) / s[mask]).sum())


def extract_features(face: GrayFrame, cfg: LbpConfig) -> np.ndarray:
    canonical = resize_bilinear(face, cfg.canonical_size, cfg.canonical_size)
    return grid_histogram(lbp_image(canonical), cfg)


def train(
    enrollment: Mapping[Any, Sequence[GrayFrame]], cfg: LbpConfig | None = None
) -> LbpModel:
    cfg = cfg or LbpConfig()
    total = sum(len(views) for views in enrollment.values())
    if total == 0:
        raise ValueError("enrollment must contain at least one face image")
    templates: list[FaceTemplate] = []
    for subject_id in enrollment:
        for view_id, face in enumerate(enrollment[subject_id]):
            if face.width < 3 or face.height < 3:
                raise ValueError(
                    f"enrollment image too small for subject {subject_id!r} view {view_id}"
                )
            templates.append(
                FaceTemplate(
                    subject_id=subject_id,
                    view_id=view_id,
                    features=extract_features(face, cfg),
                )
            )
    threshold = cfg.unknown_threshold
    if threshold is None:
        threshold = _derived_threshold(templates, cfg.fallback_threshold)
    return LbpModel(cfg=cfg, templates=templates, unknown_threshold=threshold)


def _derived_threshold(templates: Sequence[FaceTemplate], fallback: float) -> float:
    worst = 0.0
    by_subject: dict[Any, list[FaceTemplate]] = {}
    for t in templates:
        by_subject.setdefault(t.subject_id, []).append(t)
    seen_pair = False
    for group in by_subject.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                seen_pair = True
                worst = max(worst, chi_square(group[i].features, group[j].features))
    if not seen_pair or worst == 0.0:
        return fallback
    return 1.5 * worst


def predict(face: GrayFrame, model: LbpModel) -> RecognitionResult:
    if not model.templates:
        raise ValueError("model has no templates")
    query = extract_features(face, model.cfg)
    stacked = np.stack([t.features for t in model.templates])
    s = stacked + query
    d = stacked - query
    dists = np.where(s > 0, (d * d) / np.where(s > 0, s, 1.0), 0.0).sum(axis=1)
    order = sorted(
        range(len(model.templates)),
        key=lambda i: (dists[i], model.templates[i].subject_id, model.templates[i].view_id),
    )
    best_i = order[0]
    best = model.templates[best_i]
    best_distance = float(dists[best_i])
    runner_up: float | None = None
    for i in order[1:]:
        if model.templates[i].subject_id != best.subject_id:
            runner_up = float(dists[i])
            break
    if best_distance <= model.unknown_threshold:
        return RecognitionResult(best.subject_id, best_distance, runner_up)
    return RecognitionResult(None, best_distance, runner_up)


def save_model(model: LbpModel, path: str | Path) -> None:
    """Write magic line, one sorted-keys JSON header line, then all feature
    vectors as little-endian float64; byte-stable for identical models."""
    header = {
        "cfg": {
            "radius": model.cfg.radius,
            "neighbors": model.cfg.neighbors,
            "grid_x": model.cfg.grid_x,
            "grid_y": model.cfg.grid_y,
            "normalize_cells": model.cfg.normalize_cells,
            "unknown_threshold": model.cfg.unknown_threshold,
            "fallback_threshold": model.cfg.fallback_threshold,
            "canonical_size": model.cfg.canonical_size,
        },
        "unknown_threshold": model.unknown_threshold,
        "templates": [
            {"subject_id": t.subject_id, "view_id": t.view_id, "length": len(t.features)}
            for t in model.templates
        ],
    }
    blob = b"".join(t.features.astype("<f8").tobytes() for t in model.templates)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "wb") as fh:
        fh.write(MODEL_MAGIC.encode("ascii") + b"\n")
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(blob)


def load_model(path: str | Path) -> LbpModel:
    with open(path, "rb") as fh:
        magic = fh.readline().rstrip(b"\n").decode("ascii", errors="replace")
        if magic != MODEL_MAGIC:
            raise ValueError(f"not a recognizer model file: bad magic {magic!r}")
        header = json.loads(fh.readline().decode("utf-8"))
        cfg = LbpConfig(**header["cfg"])
        templates: list[FaceTemplate] = []
        for meta in header["templates"]:
            raw = fh.read(meta["length"] * 8)
            if len(raw) != meta["length"] * 8:
                raise ValueError("model file truncated")
            features = np.frombuffer(raw, dtype="<f8").copy()
            templates.append(
                FaceTemplate(
                    subject_id=meta["subject_id"],
                    view_id=meta["view_id"],
                    features=features,
                )
            )
    return LbpModel(cfg=cfg, templates=templates, unknown_threshold=header["unknown_threshold"])


@dataclass
class LbpFaceRecognizer:
    """Stateful FaceRecognizer backend around the pure train/predict core."""

    cfg: LbpConfig = field(default_factory=LbpConfig)
    model: LbpModel | None = None

    def train(self, enrollment: Mapping[Any, Sequence[GrayFrame]]) -> None:
        if not enrollment or all(len(v) == 0 for v in enrollment.values()):
            self.model = None
            return
        self.model = train(enrollment, self.cfg)

    def predict(self, face: GrayFrame) -> RecognitionResult:
        if self.model is None or not self.model.templates:
            return RecognitionResult(None, float("inf"), None)
        return predict(face, self.model)

    def forget(self, subject_id: Any) -> None:
        if self.model is None:
            return
        remaining = [t for t in self.model.templates if t.subject_id != subject_id]
        if not remaining:
            self.model = None
        else:
            self.model = replace(self.model, templates=remaining)
