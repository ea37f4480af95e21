"""Landmark-driven face geometry: head-tilt estimation, frontalization
gating, attribute patch cropping, and enrollment capture guidance."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .frames import GrayFrame

JAW_LEFT = 0
JAW_RIGHT = 16
NOSE_TIP = 33
LEFT_EYE = range(36, 42)
RIGHT_EYE = range(42, 48)


class DegenerateGeometryError(ValueError):
    pass


class DegenerateLandmarksError(ValueError):
    pass


@dataclass(frozen=True)
class FaceBox:
    x: int
    y: int
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("face box must have positive width and height")

    @property
    def area(self) -> int:
        return self.width * self.height


class LandmarkSet:
    """Exactly 68 (x, y) points in the standard facial layout: 0-16 jaw,
    17-26 brows, 27-35 nose, 36-41 left eye, 42-47 right eye, 48-67 mouth."""

    def __init__(self, points) -> None:
        arr = np.asarray(points, dtype=np.float64)
        if arr.shape != (68, 2):
            raise ValueError(f"expected 68 (x, y) points, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("landmark coordinates must be finite")
        arr.flags.writeable = False
        self.points = arr

    def __getitem__(self, index: int) -> tuple[float, float]:
        x, y = self.points[index]
        return float(x), float(y)

    def centroid(self, indices) -> tuple[float, float]:
        sub = self.points[list(indices)]
        return float(sub[:, 0].mean()), float(sub[:, 1].mean())

    def check_inside(self, width: int, height: int) -> None:
        xs, ys = self.points[:, 0], self.points[:, 1]
        if xs.min() < 0 or ys.min() < 0 or xs.max() >= width or ys.max() >= height:
            raise ValueError("landmarks fall outside the image bounds")


class Tilt(str, Enum):
    UP = "Up"
    DOWN = "Down"
    NEUTRAL = "Neutral"


@dataclass(frozen=True)
class OrientationEstimate:
    alpha_deg: float
    beta_deg: float
    tilt: Tilt


FRONTAL_ALPHA_DEG = 120.0


def line_angle(m1: float, m2: float) -> float:
    """Absolute acute angle between two lines given by slope, degrees;
    perpendicular slopes map to 90."""
    if not (math.isfinite(m1) and math.isfinite(m2)):
        raise ValueError("slopes must be finite")
    denom = 1.0 + m1 * m2
    if denom == 0.0:
        return 90.0
    return abs(math.degrees(math.atan((m1 - m2) / denom)))


def estimate_orientation(l: LandmarkSet, tau: float = 5.0) -> OrientationEstimate:
    """Apex angle at the nose tip of the jaw-corner triangle plus the
    inter-eye inclination; tau is the full width of the Neutral tilt band."""
    a = np.array(l[JAW_LEFT])
    c = np.array(l[NOSE_TIP])
    b = np.array(l[JAW_RIGHT])
    u = a - c
    v = b - c
    cross = u[0] * v[1] - u[1] * v[0]
    dot = float(u @ v)
    if cross == 0.0:
        raise DegenerateGeometryError("jaw corners and nose tip are collinear")
    alpha = math.degrees(math.atan2(abs(cross), dot))

    lx, ly = l.centroid(LEFT_EYE)
    rx, ry = l.centroid(RIGHT_EYE)
    if (lx, ly) == (rx, ry):
        raise DegenerateGeometryError("eye centroids coincide")
    beta = math.degrees(math.atan2(ry - ly, rx - lx))
    if beta > 90.0:
        beta -= 180.0
    elif beta <= -90.0:
        beta += 180.0

    half_band = tau / 2.0
    if alpha > FRONTAL_ALPHA_DEG + half_band:
        tilt = Tilt.UP
    elif alpha < FRONTAL_ALPHA_DEG - half_band:
        tilt = Tilt.DOWN
    else:
        tilt = Tilt.NEUTRAL
    return OrientationEstimate(alpha_deg=alpha, beta_deg=beta, tilt=tilt)


def needs_frontalization(
    est: OrientationEstimate, alpha_band: float = 15.0, beta_band: float = 10.0
) -> bool:
    if alpha_band <= 0 or beta_band <= 0:
        raise ValueError("bands must be positive")
    return abs(est.alpha_deg - FRONTAL_ALPHA_DEG) > alpha_band or abs(est.beta_deg) > beta_band


@dataclass(frozen=True)
class Rect:
    """Half-open pixel rectangle: rows [top, bottom), cols [left, right)."""

    left: int
    top: int
    right: int
    bottom: int

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.bottom - self.top


@dataclass(frozen=True)
class Patch:
    rect: Rect
    pixels: GrayFrame


@dataclass(frozen=True)
class PatchSet:
    eye: Patch
    head: Patch
    beard: Patch
    mustache: Patch

    def named(self) -> dict[str, Patch]:
        return {
            "eye": self.eye,
            "head": self.head,
            "beard": self.beard,
            "mustache": self.mustache,
        }


def _px(value: float) -> int:
    return int(math.floor(value + 0.5))


def crop_patches(
    image: GrayFrame, l: LandmarkSet, box: FaceBox, head_reach: int = 180
) -> PatchSet:
    """Cut the eye, head, beard, and mustache regions; the head patch top is
    clamped at the frame edge when the box sits fewer than head_reach rows
    down."""
    if box.x < 0 or box.y < 0 or box.x + box.width > image.width or box.y + box.height > image.height:
        raise ValueError("face box falls outside the image bounds")
    l.check_inside(image.width, image.height)

    rects = {
        "eye": Rect(
            left=_px(l[0][0]), top=_px(l[19][1]), right=_px(l[16][0]), bottom=_px(l[29][1])
        ),
        "head": Rect(
            left=box.x, top=max(0, box.y - head_reach), right=_px(l[16][0]), bottom=_px(l[24][1])
        ),
        "beard": Rect(
            left=_px(l[4][0]), top=_px(l[4][1]), right=_px(l[12][0]), bottom=_px(l[8][1])
        ),
        "mustache": Rect(
            left=_px(l[4][0]), top=_px(l[30][1]), right=_px(l[12][0]), bottom=_px(l[4][1])
        ),
    }
    patches: dict[str, Patch] = {}
    for name, r in rects.items():
        if r.width <= 0 or r.height <= 0:
            raise DegenerateLandmarksError(f"{name} patch rectangle is empty or inverted")
        patches[name] = Patch(rect=r, pixels=GrayFrame(image.pixels[r.top : r.bottom, r.left : r.right]))
    return PatchSet(**patches)


class SizeBand(str, Enum):
    REJECT = "Reject"
    SMALL = "Small"
    MEDIUM = "Medium"
    LARGE = "Large"


def patch_size_band(rect: Rect) -> SizeBand:
    if rect.width <= 0 or rect.height <= 0:
        raise ValueError("rectangle must have positive area")
    m = min(rect.width, rect.height)
    if m < 20:
        return SizeBand.REJECT
    if m < 32:
        return SizeBand.SMALL
    if m < 64:
        return SizeBand.MEDIUM
    return SizeBand.LARGE


class CaptureGuidance(str, Enum):
    TOO_SMALL_COME_CLOSER = "Face is small. come closer"
    TOP_LEFT = "Face in top left"
    TOP_RIGHT = "Face in top right"
    BOTTOM_LEFT = "Face in bottom left"
    BOTTOM_RIGHT = "Face in bottom right"
    LEFT_EDGE = "Face in left Edge"
    TOP_EDGE = "Face in top Edge"
    RIGHT_EDGE = "Face in right Edge"
    BOTTOM_EDGE = "Face in bottom Edge"
    CENTER = "Face in center"


def guide_capture(frame_width: int, frame_height: int, box: FaceBox) -> CaptureGuidance:
    """Place an expanded box margin against the frame edges; first matching
    position wins, tiny faces short-circuit."""
    if frame_width <= 0 or frame_height <= 0:
        raise ValueError("frame dimensions must be positive")
    if box.area <= 1024:
        return CaptureGuidance.TOO_SMALL_COME_CLOSER
    w, h = frame_width, frame_height
    x1 = box.x - box.width // 2
    y1 = box.y - box.height // 2
    x2 = x1 + (3 * box.width) // 2
    y2 = box.y - box.height // 2
    x3 = box.x - box.width // 2
    y3 = box.y + (3 * box.height) // 2
    x4 = box.x + (3 * box.width) // 2
    y4 = box.y + (3 * box.height) // 2
    if x1 <= 0 and y1 <= 0:
        return CaptureGuidance.TOP_LEFT
    if x2 >= w and y2 <= 0:
        return CaptureGuidance.TOP_RIGHT
    if x3 <= 0 and y3 >= h:
        return CaptureGuidance.BOTTOM_LEFT
    if x4 >= w and y4 >= h:
        return CaptureGuidance.BOTTOM_RIGHT
    if x1 <= 0:
        return CaptureGuidance.LEFT_EDGE
    if y1 <= 0:
        return CaptureGuidance.TOP_EDGE
    if x2 >= w:
        return CaptureGuidance.RIGHT_EDGE
    if y4 >= h:
        return CaptureGuidance.BOTTOM_EDGE
    return CaptureGuidance.CENTER
