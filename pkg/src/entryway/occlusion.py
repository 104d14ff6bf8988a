"""Landmark geometry and the two recognition pipelines.

Full-face mode crops the detected face box. Occluded mode crops the bounding
box around both eyes plus the nose when present, or the eyes alone, so a
masked lower face never enters the descriptor.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import AnnotationError, EmptyRoi, InsufficientLandmarks, InvalidInput, ModeMismatch, NoFaceDetected
from .lbph import MatchResult, Mode, RecognizerModel, predict
from .pgm import GrayImage, as_gray, load_pgm


@dataclass(frozen=True)
class Box:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise InvalidInput(f"box needs positive extent, got {self.w}x{self.h}")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, other: "Box") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and other.right <= self.right
            and other.bottom <= self.bottom
        )


@dataclass(frozen=True)
class LandmarkSet:
    face: Box | None = None
    eye1: Box | None = None
    eye2: Box | None = None
    nose: Box | None = None

    def ordered_eyes(self) -> "LandmarkSet":
        """eye1 is the leftmost eye whenever both are present."""
        if self.eye1 and self.eye2 and self.eye2.x < self.eye1.x:
            return replace(self, eye1=self.eye2, eye2=self.eye1)
        return self


def union_eyes_nose(eye1: Box, eye2: Box, nose: Box | None = None) -> Box:
    """Axis-aligned bounding box of both eyes and, when present, the nose."""
    if eye1 is None or eye2 is None:
        raise InsufficientLandmarks("both eye boxes are required")
    boxes = [eye1, eye2] if nose is None else [eye1, eye2, nose]
    x = min(b.x for b in boxes)
    y = min(b.y for b in boxes)
    w = max(b.right for b in boxes) - x
    h = max(b.bottom for b in boxes) - y
    return Box(x, y, w, h)


def extract_roi(img: GrayImage, box: Box, target: tuple[int, int]) -> GrayImage:
    """Clamp the box to the frame, crop, and bilinearly resize to target (w, h)."""
    a = as_gray(img)
    img_h, img_w = a.shape
    x0 = max(0, box.x)
    y0 = max(0, box.y)
    x1 = min(img_w, box.right)
    y1 = min(img_h, box.bottom)
    if x1 <= x0 or y1 <= y0:
        raise EmptyRoi(f"box {box} lies outside a {img_w}x{img_h} frame")
    crop = np.ascontiguousarray(a[y0:y1, x0:x1])
    tw, th = target
    return kernels.resize_bilinear(crop, tw, th)


def recognize_full(model: RecognizerModel, img: GrayImage, detector) -> tuple[MatchResult, Box]:
    if model.mode is not Mode.FULL_FACE:
        raise ModeMismatch(f"full-face pipeline given a {model.mode.value} model")
    landmarks = detector.detect(img)
    if landmarks.face is None:
        raise NoFaceDetected("detector produced no face box")
    roi = extract_roi(img, landmarks.face, model.input_size)
    return predict(model, roi), landmarks.face


def recognize_occluded(model: RecognizerModel, img: GrayImage, detector) -> tuple[MatchResult, Box]:
    if model.mode is not Mode.OCCLUDED:
        raise ModeMismatch(f"occluded pipeline given a {model.mode.value} model")
    landmarks = detector.detect(img).ordered_eyes()
    if landmarks.eye1 is None or landmarks.eye2 is None:
        raise InsufficientLandmarks("occluded pipeline needs both eyes")
    box = union_eyes_nose(landmarks.eye1, landmarks.eye2, landmarks.nose)
    roi = extract_roi(img, box, model.input_size)
    return predict(model, roi), box


# ---------------------------------------------------------------------------
# Annotation-backed reference detector. Real cascade detectors plug in behind
# the same detect(img) -> LandmarkSet contract; this one replays sidecar
# annotations keyed by pixel content, so results are exactly reproducible.
#
# Sidecar format, for image name.pgm in file name.boxes:
#     <landmark> <x> <y> <w> <h>
# with landmark in {face, eye1, eye2, nose}; '#' starts a comment.
# ---------------------------------------------------------------------------

_LANDMARK_NAMES = ("face", "eye1", "eye2", "nose")


def _fingerprint(img: GrayImage) -> bytes:
    a = as_gray(img)
    head = b"%dx%d" % (a.shape[1], a.shape[0])
    return head + hashlib.sha1(a.tobytes()).digest()


def parse_boxes_text(text: str, source: str = "<boxes>") -> LandmarkSet:
    found: dict[str, Box] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise AnnotationError(f"{source}:{lineno}: expected 5 fields, got {len(parts)}")
        name = parts[0]
        if name not in _LANDMARK_NAMES:
            raise AnnotationError(f"{source}:{lineno}: unknown landmark {name!r}")
        try:
            x, y, w, h = (int(p) for p in parts[1:])
        except ValueError:
            raise AnnotationError(f"{source}:{lineno}: non-integer coordinate") from None
        try:
            found[name] = Box(x, y, w, h)
        except InvalidInput as exc:
            raise AnnotationError(f"{source}:{lineno}: {exc}") from None
    return LandmarkSet(**found).ordered_eyes()


class AnnotationDetector:
    """Deterministic detector that returns pre-annotated boxes verbatim."""

    capabilities = frozenset(_LANDMARK_NAMES)

    def __init__(self):
        self._by_print: dict[bytes, LandmarkSet] = {}

    def register(self, img: GrayImage, landmarks: LandmarkSet) -> None:
        self._by_print[_fingerprint(img)] = landmarks.ordered_eyes()

    def register_file(self, image_path) -> None:
        image_path = Path(image_path)
        sidecar = image_path.with_suffix(".boxes")
        if not sidecar.exists():
            return
        img = load_pgm(image_path)
        self.register(img, parse_boxes_text(sidecar.read_text(), source=str(sidecar)))

    def detect(self, img: GrayImage) -> LandmarkSet:
        return self._by_print.get(_fingerprint(img), LandmarkSet())


def annotation_detector(root) -> AnnotationDetector:
    """Scan a directory tree for .pgm/.boxes pairs and build a detector."""
    det = AnnotationDetector()
    for image_path in sorted(Path(root).rglob("*.pgm")):
        det.register_file(image_path)
    return det
