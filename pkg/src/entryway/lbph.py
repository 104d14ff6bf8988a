"""LBPH face recognizer: grid histograms of local binary patterns, matched
by chi-square nearest neighbor. Lower confidence means a better match; 0 is
an exact feature match.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import BadMagic, InvalidInput, ModelFormatError, NotTrained, TruncatedModel, UnsupportedVersion
from .pgm import GrayImage, as_gray

MODEL_MAGIC = b"LBPH"
MODEL_VERSION = 1


class Mode(Enum):
    FULL_FACE = "full_face"
    OCCLUDED = "occluded"


# Faces are normalized to fixed raster sizes so features stay comparable:
# full faces are square, eye+nose strips are twice as wide as tall.
FULL_FACE_SIZE = (128, 128)
OCCLUDED_SIZE = (128, 64)


@dataclass(frozen=True)
class LbpParams:
    radius: int = 1
    neighbors: int = 8
    grid_x: int = 8
    grid_y: int = 8
    bins: int = 256

    def __post_init__(self):
        if self.radius != 1 or self.neighbors != 8 or self.bins != 256:
            raise InvalidInput("only radius=1, neighbors=8, bins=256 is supported")
        if self.grid_x < 1 or self.grid_y < 1:
            raise InvalidInput("grid must be at least 1x1")

    @property
    def feature_length(self) -> int:
        return self.grid_x * self.grid_y * self.bins


@dataclass(frozen=True)
class MatchResult:
    label: str
    confidence: float


def lbp_code_image(img: GrayImage, params: LbpParams = LbpParams()) -> GrayImage:
    """Per-pixel 8-bit LBP codes; the 1-pixel border is coded 0."""
    a = as_gray(img)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise InvalidInput(f"image {a.shape} too small for a 3x3 neighborhood")
    return kernels.lbp_codes(a)


def grid_histogram(codes: GrayImage, params: LbpParams) -> np.ndarray:
    """Concatenated per-cell histograms, row-major cells, each L1-normalized."""
    a = as_gray(codes)
    h, w = a.shape
    if h // params.grid_y == 0 or w // params.grid_x == 0:
        raise InvalidInput(
            f"image {w}x{h} yields a zero-area cell on a {params.grid_x}x{params.grid_y} grid"
        )
    return kernels.cell_histograms(a, params.grid_x, params.grid_y)


def describe(img: GrayImage, params: LbpParams) -> np.ndarray:
    return grid_histogram(lbp_code_image(img, params), params)


def chi_square(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric chi-square distance; 0/0 terms contribute nothing."""
    av = np.ascontiguousarray(a, dtype=np.float64)
    bv = np.ascontiguousarray(b, dtype=np.float64)
    if av.ndim != 1 or bv.ndim != 1 or av.shape != bv.shape:
        raise InvalidInput(f"length mismatch: {av.shape} vs {bv.shape}")
    return float(kernels.chi_square_pair(av, bv))


@dataclass
class RecognizerModel:
    params: LbpParams
    input_size: tuple[int, int]  # (width, height)
    mode: Mode
    labels: list[str] = field(default_factory=list)
    features: np.ndarray = None  # (n_entries, feature_length) float64

    def __post_init__(self):
        if self.features is None:
            self.features = np.zeros((0, self.params.feature_length), dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[1] != self.params.feature_length:
            raise InvalidInput("feature matrix width does not match params")
        if len(self.labels) != self.features.shape[0]:
            raise InvalidInput("labels and features disagree on entry count")

    def __len__(self) -> int:
        return len(self.labels)

    def entries(self) -> Iterator[tuple[str, np.ndarray]]:
        for i, label in enumerate(self.labels):
            yield label, self.features[i]

    def remove_label(self, label: str) -> int:
        """Drop every entry carrying ``label``; returns how many were removed."""
        keep = [i for i, l in enumerate(self.labels) if l != label]
        removed = len(self.labels) - len(keep)
        if removed:
            self.labels = [self.labels[i] for i in keep]
            self.features = self.features[keep] if keep else np.zeros(
                (0, self.params.feature_length), dtype=np.float64
            )
        return removed

    def extend(self, samples: Iterable[tuple[str, GrayImage]]) -> int:
        """Describe and append samples (resized to input_size); returns count."""
        labels, rows = [], []
        for label, img in samples:
            labels.append(label)
            rows.append(_entry_feature(img, self.params, self.input_size))
        if rows:
            self.labels.extend(labels)
            self.features = np.vstack([self.features] + [r[None, :] for r in rows])
        return len(rows)


def _entry_feature(img: GrayImage, params: LbpParams, input_size: tuple[int, int]) -> np.ndarray:
    a = as_gray(img)
    w, h = input_size
    resized = kernels.resize_bilinear(a, w, h)
    return describe(resized, params)


def train(
    samples: Sequence[tuple[str, GrayImage]],
    params: LbpParams = LbpParams(),
    input_size: tuple[int, int] | None = None,
    mode: Mode = Mode.FULL_FACE,
) -> RecognizerModel:
    """Build a model with one entry per sample, in the given order."""
    if not samples:
        raise InvalidInput("cannot train on an empty sample set")
    if input_size is None:
        input_size = FULL_FACE_SIZE if mode is Mode.FULL_FACE else OCCLUDED_SIZE
    model = RecognizerModel(params=params, input_size=input_size, mode=mode)
    model.extend(samples)
    return model


def predict(model: RecognizerModel, img: GrayImage) -> MatchResult:
    """Nearest entry by chi-square; ties go to the lowest entry index."""
    if len(model) == 0:
        raise NotTrained("model has no entries")
    q = _entry_feature(img, model.params, model.input_size)
    dists = kernels.chi_square_many(model.features, q)
    idx = int(np.argmin(dists))
    return MatchResult(label=model.labels[idx], confidence=float(dists[idx]))


# ---------------------------------------------------------------------------
# Persistence. Little-endian layout:
#   "LBPH" | u16 version | u8 mode | u16 width | u16 height |
#   u16 radius | u16 neighbors | u16 grid_x | u16 grid_y | u32 bins |
#   u32 entry_count | per entry: u16 label_len, label utf-8, f64 * feature_len
# ---------------------------------------------------------------------------

_MODE_CODES = {Mode.FULL_FACE: 0, Mode.OCCLUDED: 1}
_MODE_FROM_CODE = {v: k for k, v in _MODE_CODES.items()}


def save_model(model: RecognizerModel) -> bytes:
    head = struct.pack(
        "<4sHBHHHHHHI",
        MODEL_MAGIC,
        MODEL_VERSION,
        _MODE_CODES[model.mode],
        model.input_size[0],
        model.input_size[1],
        model.params.radius,
        model.params.neighbors,
        model.params.grid_x,
        model.params.grid_y,
        model.params.bins,
    )
    parts = [head, struct.pack("<I", len(model))]
    for label, feat in model.entries():
        raw = label.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise InvalidInput(f"label {label[:20]!r}... exceeds 65535 bytes")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
        parts.append(np.ascontiguousarray(feat, dtype="<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedModel(
                f"need {n} bytes at offset {self.pos}, only {len(self.data) - self.pos} left"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_model(data: bytes) -> RecognizerModel:
    r = _Reader(data)
    magic = r.take(4)
    if magic != MODEL_MAGIC:
        raise BadMagic(f"expected {MODEL_MAGIC!r}, found {magic!r}")
    (version,) = r.unpack("<H")
    if version != MODEL_VERSION:
        raise UnsupportedVersion(f"model version {version}, this build reads {MODEL_VERSION}")
    mode_code, width, height = r.unpack("<BHH")
    if mode_code not in _MODE_FROM_CODE:
        raise ModelFormatError(f"unknown mode code {mode_code}")
    radius, neighbors, grid_x, grid_y, bins = r.unpack("<HHHHI")
    params = LbpParams(radius=radius, neighbors=neighbors, grid_x=grid_x, grid_y=grid_y, bins=bins)
    (count,) = r.unpack("<I")
    labels: list[str] = []
    feats = np.empty((count, params.feature_length), dtype=np.float64)
    for i in range(count):
        (label_len,) = r.unpack("<H")
        labels.append(r.take(label_len).decode("utf-8"))
        raw = r.take(8 * params.feature_length)
        feats[i] = np.frombuffer(raw, dtype="<f8")
    if r.pos != len(data):
        raise ModelFormatError(f"{len(data) - r.pos} trailing bytes after last entry")
    return RecognizerModel(
        params=params,
        input_size=(width, height),
        mode=_MODE_FROM_CODE[mode_code],
        labels=labels,
        features=feats,
    )


def save_model_file(path, model: RecognizerModel) -> None:
    with open(path, "wb") as f:
        f.write(save_model(model))


def load_model_file(path) -> RecognizerModel:
    with open(path, "rb") as f:
        return load_model(f.read())
