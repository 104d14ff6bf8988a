"""8-bit binary PGM (P5) image I/O.

Grayscale frames are plain numpy arrays: dtype uint8, shape (height, width).
P5 is the only ingest format; anything else must be converted upstream.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput

GrayImage = np.ndarray


def as_gray(img) -> GrayImage:
    """Validate an array as a grayscale frame and return it as uint8."""
    a = np.asarray(img)
    if a.ndim != 2:
        raise InvalidInput(f"expected 2-D grayscale array, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInput(f"empty image {a.shape}")
    if a.dtype != np.uint8:
        if np.issubdtype(a.dtype, np.integer) and a.min() >= 0 and a.max() <= 255:
            a = a.astype(np.uint8)
        else:
            raise InvalidInput(f"intensities must be 8-bit, got dtype {a.dtype}")
    return a


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments that run to end of line
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise InvalidInput("unexpected end of PGM header")
    return buf[start:pos], pos


def decode_pgm(data: bytes) -> GrayImage:
    """Decode binary P5 bytes into a grayscale array."""
    if not data.startswith(b"P5"):
        raise InvalidInput("not a binary PGM (missing P5 magic)")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise InvalidInput(f"bad PGM header token {tok!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise InvalidInput(f"bad PGM dimensions {width}x{height}")
    if not (0 < maxval < 256):
        raise InvalidInput(f"only 8-bit PGM supported (maxval {maxval})")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise InvalidInput("PGM raster shorter than width*height")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def encode_pgm(img: GrayImage) -> bytes:
    """Encode a grayscale array as canonical binary P5 bytes."""
    a = as_gray(img)
    h, w = a.shape
    return b"P5\n%d %d\n255\n" % (w, h) + a.tobytes()


def load_pgm(path) -> GrayImage:
    with open(path, "rb") as f:
        return decode_pgm(f.read())


def save_pgm(path, img: GrayImage) -> None:
    with open(path, "wb") as f:
        f.write(encode_pgm(img))
