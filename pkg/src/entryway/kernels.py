"""Hot numeric kernels: LBP coding, cell histograms, chi-square, bilinear resize.

Two interchangeable backends:

* numba ``@njit`` loop kernels (default when numba imports cleanly), and
* a pure-numpy vectorized fallback.

Set ``ENTRYWAY_NO_NUMBA=1`` to force the numpy path. Integer outputs (LBP
codes, histogram counts, resized pixels) are bit-identical across backends;
chi-square sums may differ in the last ulp because numpy sums pairwise while
the loop kernels accumulate sequentially.

``benchmarks/bench_kernels.py`` times one backend against the other.
"""

from __future__ import annotations

import math
import os

import numpy as np

_ENV_FLAG = os.environ.get("ENTRYWAY_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _ENV_FLAG in ("1", "true", "yes")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by ENTRYWAY_NO_NUMBA")
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via subprocess in tests
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range  # type: ignore[assignment]

KERNEL_BACKEND = "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# LBP codes. Neighbor k (k = 0..7) walks the 3x3 ring clockwise from the
# top-left corner; bit k is set when neighbor >= center. Border pixels get 0.
# ---------------------------------------------------------------------------

def lbp_codes_numpy(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    c = img[1 : h - 1, 1 : w - 1]
    out = np.zeros((h, w), dtype=np.uint8)
    code = np.zeros(c.shape, dtype=np.uint8)
    code |= (img[0 : h - 2, 0 : w - 2] >= c).astype(np.uint8) * np.uint8(1)  # top-left
    code |= (img[0 : h - 2, 1 : w - 1] >= c).astype(np.uint8) * np.uint8(2)  # top
    code |= (img[0 : h - 2, 2:w] >= c).astype(np.uint8) * np.uint8(4)  # top-right
    code |= (img[1 : h - 1, 2:w] >= c).astype(np.uint8) * np.uint8(8)  # right
    code |= (img[2:h, 2:w] >= c).astype(np.uint8) * np.uint8(16)  # bottom-right
    code |= (img[2:h, 1 : w - 1] >= c).astype(np.uint8) * np.uint8(32)  # bottom
    code |= (img[2:h, 0 : w - 2] >= c).astype(np.uint8) * np.uint8(64)  # bottom-left
    code |= (img[1 : h - 1, 0 : w - 2] >= c).astype(np.uint8) * np.uint8(128)  # left
    out[1 : h - 1, 1 : w - 1] = code
    return out


@njit(cache=True)
def _lbp_codes_jit(img):
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            c = img[y, x]
            code = 0
            if img[y - 1, x - 1] >= c:
                code |= 1
            if img[y - 1, x] >= c:
                code |= 2
            if img[y - 1, x + 1] >= c:
                code |= 4
            if img[y, x + 1] >= c:
                code |= 8
            if img[y + 1, x + 1] >= c:
                code |= 16
            if img[y + 1, x] >= c:
                code |= 32
            if img[y + 1, x - 1] >= c:
                code |= 64
            if img[y, x - 1] >= c:
                code |= 128
            out[y, x] = code
    return out


# ---------------------------------------------------------------------------
# Per-cell 256-bin histograms over a floor-sized grid; right/bottom remainder
# pixels are discarded. Each cell block is divided by its own pixel count.
# ---------------------------------------------------------------------------

def cell_histograms_numpy(codes: np.ndarray, grid_x: int, grid_y: int) -> np.ndarray:
    h, w = codes.shape
    ch, cw = h // grid_y, w // grid_x
    cropped = codes[: grid_y * ch, : grid_x * cw].astype(np.int64)
    row_cell = np.repeat(np.arange(grid_y, dtype=np.int64), ch)
    col_cell = np.repeat(np.arange(grid_x, dtype=np.int64), cw)
    cell = row_cell[:, None] * grid_x + col_cell[None, :]
    keys = cell * 256 + cropped
    counts = np.bincount(keys.ravel(), minlength=grid_y * grid_x * 256)
    return counts.astype(np.float64) / float(ch * cw)


@njit(cache=True)
def _cell_histograms_jit(codes, grid_x, grid_y):
    h, w = codes.shape
    ch = h // grid_y
    cw = w // grid_x
    counts = np.zeros(grid_y * grid_x * 256, dtype=np.int64)
    for y in range(grid_y * ch):
        gy = y // ch
        for x in range(grid_x * cw):
            gx = x // cw
            counts[(gy * grid_x + gx) * 256 + int(codes[y, x])] += 1
    out = np.empty(counts.size, dtype=np.float64)
    norm = float(ch * cw)
    for i in range(counts.size):
        out[i] = counts[i] / norm
    return out


# ---------------------------------------------------------------------------
# Chi-square distance: sum((a-b)^2 / (a+b)), zero-denominator terms drop out.
# ---------------------------------------------------------------------------

def chi_square_pair_numpy(a: np.ndarray, b: np.ndarray) -> float:
    den = a + b
    num = (a - b) ** 2
    terms = np.zeros_like(den)
    np.divide(num, den, out=terms, where=den > 0.0)
    return float(terms.sum())


@njit(cache=True)
def _chi_square_pair_jit(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        den = a[i] + b[i]
        if den > 0.0:
            d = a[i] - b[i]
            s += d * d / den
    return s


def chi_square_many_numpy(feats: np.ndarray, q: np.ndarray) -> np.ndarray:
    # chunked to keep temporaries cache-sized; per-row sums are unaffected
    n = feats.shape[0]
    out = np.empty(n, dtype=np.float64)
    chunk = max(1, (1 << 20) // max(feats.shape[1], 1))
    for i in range(0, n, chunk):
        f = feats[i : i + chunk]
        den = f + q
        num = f - q
        num *= num
        terms = np.zeros_like(den)
        np.divide(num, den, out=terms, where=den > 0.0)
        out[i : i + chunk] = terms.sum(axis=1)
    return out


@njit(cache=True, parallel=True)
def _chi_square_many_jit(feats, q):
    n, d = feats.shape
    out = np.empty(n, dtype=np.float64)
    for i in prange(n):
        s = 0.0
        for j in range(d):
            den = feats[i, j] + q[j]
            if den > 0.0:
                diff = feats[i, j] - q[j]
                s += diff * diff / den
        out[i] = s
    return out


# ---------------------------------------------------------------------------
# Bilinear resize, pixel-center convention: src = (dst + 0.5) * scale - 0.5,
# clamped, 4-tap blend, round-half-up back to uint8. An identity target size
# reproduces the input exactly.
# ---------------------------------------------------------------------------

def resize_bilinear_numpy(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    src_h, src_w = img.shape
    scale_x = src_w / out_w
    scale_y = src_h / out_h
    sx = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) * scale_x - 0.5, 0.0, src_w - 1.0)
    sy = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) * scale_y - 0.5, 0.0, src_h - 1.0)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    f = img.astype(np.float64)
    v00 = f[y0[:, None], x0[None, :]]
    v01 = f[y0[:, None], x1[None, :]]
    v10 = f[y1[:, None], x0[None, :]]
    v11 = f[y1[:, None], x1[None, :]]
    fxr = fx[None, :]
    fyr = fy[:, None]
    top = (1.0 - fxr) * v00 + fxr * v01
    bot = (1.0 - fxr) * v10 + fxr * v11
    v = (1.0 - fyr) * top + fyr * bot
    return np.floor(v + 0.5).astype(np.uint8)


@njit(cache=True)
def _resize_bilinear_jit(img, out_w, out_h):
    src_h, src_w = img.shape
    scale_x = src_w / out_w
    scale_y = src_h / out_h
    out = np.empty((out_h, out_w), dtype=np.uint8)
    for dy in range(out_h):
        sy = (dy + 0.5) * scale_y - 0.5
        if sy < 0.0:
            sy = 0.0
        elif sy > src_h - 1.0:
            sy = src_h - 1.0
        y0 = int(math.floor(sy))
        fy = sy - y0
        y1 = min(y0 + 1, src_h - 1)
        for dx in range(out_w):
            sx = (dx + 0.5) * scale_x - 0.5
            if sx < 0.0:
                sx = 0.0
            elif sx > src_w - 1.0:
                sx = src_w - 1.0
            x0 = int(math.floor(sx))
            fx = sx - x0
            x1 = min(x0 + 1, src_w - 1)
            v00 = float(img[y0, x0])
            v01 = float(img[y0, x1])
            v10 = float(img[y1, x0])
            v11 = float(img[y1, x1])
            top = (1.0 - fx) * v00 + fx * v01
            bot = (1.0 - fx) * v10 + fx * v11
            v = (1.0 - fy) * top + fy * bot
            out[dy, dx] = np.uint8(math.floor(v + 0.5))
    return out


if HAS_NUMBA:
    lbp_codes = _lbp_codes_jit
    cell_histograms = _cell_histograms_jit
    chi_square_pair = _chi_square_pair_jit
    chi_square_many = _chi_square_many_jit
    resize_bilinear = _resize_bilinear_jit
else:
    lbp_codes = lbp_codes_numpy
    cell_histograms = cell_histograms_numpy
    chi_square_pair = chi_square_pair_numpy
    chi_square_many = chi_square_many_numpy
    resize_bilinear = resize_bilinear_numpy


def warm_up() -> None:
    """Pay JIT compile cost up front (no-op on the numpy backend)."""
    img = np.arange(25, dtype=np.uint8).reshape(5, 5)
    codes = lbp_codes(img)
    cell_histograms(codes, 1, 1)
    q = np.array([0.5, 0.5], dtype=np.float64)
    chi_square_pair(q, q)
    chi_square_many(q.reshape(1, 2), q)
    resize_bilinear(img, 4, 4)
