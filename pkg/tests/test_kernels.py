"""Backend equivalence and scalar-oracle checks for the hot kernels.

The oracles here are deliberately naive per-pixel/per-term loops, independent
of both production paths.
"""

import math

import numpy as np
import pytest

from entryway import kernels

# clockwise ring from the top-left corner, matching the production bit order
RING = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]


def oracle_lbp(img):
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            code = 0
            for k, (dy, dx) in enumerate(RING):
                if img[y + dy, x + dx] >= img[y, x]:
                    code += 2 ** k
            out[y, x] = code
    return out


def oracle_hist(codes, gx, gy):
    h, w = codes.shape
    ch, cw = h // gy, w // gx
    blocks = []
    for j in range(gy):
        for i in range(gx):
            cell = codes[j * ch : (j + 1) * ch, i * cw : (i + 1) * cw]
            hist = np.zeros(256)
            for v in cell.ravel():
                hist[v] += 1
            blocks.append(hist / cell.size)
    return np.concatenate(blocks)


def oracle_chi(a, b):
    s = 0.0
    for x, y in zip(a, b):
        if x + y > 0:
            s += (x - y) ** 2 / (x + y)
    return s


def oracle_resize(img, ow, oh):
    sh, sw = img.shape
    out = np.empty((oh, ow), dtype=np.uint8)
    for dy in range(oh):
        sy = min(max((dy + 0.5) * (sh / oh) - 0.5, 0.0), sh - 1.0)
        y0, fy = int(math.floor(sy)), sy - math.floor(sy)
        y1 = min(y0 + 1, sh - 1)
        for dx in range(ow):
            sx = min(max((dx + 0.5) * (sw / ow) - 0.5, 0.0), sw - 1.0)
            x0, fx = int(math.floor(sx)), sx - math.floor(sx)
            x1 = min(x0 + 1, sw - 1)
            top = (1 - fx) * img[y0, x0] + fx * img[y0, x1]
            bot = (1 - fx) * img[y1, x0] + fx * img[y1, x1]
            out[dy, dx] = int(math.floor((1 - fy) * top + fy * bot + 0.5))
    return out


@pytest.fixture(scope="module")
def images():
    r = np.random.default_rng(42)
    return [
        r.integers(0, 256, size=(5, 5)).astype(np.uint8),
        r.integers(0, 256, size=(16, 24)).astype(np.uint8),
        r.integers(0, 256, size=(33, 17)).astype(np.uint8),
    ]


def test_lbp_matches_oracle(images):
    for img in images:
        assert np.array_equal(kernels.lbp_codes(img), oracle_lbp(img))


def test_lbp_backends_identical(images):
    for img in images:
        assert np.array_equal(kernels.lbp_codes_numpy(img), kernels._lbp_codes_jit(img))


def test_hist_matches_oracle(images):
    for img in images:
        codes = kernels.lbp_codes(img)
        got = kernels.cell_histograms(codes, 2, 3)
        assert np.allclose(got, oracle_hist(codes, 2, 3), atol=0)


def test_hist_backends_bit_identical(images):
    for img in images:
        codes = kernels.lbp_codes(img)
        a = kernels.cell_histograms_numpy(codes, 4, 2)
        b = kernels._cell_histograms_jit(codes, 4, 2)
        assert a.tobytes() == b.tobytes()


def test_chi_matches_oracle():
    r = np.random.default_rng(7)
    for _ in range(20):
        a = r.random(64)
        b = r.random(64)
        assert kernels.chi_square_pair(a, b) == pytest.approx(oracle_chi(a, b), abs=1e-12)


def test_chi_many_matches_pair():
    r = np.random.default_rng(8)
    feats = r.random((12, 256))
    q = r.random(256)
    many = kernels.chi_square_many(feats, q)
    for i in range(12):
        assert many[i] == pytest.approx(kernels.chi_square_pair(feats[i], q), rel=1e-12)


def test_chi_backends_close():
    # summation order differs (pairwise vs sequential); values agree to ulps
    r = np.random.default_rng(9)
    feats = r.random((6, 4096))
    q = r.random(4096)
    a = kernels.chi_square_many_numpy(feats, q)
    b = kernels._chi_square_many_jit(feats, q)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_resize_matches_oracle(images):
    cases = [(4, 4), (7, 3), (32, 48)]
    for img in images:
        for ow, oh in cases:
            assert np.array_equal(kernels.resize_bilinear(img, ow, oh), oracle_resize(img, ow, oh))


def test_resize_identity_is_exact(images):
    for img in images:
        h, w = img.shape
        assert np.array_equal(kernels.resize_bilinear(img, w, h), img)


def test_resize_backends_identical(images):
    for img in images:
        a = kernels.resize_bilinear_numpy(img, 20, 11)
        b = kernels._resize_bilinear_jit(img, 20, 11)
        assert np.array_equal(a, b)


def test_backend_flag_reported():
    assert kernels.KERNEL_BACKEND in ("numba", "numpy")
    if kernels.NUMBA_DISABLED:
        assert kernels.KERNEL_BACKEND == "numpy"
