import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entryway import synth
from entryway.errors import (
    AnnotationError,
    EmptyRoi,
    InsufficientLandmarks,
    InvalidInput,
    ModeMismatch,
    NoFaceDetected,
)
from entryway.occlusion import (
    AnnotationDetector,
    Box,
    LandmarkSet,
    annotation_detector,
    extract_roi,
    parse_boxes_text,
    recognize_full,
    recognize_occluded,
    union_eyes_nose,
)
from entryway.pgm import save_pgm



def oracle_union(boxes):
    """Axis-aligned bounding box from the raw corner points."""
    xs = [b.x for b in boxes] + [b.x + b.w for b in boxes]
    ys = [b.y for b in boxes] + [b.y + b.h for b in boxes]
    return Box(min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))


box_st = st.builds(
    Box,
    x=st.integers(0, 200),
    y=st.integers(0, 200),
    w=st.integers(1, 80),
    h=st.integers(1, 80),
)


def test_union_example_with_nose():
    got = union_eyes_nose(Box(10, 20, 15, 15), Box(40, 20, 15, 15), Box(25, 35, 12, 18))
    assert got == Box(10, 20, 45, 33)


def test_union_identical_boxes():
    b = Box(5, 5, 10, 10)
    assert union_eyes_nose(b, b, b) == b


def test_union_eyes_only_example():
    got = union_eyes_nose(Box(10, 20, 15, 15), Box(40, 20, 15, 15), None)
    assert got == Box(10, 20, 45, 15)


def test_union_missing_eye_rejected():
    with pytest.raises(InsufficientLandmarks):
        union_eyes_nose(Box(1, 1, 2, 2), None)


@settings(max_examples=300, deadline=None)
@given(e1=box_st, e2=box_st, nose=st.one_of(st.none(), box_st))
def test_union_matches_corner_oracle(e1, e2, nose):
    got = union_eyes_nose(e1, e2, nose)
    boxes = [e1, e2] if nose is None else [e1, e2, nose]
    assert got == oracle_union(boxes)
    for b in boxes:
        assert got.contains(b)


@settings(max_examples=100, deadline=None)
@given(e1=box_st, e2=box_st, nose=box_st)
def test_union_properties(e1, e2, nose):
    # symmetric in the eyes; eyes-only union nests inside eyes+nose union
    with_nose = union_eyes_nose(e1, e2, nose)
    assert union_eyes_nose(e2, e1, nose) == with_nose
    assert with_nose.contains(union_eyes_nose(e1, e2, None))


# -- extract_roi -----------------------------------------------------------------


def test_identity_crop():
    r = np.random.default_rng(2)
    img = r.integers(0, 256, size=(20, 30)).astype(np.uint8)
    out = extract_roi(img, Box(0, 0, 30, 20), (30, 20))
    assert np.array_equal(out, img)


def test_clamped_crop_still_sized():
    img = np.arange(100, dtype=np.uint8).reshape(10, 10)
    out = extract_roi(img, Box(7, 2, 8, 5), (16, 10))  # 5 px past the right edge
    assert out.shape == (10, 16)
    clamped = extract_roi(img, Box(7, 2, 3, 5), (16, 10))
    assert np.array_equal(out, clamped)


def test_fully_outside_rejected():
    img = np.zeros((10, 10), dtype=np.uint8)
    with pytest.raises(EmptyRoi):
        extract_roi(img, Box(50, 50, 5, 5), (4, 4))


def test_checker_upscale_matches_reference():
    img = np.array([[0, 255], [255, 0]], dtype=np.uint8)
    out = extract_roi(img, Box(0, 0, 2, 2), (4, 4))
    # scalar reference resampler (pixel-center convention, round half up)
    import math

    expected = np.empty((4, 4), dtype=np.uint8)
    for dy in range(4):
        sy = min(max((dy + 0.5) * 0.5 - 0.5, 0.0), 1.0)
        y0, fy = int(math.floor(sy)), sy - math.floor(sy)
        y1 = min(y0 + 1, 1)
        for dx in range(4):
            sx = min(max((dx + 0.5) * 0.5 - 0.5, 0.0), 1.0)
            x0, fx = int(math.floor(sx)), sx - math.floor(sx)
            x1 = min(x0 + 1, 1)
            top = (1 - fx) * img[y0, x0] + fx * img[y0, x1]
            bot = (1 - fx) * img[y1, x0] + fx * img[y1, x1]
            expected[dy, dx] = int(math.floor((1 - fy) * top + fy * bot + 0.5))
    assert np.array_equal(out, expected)


# -- recognition pipelines ----------------------------------------------------------


@pytest.fixture()
def detector_with(small_models):
    det = AnnotationDetector()
    for (uid, i), fr in small_models["frames"].items():
        det.register(fr.image, fr.landmarks)
    return det


def test_recognize_full_self_match(small_models, detector_with):
    fr = small_models["frames"][("alice", 0)]
    result, box = recognize_full(small_models["full"], fr.image, detector_with)
    assert result.label == "alice"
    assert result.confidence == 0.0
    assert box == fr.landmarks.face


def test_recognize_occluded_self_match(small_models, detector_with):
    fr = small_models["frames"][("bob", 3)]
    result, box = recognize_occluded(small_models["occluded"], fr.image, detector_with)
    assert result.label == "bob"
    assert result.confidence == 0.0
    lm = fr.landmarks.ordered_eyes()
    assert box == union_eyes_nose(lm.eye1, lm.eye2, lm.nose)


def test_recognize_full_no_face(small_models):
    det = AnnotationDetector()  # knows nothing
    img = np.zeros((32, 32), dtype=np.uint8)
    with pytest.raises(NoFaceDetected):
        recognize_full(small_models["full"], img, det)


def test_recognize_occluded_needs_eyes(small_models):
    det = AnnotationDetector()
    img = np.zeros((32, 32), dtype=np.uint8)
    det.register(img, LandmarkSet(face=Box(0, 0, 32, 32), eye1=Box(2, 2, 4, 4)))
    with pytest.raises(InsufficientLandmarks):
        recognize_occluded(small_models["occluded"], img, det)


def test_occluded_eyes_only_fallback(small_models, detector_with):
    fr = small_models["frames"][("cara", 1)]
    det = AnnotationDetector()
    lm = fr.landmarks
    det.register(fr.image, LandmarkSet(face=lm.face, eye1=lm.eye1, eye2=lm.eye2, nose=None))
    result, box = recognize_occluded(small_models["occluded"], fr.image, det)
    assert box == union_eyes_nose(lm.eye1, lm.eye2, None)
    assert result.confidence >= 0.0  # a usable match, not an error


def test_mode_isolation_rejected_before_pixels(small_models, detector_with):
    fr = small_models["frames"][("alice", 0)]
    with pytest.raises(ModeMismatch):
        recognize_full(small_models["occluded"], fr.image, detector_with)
    with pytest.raises(ModeMismatch):
        recognize_occluded(small_models["full"], fr.image, detector_with)


def test_occluded_roi_smaller_than_face(small_models):
    for fr in small_models["frames"].values():
        lm = fr.landmarks.ordered_eyes()
        union = union_eyes_nose(lm.eye1, lm.eye2, lm.nose)
        assert lm.face.contains(union)
        assert union.area < lm.face.area


# -- annotation detector -----------------------------------------------------------------


def test_parse_boxes_verbatim():
    lm = parse_boxes_text("eye1 10 20 15 15\n")
    assert lm.eye1 == Box(10, 20, 15, 15)


def test_parse_boxes_orders_eyes():
    lm = parse_boxes_text("eye1 50 0 5 5\neye2 10 0 5 5\n")
    assert lm.eye1.x == 10 and lm.eye2.x == 50


def test_parse_boxes_missing_field():
    with pytest.raises(AnnotationError) as exc:
        parse_boxes_text("face 0 0 10 10\nnose 25 35 12\n", source="x.boxes")
    assert "x.boxes:2" in str(exc.value)


def test_parse_boxes_comments_and_blanks():
    lm = parse_boxes_text("# header\n\nface 0 0 4 4  # trailing\n")
    assert lm.face == Box(0, 0, 4, 4)


def test_parse_boxes_bad_landmark():
    with pytest.raises(AnnotationError):
        parse_boxes_text("mouth 0 0 4 4\n")


def test_detector_unknown_image_empty(small_models, detector_with):
    img = np.full((9, 9), 77, dtype=np.uint8)
    lm = detector_with.detect(img)
    assert lm == LandmarkSet()


def test_annotation_detector_from_tree(tmp_path):
    fr = synth.make_frame(11, 0)
    save_pgm(tmp_path / "f.pgm", fr.image)
    lm = fr.landmarks
    (tmp_path / "f.boxes").write_text(
        f"face {lm.face.x} {lm.face.y} {lm.face.w} {lm.face.h}\n"
        f"eye1 {lm.eye1.x} {lm.eye1.y} {lm.eye1.w} {lm.eye1.h}\n"
        f"eye2 {lm.eye2.x} {lm.eye2.y} {lm.eye2.w} {lm.eye2.h}\n"
    )
    det = annotation_detector(tmp_path)
    got = det.detect(fr.image)
    assert got.face == lm.face and got.nose is None


def test_box_validation():
    with pytest.raises(InvalidInput):
        Box(0, 0, 0, 5)
