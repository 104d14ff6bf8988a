import os

import numpy as np
import pytest

from entryway import lbph, registry, synth
from entryway.errors import (
    DuplicateUser,
    InvalidInput,
    MalformedPin,
    SessionStateError,
    UnknownUser,
)
from entryway.lbph import Mode
from entryway.occlusion import AnnotationDetector
from entryway.registry import UserStore, enroll_frame, finalize_enrollment, start_enrollment


@pytest.fixture()
def store(tmp_path):
    s = UserStore(tmp_path / "store.json", dataset_root=tmp_path / "datasets")
    s.save()
    return s


def test_add_user(store):
    rec = store.add_user("alice")
    assert rec.enrolled_frames == 0
    assert UserStore.load(store.path).get("alice").display_name == "alice"


def test_add_duplicate_rejected(store):
    store.add_user("alice")
    before = store.path.read_bytes()
    with pytest.raises(DuplicateUser):
        store.add_user("alice")
    assert store.path.read_bytes() == before  # store unchanged


@pytest.mark.parametrize("bad", ["", "two words", "a/b", "..", "tab\tname"])
def test_add_invalid_id_rejected(store, bad):
    with pytest.raises(InvalidInput):
        store.add_user(bad)


def test_pin_set_verify(store):
    store.add_user("alice")
    store.set_pin("alice", "7816")
    assert store.verify_pin("alice", "7816") is True
    assert store.verify_pin("alice", "7514") is False
    assert store.verify_pin("alice", "07816") is False


def test_pin_unset_never_verifies(store):
    store.add_user("alice")
    assert store.verify_pin("alice", "0000") is False


@pytest.mark.parametrize("bad", ["12a4", "123", "12345", " 123", "７８１６"])
def test_malformed_pin_rejected(store, bad):
    store.add_user("alice")
    with pytest.raises(MalformedPin):
        store.set_pin("alice", bad)


def test_unknown_user_operations(store):
    with pytest.raises(UnknownUser):
        store.set_pin("ghost", "1234")
    with pytest.raises(UnknownUser):
        store.delete_user("ghost")


def test_store_atomic_on_crash(store, monkeypatch):
    store.add_user("alice")
    good = store.path.read_bytes()

    def boom(src, dst):
        raise OSError("simulated crash between write and rename")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        store.add_user("bob")
    monkeypatch.undo()
    assert store.path.read_bytes() == good
    assert "bob" not in UserStore.load(store.path).users


# -- enrollment -------------------------------------------------------------------


def enroll_user(store, detector, user_id, seed, count):
    store.add_user(user_id)
    session = start_enrollment(store, user_id, target_count=count)
    for i in range(count):
        fr = synth.make_frame(seed, i, expression=synth.EXPRESSIONS[i % 3])
        detector.register(fr.image, fr.landmarks)
        enroll_frame(store, session, fr.image, fr.expression, landmarks=fr.landmarks)
    return session


def test_enrollment_full_cycle(store):
    det = AnnotationDetector()
    session = enroll_user(store, det, "alice", 11, 8)
    report = finalize_enrollment(store, session, det)
    assert report["frames"] == 8
    assert store.get("alice").enrolled_frames == 8
    manifest = (store.dataset_root / "alice" / "manifest.tsv").read_text().splitlines()
    assert len(manifest) == 8
    assert store.load_model(Mode.FULL_FACE).labels == ["alice"] * 8
    # occluded enrollment doubles up: eyes+nose plus the eyes-only fallback crop
    assert store.load_model(Mode.OCCLUDED).labels == ["alice"] * 16


def test_finalize_below_target_rejected(store):
    det = AnnotationDetector()
    session = enroll_user(store, det, "alice", 11, 5)
    session.target_count = 6
    with pytest.raises(SessionStateError):
        finalize_enrollment(store, session, det)


def test_enroll_after_finalize_rejected(store):
    det = AnnotationDetector()
    session = enroll_user(store, det, "alice", 11, 4)
    finalize_enrollment(store, session, det)
    fr = synth.make_frame(11, 99)
    with pytest.raises(SessionStateError):
        enroll_frame(store, session, fr.image, None)
    with pytest.raises(SessionStateError):
        finalize_enrollment(store, session, det)


def test_finalize_skips_and_fails_over_half(store):
    det = AnnotationDetector()  # nothing registered: every frame lacks landmarks
    store.add_user("alice")
    session = start_enrollment(store, "alice", target_count=4)
    for i in range(4):
        fr = synth.make_frame(11, i)
        enroll_frame(store, session, fr.image, None, landmarks=None)
    with pytest.raises(InvalidInput) as exc:
        finalize_enrollment(store, session, det)
    assert "4/4" in str(exc.value)
    assert store.load_model(Mode.FULL_FACE) is None  # nothing persisted


def test_finalize_extends_existing_models(store):
    det = AnnotationDetector()
    s1 = enroll_user(store, det, "alice", 11, 4)
    finalize_enrollment(store, s1, det)
    s2 = enroll_user(store, det, "bob", 12, 4)
    finalize_enrollment(store, s2, det)
    model = store.load_model(Mode.FULL_FACE)
    assert model.labels == ["alice"] * 4 + ["bob"] * 4


def test_delete_user_removes_labels_and_archives(store):
    det = AnnotationDetector()
    for uid, seed in (("alice", 11), ("bob", 12)):
        finalize_enrollment(store, enroll_user(store, det, uid, seed, 4), det)
    report = store.delete_user("alice")
    assert report["model_entries_removed"] == {"full_face": 4, "occluded": 8}
    for mode in Mode:
        assert "alice" not in store.load_model(mode).labels
    assert report["archived_dataset"] is not None
    assert (store.dataset_root / "_archive").exists()
    assert not (store.dataset_root / "alice").exists()

    # deleted user can re-register from scratch
    rec = store.add_user("alice")
    assert rec.enrolled_frames == 0

    # and the surviving user still predicts
    fr = synth.make_frame(12, 0)
    result = lbph.predict(store.load_model(Mode.FULL_FACE),
                          np.asarray(fr.image[16:144, 16:144]))
    assert result.label == "bob"


def test_default_target_is_150(store):
    det = AnnotationDetector()
    store.add_user("alice")
    session = start_enrollment(store, "alice")
    assert session.target_count == 150
    for i in range(149):
        fr = synth.make_frame(11, i)
        det.register(fr.image, fr.landmarks)
        enroll_frame(store, session, fr.image, None, landmarks=fr.landmarks)
    with pytest.raises(SessionStateError):  # 149 of 150
        finalize_enrollment(store, session, det)
    fr = synth.make_frame(11, 149)
    det.register(fr.image, fr.landmarks)
    enroll_frame(store, session, fr.image, None, landmarks=fr.landmarks)
    report = finalize_enrollment(store, session, det)
    assert report["frames"] == 150
    assert store.get("alice").enrolled_frames == 150
    assert len((store.dataset_root / "alice" / "manifest.tsv").read_text().splitlines()) == 150
    assert len(store.load_model(Mode.FULL_FACE)) == 150


def test_finalize_notifies(store):
    from entryway.controller import EnrollmentDoneAlert

    det = AnnotationDetector()
    session = enroll_user(store, det, "alice", 11, 4)
    seen = []
    finalize_enrollment(store, session, det, notifier=seen.append)
    assert seen == [EnrollmentDoneAlert(user_id="alice", frames=4)]


def test_expression_tag_validated(store):
    det = AnnotationDetector()
    store.add_user("alice")
    session = start_enrollment(store, "alice", target_count=1)
    fr = synth.make_frame(11, 0)
    with pytest.raises(InvalidInput):
        enroll_frame(store, session, fr.image, "angry")
