"""User records, PINs, enrollment datasets, and model training orchestration.

The store is a single JSON document written atomically (temp file + rename).
Datasets live under ``dataset_root/<user_id>/`` as zero-padded PGM frames with
landmark sidecars and a per-user ``manifest.tsv``. One model file per mode
sits in the dataset root.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import lbph
from .errors import (
    DuplicateUser,
    InsufficientLandmarks,
    InvalidInput,
    MalformedPin,
    NoFaceDetected,
    SessionStateError,
    UnknownUser,
)
from .lbph import Mode, RecognizerModel
from .occlusion import extract_roi, union_eyes_nose
from .pgm import GrayImage, load_pgm, save_pgm

STORE_VERSION = 1
DEFAULT_TARGET_COUNT = 150
MODEL_FILENAMES = {Mode.FULL_FACE: "full_face.lbph", Mode.OCCLUDED: "occluded.lbph"}

_PIN_RE = re.compile(r"^[0-9]{4}$")
_ID_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def _check_pin(pin: str) -> str:
    if not isinstance(pin, str) or not _PIN_RE.match(pin):
        raise MalformedPin("PIN must be exactly 4 decimal digits")
    return pin


def _check_user_id(user_id: str) -> str:
    if not user_id or not _ID_RE.match(user_id) or user_id in (".", ".."):
        raise InvalidInput(
            f"user id {user_id!r} must be nonempty, [A-Za-z0-9_.-] only"
        )
    return user_id


@dataclass
class UserRecord:
    user_id: str
    display_name: str
    pin: str | None = None  # unset until set_pin
    enrolled_frames: int = 0
    created_at: float = 0.0

    def to_json(self) -> dict:
        return {
            "display_name": self.display_name,
            "pin": self.pin,
            "enrolled_frames": self.enrolled_frames,
            "created_at": self.created_at,
        }


class UserStore:
    """Single-writer store; readers always see the last persisted snapshot."""

    def __init__(self, path, dataset_root=None):
        self.path = Path(path)
        self.dataset_root = Path(dataset_root) if dataset_root else self.path.parent / "datasets"
        self.users: dict[str, UserRecord] = {}

    # -- persistence --------------------------------------------------------

    @classmethod
    def load(cls, path) -> "UserStore":
        path = Path(path)
        doc = json.loads(path.read_text())
        if doc.get("version") != STORE_VERSION:
            raise InvalidInput(f"store version {doc.get('version')!r} not supported")
        store = cls(path, dataset_root=doc["dataset_root"])
        for uid, rec in doc["users"].items():
            store.users[uid] = UserRecord(
                user_id=uid,
                display_name=rec["display_name"],
                pin=rec["pin"],
                enrolled_frames=rec["enrolled_frames"],
                created_at=rec["created_at"],
            )
        return store

    def save(self) -> None:
        doc = {
            "version": STORE_VERSION,
            "dataset_root": str(self.dataset_root),
            "users": {uid: rec.to_json() for uid, rec in sorted(self.users.items())},
        }
        data = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "w") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, self.path)
        try:
            os.chmod(self.path, 0o600)  # PINs are stored in the clear
        except OSError:
            pass

    # -- model files ---------------------------------------------------------

    def model_path(self, mode: Mode) -> Path:
        return self.dataset_root / MODEL_FILENAMES[mode]

    def load_model(self, mode: Mode) -> RecognizerModel | None:
        path = self.model_path(mode)
        if not path.exists():
            return None
        return lbph.load_model_file(path)

    # -- user operations ------------------------------------------------------

    def add_user(self, user_id: str, display_name: str | None = None, *, now=None) -> UserRecord:
        _check_user_id(user_id)
        if user_id in self.users:
            raise DuplicateUser(f"user {user_id!r} already exists")
        rec = UserRecord(
            user_id=user_id,
            display_name=display_name or user_id,
            created_at=time.time() if now is None else now,
        )
        self.users[user_id] = rec
        self.save()
        return rec

    def get(self, user_id: str) -> UserRecord:
        try:
            return self.users[user_id]
        except KeyError:
            raise UnknownUser(user_id) from None

    def set_pin(self, user_id: str, pin: str) -> None:
        rec = self.get(user_id)
        rec.pin = _check_pin(pin)
        self.save()

    def verify_pin(self, user_id: str, candidate: str) -> bool:
        rec = self.get(user_id)
        # exact string equality; attempt limiting lives in the controller
        return rec.pin is not None and candidate == rec.pin

    def pins(self) -> dict[str, str]:
        return {uid: rec.pin for uid, rec in self.users.items() if rec.pin is not None}

    def delete_user(self, user_id: str) -> dict:
        """Remove the record, strip model entries, archive the dataset dir."""
        rec = self.get(user_id)
        removed = {}
        for mode in Mode:
            model = self.load_model(mode)
            if model is None:
                removed[mode.value] = 0
                continue
            removed[mode.value] = model.remove_label(user_id)
            lbph.save_model_file(self.model_path(mode), model)
        archived = None
        user_dir = self.dataset_root / user_id
        if user_dir.exists():
            archive_root = self.dataset_root / "_archive"
            archive_root.mkdir(parents=True, exist_ok=True)
            n = 0
            while True:
                candidate = archive_root / f"{user_id}.{n}"
                if not candidate.exists():
                    break
                n += 1
            os.replace(user_dir, candidate)
            archived = str(candidate)
        del self.users[user_id]
        self.save()
        return {
            "user_id": rec.user_id,
            "model_entries_removed": removed,
            "archived_dataset": archived,
        }


# ---------------------------------------------------------------------------
# Enrollment
# ---------------------------------------------------------------------------


@dataclass
class EnrollmentSession:
    user_id: str
    target_count: int = DEFAULT_TARGET_COUNT
    state: str = "collecting"  # collecting | finalized | aborted
    collected: list[tuple[str, str | None]] = field(default_factory=list)  # (stem, tag)


def start_enrollment(store: UserStore, user_id: str, target_count: int = DEFAULT_TARGET_COUNT) -> EnrollmentSession:
    store.get(user_id)
    if target_count < 1:
        raise InvalidInput("target_count must be >= 1")
    (store.dataset_root / user_id).mkdir(parents=True, exist_ok=True)
    return EnrollmentSession(user_id=user_id, target_count=target_count)


def enroll_frame(
    store: UserStore,
    session: EnrollmentSession,
    image: GrayImage,
    expression_tag: str | None = None,
    landmarks=None,
) -> EnrollmentSession:
    """Persist one frame (and its landmark sidecar if given) into the dataset."""
    if session.state != "collecting":
        raise SessionStateError(f"session is {session.state}, not collecting")
    if expression_tag is not None and expression_tag not in ("normal", "happy", "sad"):
        raise InvalidInput(f"unknown expression tag {expression_tag!r}")
    user_dir = store.dataset_root / session.user_id
    user_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{len(session.collected):04d}"
    save_pgm(user_dir / f"{stem}.pgm", image)
    if landmarks is not None:
        lines = []
        for name in ("face", "eye1", "eye2", "nose"):
            b = getattr(landmarks, name)
            if b is not None:
                lines.append(f"{name} {b.x} {b.y} {b.w} {b.h}")
        (user_dir / f"{stem}.boxes").write_text("\n".join(lines) + "\n")
    session.collected.append((stem, expression_tag))
    return session


def _mode_rois(img: GrayImage, landmarks, mode: Mode) -> list[GrayImage]:
    if mode is Mode.FULL_FACE:
        if landmarks.face is None:
            raise NoFaceDetected("no face box")
        return [extract_roi(img, landmarks.face, lbph.FULL_FACE_SIZE)]
    lm = landmarks.ordered_eyes()
    if lm.eye1 is None or lm.eye2 is None:
        raise InsufficientLandmarks("need both eyes")
    # enroll the eyes-only crop too, so the nose-hidden fallback at the door
    # has matching entries to land on
    rois = [extract_roi(img, union_eyes_nose(lm.eye1, lm.eye2, lm.nose), lbph.OCCLUDED_SIZE)]
    if lm.nose is not None:
        rois.append(extract_roi(img, union_eyes_nose(lm.eye1, lm.eye2, None), lbph.OCCLUDED_SIZE))
    return rois


def finalize_enrollment(store: UserStore, session: EnrollmentSession, detector, notifier=None) -> dict:
    """Train/extend both mode models from the collected frames.

    Frames whose landmarks cannot support a mode are skipped and counted; if
    more than half are skipped for either mode the whole finalize fails and
    nothing is persisted. ``notifier`` (if given) receives an enrollment-done
    alert after everything is on disk.
    """
    if session.state != "collecting":
        raise SessionStateError(f"session is {session.state}, not collecting")
    if len(session.collected) < session.target_count:
        raise SessionStateError(
            f"collected {len(session.collected)} of {session.target_count} frames"
        )
    user_dir = store.dataset_root / session.user_id
    samples: dict[Mode, list[tuple[str, GrayImage]]] = {m: [] for m in Mode}
    skipped = {m: 0 for m in Mode}
    for stem, _tag in session.collected:
        img = load_pgm(user_dir / f"{stem}.pgm")
        landmarks = detector.detect(img)
        for mode in Mode:
            try:
                for roi in _mode_rois(img, landmarks, mode):
                    samples[mode].append((session.user_id, roi))
            except (NoFaceDetected, InsufficientLandmarks):
                skipped[mode] += 1
    total = len(session.collected)
    for mode in Mode:
        if skipped[mode] * 2 > total:
            raise InvalidInput(
                f"{mode.value}: {skipped[mode]}/{total} frames lack required "
                f"landmarks; enrollment aborted, nothing persisted"
            )
    deltas = {}
    for mode in Mode:
        model = store.load_model(mode)
        if model is None:
            model = lbph.train(samples[mode], mode=mode)
            added = len(samples[mode])
        else:
            added = model.extend(samples[mode])
        store.dataset_root.mkdir(parents=True, exist_ok=True)
        lbph.save_model_file(store.model_path(mode), model)
        deltas[mode.value] = added
    manifest = "".join(
        f"{stem}\t{tag if tag is not None else '-'}\n" for stem, tag in session.collected
    )
    (user_dir / "manifest.tsv").write_text(manifest)
    rec = store.get(session.user_id)
    rec.enrolled_frames = total
    store.save()
    session.state = "finalized"
    if notifier is not None:
        from .controller import EnrollmentDoneAlert

        try:
            notifier(EnrollmentDoneAlert(user_id=session.user_id, frames=total))
        except Exception:
            pass  # notification trouble never rolls back an enrollment
    return {"user_id": session.user_id, "frames": total, "added": deltas, "skipped": {m.value: n for m, n in skipped.items()}}
