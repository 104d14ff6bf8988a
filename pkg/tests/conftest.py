import json
import os
from pathlib import Path

import numpy as np
import pytest

from entryway import kernels, lbph, synth
from entryway.occlusion import extract_roi, union_eyes_nose

GOLDEN_DIR = Path(__file__).parent / "golden"
RECORD = os.environ.get("ENTRYWAY_RECORD_GOLDEN") == "1"

# identities used across the test suite; seeds pin every pixel
DESK_USERS = {"alice": 11, "bob": 12, "cara": 13, "dian": 14}
DESK_IMPOSTORS = {"visitor1": 101, "visitor2": 102}


def check_golden(name: str, text: str) -> None:
    path = GOLDEN_DIR / name
    if RECORD:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        return
    assert path.exists(), f"golden file {name} missing; record with ENTRYWAY_RECORD_GOLDEN=1"
    expected = path.read_text()
    assert text == expected, f"output differs from golden {name}"


def golden_json(name: str, computed: dict) -> dict:
    """Freeze regression values on first build, compare thereafter."""
    path = GOLDEN_DIR / name
    if RECORD:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(computed, indent=2, sort_keys=True) + "\n")
        return computed
    assert path.exists(), f"golden file {name} missing; record with ENTRYWAY_RECORD_GOLDEN=1"
    return json.loads(path.read_text())


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    kernels.warm_up()


def face_roi(frame, size=lbph.FULL_FACE_SIZE):
    return extract_roi(frame.image, frame.landmarks.face, size)


def occluded_roi(frame, size=lbph.OCCLUDED_SIZE):
    lm = frame.landmarks.ordered_eyes()
    box = union_eyes_nose(lm.eye1, lm.eye2, lm.nose)
    return extract_roi(frame.image, box, size)


@pytest.fixture(scope="session")
def small_models():
    """3 users x 10 frames, both modes; enough for pipeline-level tests."""
    users = dict(list(DESK_USERS.items())[:3])
    full, occ = [], []
    frames = {}
    for uid, seed in users.items():
        for i in range(10):
            fr = synth.make_frame(seed, i, expression=synth.EXPRESSIONS[i % 3])
            frames[(uid, i)] = fr
            full.append((uid, face_roi(fr)))
            occ.append((uid, occluded_roi(fr)))
    return {
        "users": users,
        "frames": frames,
        "full": lbph.train(full, mode=lbph.Mode.FULL_FACE),
        "occluded": lbph.train(occ, mode=lbph.Mode.OCCLUDED),
    }


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
