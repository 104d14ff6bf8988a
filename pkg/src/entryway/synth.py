"""Deterministic synthetic face corpus for desk-scale testing.

Each identity is a fixed per-cell stripe field (orientation, frequency, and
phase drawn from the identity seed) rendered in face-local coordinates, so
the face crop is stable under frame jitter. Frames add seeded sensor noise,
brightness drift, and box jitter; masked frames flatten the lower face.
Landmark boxes are known by construction and written as sidecar annotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .occlusion import Box, LandmarkSet
from .pgm import GrayImage, save_pgm

FRAME_SIZE = 160
FACE_NOMINAL = Box(16, 16, 128, 128)
EXPRESSIONS = ("normal", "happy", "sad")

# face-local unit-coordinate landmark layout (x, y, w, h)
_EYE1_U = (0.18, 0.25, 0.20, 0.16)
_EYE2_U = (0.62, 0.25, 0.20, 0.16)
_NOSE_U = (0.40, 0.42, 0.20, 0.22)
_MASK_TOP_U = 0.68

_CELLS = 8
_FREQ_RANGE = (10.0, 24.0)
_AMPLITUDE = 105.0
_EXPRESSION_PHASE = {"normal": 0.0, "happy": 0.45, "sad": -0.45}


@dataclass(frozen=True)
class SynthFrame:
    image: GrayImage
    landmarks: LandmarkSet
    expression: str
    masked: bool


def _identity_field(user_seed: int):
    # continuous draws: two identities share a cell's look with probability ~0
    rng = np.random.default_rng(user_seed)
    angles = rng.uniform(0.0, math.pi, size=(_CELLS, _CELLS))
    freqs = rng.uniform(*_FREQ_RANGE, size=(_CELLS, _CELLS))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(_CELLS, _CELLS))
    return angles, freqs, phases


def _render_face(user_seed: int, size: tuple[int, int], phase_shift: float) -> np.ndarray:
    angles, freqs, phases = _identity_field(user_seed)
    w, h = size
    u = (np.arange(w, dtype=np.float64) + 0.5) / w
    v = (np.arange(h, dtype=np.float64) + 0.5) / h
    uu, vv = np.meshgrid(u, v)
    ci = np.minimum((uu * _CELLS).astype(int), _CELLS - 1)
    cj = np.minimum((vv * _CELLS).astype(int), _CELLS - 1)
    ang = angles[cj, ci]
    frq = freqs[cj, ci]
    phs = phases[cj, ci] + phase_shift
    wave = np.sin(2.0 * math.pi * frq * (np.cos(ang) * uu + np.sin(ang) * vv) + phs)
    return 127.5 + _AMPLITUDE * wave


def _unit_box(spec: tuple[float, float, float, float], face: Box, jitter: tuple[int, int]) -> Box:
    ux, uy, uw, uh = spec
    return Box(
        face.x + int(round(ux * face.w)) + jitter[0],
        face.y + int(round(uy * face.h)) + jitter[1],
        max(1, int(round(uw * face.w))),
        max(1, int(round(uh * face.h))),
    )


def make_frame(
    user_seed: int,
    frame_idx: int,
    *,
    noise_sigma: float = 3.0,
    masked: bool = False,
    expression: str = "normal",
) -> SynthFrame:
    """Render one frame of an identity; fully determined by the arguments."""
    if expression not in EXPRESSIONS:
        raise ValueError(f"unknown expression {expression!r}")
    rng = np.random.default_rng((user_seed + 1) * 1_000_003 + frame_idx * 7919 + int(masked))
    jx, jy = rng.integers(-2, 3, size=2)
    jw, jh = rng.integers(-2, 3, size=2)
    face = Box(FACE_NOMINAL.x + int(jx), FACE_NOMINAL.y + int(jy),
               FACE_NOMINAL.w + int(jw), FACE_NOMINAL.h + int(jh))

    canvas = np.full((FRAME_SIZE, FRAME_SIZE), 90.0)
    canvas += rng.normal(0.0, 6.0, size=canvas.shape)  # background clutter
    tex = _render_face(user_seed, (face.w, face.h), _EXPRESSION_PHASE[expression])
    canvas[face.y : face.bottom, face.x : face.right] = tex
    if masked:
        top = face.y + int(round(_MASK_TOP_U * face.h))
        canvas[top : face.bottom, face.x : face.right] = 205.0

    canvas += rng.normal(0.0, noise_sigma, size=canvas.shape)
    canvas += rng.uniform(-5.0, 5.0)  # exposure drift
    img = np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8)

    eye_j = tuple(int(j) for j in rng.integers(-1, 2, size=2))
    nose_j = tuple(int(j) for j in rng.integers(-1, 2, size=2))
    landmarks = LandmarkSet(
        face=face,
        eye1=_unit_box(_EYE1_U, face, eye_j),
        eye2=_unit_box(_EYE2_U, face, eye_j),
        nose=_unit_box(_NOSE_U, face, nose_j),
    )
    return SynthFrame(image=img, landmarks=landmarks, expression=expression, masked=masked)


def _boxes_text(lm: LandmarkSet) -> str:
    lines = []
    for name in ("face", "eye1", "eye2", "nose"):
        b = getattr(lm, name)
        if b is not None:
            lines.append(f"{name} {b.x} {b.y} {b.w} {b.h}")
    return "\n".join(lines) + "\n"


def generate_dataset(
    root,
    users: dict[str, int],
    frames_per_user: int = 150,
    *,
    noise_sigma: float = 3.0,
    holdout_every: int = 5,
    holdout_noise_sigma: float = 6.0,
) -> Path:
    """Write an enrollment tree: <root>/<user>/<index>.pgm + .boxes + manifest.tsv.

    Every ``holdout_every``-th frame is rendered with extra noise and tagged in
    the manifest so evaluation can hold it out of training.
    """
    root = Path(root)
    for user_id, seed in sorted(users.items()):
        udir = root / user_id
        udir.mkdir(parents=True, exist_ok=True)
        manifest_lines = []
        for idx in range(frames_per_user):
            holdout = holdout_every > 0 and idx % holdout_every == holdout_every - 1
            sigma = holdout_noise_sigma if holdout else noise_sigma
            expression = EXPRESSIONS[idx % len(EXPRESSIONS)]
            frame = make_frame(seed, idx, noise_sigma=sigma, expression=expression)
            stem = f"{idx:04d}"
            save_pgm(udir / f"{stem}.pgm", frame.image)
            (udir / f"{stem}.boxes").write_text(_boxes_text(frame.landmarks))
            manifest_lines.append(
                f"{stem}\t{expression}\t{'holdout' if holdout else 'train'}"
            )
        (udir / "manifest.tsv").write_text("\n".join(manifest_lines) + "\n")
    return root


def generate_probe_set(
    root,
    users: dict[str, int],
    count: int,
    *,
    start_idx: int = 10_000,
    noise_sigma: float = 6.0,
    masked: bool = False,
) -> list[Path]:
    """Write standalone probe frames (e.g. impostors or masked probes)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for user_id, seed in sorted(users.items()):
        for k in range(count):
            idx = start_idx + k
            expression = EXPRESSIONS[k % len(EXPRESSIONS)]
            frame = make_frame(seed, idx, noise_sigma=noise_sigma, masked=masked, expression=expression)
            stem = f"{user_id}_{'m' if masked else 'p'}{k:03d}"
            save_pgm(root / f"{stem}.pgm", frame.image)
            (root / f"{stem}.boxes").write_text(_boxes_text(frame.landmarks))
            written.append(root / f"{stem}.pgm")
    return written
