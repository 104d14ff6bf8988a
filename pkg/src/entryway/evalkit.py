"""Evaluation kit: confusion metrics, per-user/expression/mask confidence
tables, and the resolution-loss distance sweep, driven by TSV manifests.

A trial is positive when the subject is registered; a prediction is positive
when the pipeline accepts (confidence under the threshold and, for registered
subjects, the right label). Division-by-zero metrics are reported as
"undefined", never coerced to 0 or 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .controller import Config
from .errors import InsufficientLandmarks, InvalidInput, ManifestError, NoFaceDetected
from .lbph import Mode, RecognizerModel, predict
from .occlusion import extract_roi, recognize_full, recognize_occluded, union_eyes_nose
from .pgm import load_pgm


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Metrics:
    accuracy: float | None
    precision: float | None
    recall: float | None


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def compute_metrics(c: ConfusionCounts) -> Metrics:
    if c.total == 0:
        raise InvalidInput("confusion counts are all zero")
    if min(c.tp, c.fp, c.fn, c.tn) < 0:
        raise InvalidInput("confusion counts must be nonnegative")
    return Metrics(
        accuracy=_ratio(c.tp + c.tn, c.total),
        precision=_ratio(c.tp, c.tp + c.fp),
        recall=_ratio(c.tp, c.tp + c.fn),
    )


def metric_str(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.4f}"


# -- manifest -----------------------------------------------------------------

MANIFEST_HEADER = ["path", "subject", "expression", "masked", "registered"]


@dataclass(frozen=True)
class ManifestRow:
    path: str
    subject: str
    expression: str | None
    masked: bool
    registered: bool


def _parse_flag(value: str, field: str, lineno: int) -> bool:
    if value in ("1", "true", "yes"):
        return True
    if value in ("0", "false", "no"):
        return False
    raise ManifestError(f"line {lineno}: {field} must be 0/1, got {value!r}")


def load_manifest(path) -> list[ManifestRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].split("\t") != MANIFEST_HEADER:
        raise ManifestError(f"manifest must start with header {' '.join(MANIFEST_HEADER)!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ManifestError(f"line {lineno}: expected 5 tab-separated fields")
        rows.append(
            ManifestRow(
                path=fields[0],
                subject=fields[1],
                expression=None if fields[2] in ("-", "") else fields[2],
                masked=_parse_flag(fields[3], "masked", lineno),
                registered=_parse_flag(fields[4], "registered", lineno),
            )
        )
    if not rows:
        raise ManifestError("manifest has no data rows")
    return rows


# -- suite ----------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    path: str
    user_id: str
    mode: Mode
    expression: str | None
    masked: bool
    registered: bool
    predicted_label: str | None
    confidence: float | None  # None when landmarks were insufficient
    accepted: bool


@dataclass
class SuiteReport:
    trials: list[TrialRecord]
    confusion: dict[Mode, ConfusionCounts]
    missing: list[str]

    def metrics(self, mode: Mode) -> Metrics:
        return compute_metrics(self.confusion[mode])


def _run_one(model: RecognizerModel, img, detector, mode: Mode):
    run = recognize_full if mode is Mode.FULL_FACE else recognize_occluded
    try:
        result, _box = run(model, img, detector)
        return result.label, result.confidence
    except (NoFaceDetected, InsufficientLandmarks):
        return None, None


def run_suite(
    rows: list[ManifestRow],
    models: dict[Mode, RecognizerModel],
    detector,
    config: Config,
    image_root=None,
) -> SuiteReport:
    root = Path(image_root) if image_root else Path(".")
    missing = [r.path for r in rows if not (root / r.path).exists()]
    if len(missing) * 5 > len(rows):
        raise ManifestError(
            f"{len(missing)}/{len(rows)} manifest images missing; aborting"
        )
    trials: list[TrialRecord] = []
    counts = {mode: {"tp": 0, "fp": 0, "fn": 0, "tn": 0} for mode in models}
    for row in rows:
        full_path = root / row.path
        if not full_path.exists():
            continue
        img = load_pgm(full_path)
        for mode, model in models.items():
            label, conf = _run_one(model, img, detector, mode)
            accepted = (
                conf is not None
                and conf < config.accept_threshold
                and (not row.registered or label == row.subject)
            )
            trials.append(
                TrialRecord(
                    path=row.path,
                    user_id=row.subject,
                    mode=mode,
                    expression=row.expression,
                    masked=row.masked,
                    registered=row.registered,
                    predicted_label=label,
                    confidence=conf,
                    accepted=accepted,
                )
            )
            bucket = counts[mode]
            if row.registered:
                bucket["tp" if accepted else "fn"] += 1
            else:
                bucket["fp" if accepted else "tn"] += 1
    confusion = {mode: ConfusionCounts(**c) for mode, c in counts.items()}
    return SuiteReport(trials=trials, confusion=confusion, missing=missing)


# -- report rendering -------------------------------------------------------------


def _group(trials, key) -> dict:
    grouped: dict = {}
    for t in trials:
        grouped.setdefault(key(t), []).append(t)
    return grouped


def _mode_cells(ts: list[TrialRecord], with_accept: bool) -> str:
    confs = [t.confidence for t in ts if t.confidence is not None]
    if not confs:
        stats = f"{'-':>8} {'-':>8} {'-':>8}"
    else:
        arr = np.asarray(confs)
        stats = f"{arr.mean():8.2f} {arr.min():8.2f} {arr.max():8.2f}"
    if with_accept:
        stats += f" {sum(t.accepted for t in ts):>4}/{len(ts):<4}"
    return stats


def _wide_table(w, trials, modes, row_key, row_header, row_fmt, with_accept=True) -> None:
    """One row per key, one mean/min/max (+accepted) column group per mode."""
    head = f"{row_header:<24}"
    for mode in modes:
        cols = f"{'mean':>8} {'min':>8} {'max':>8}"
        if with_accept:
            cols += f" {'accepted':>9}"
        head += f" | {mode.value:^{len(cols)}}"
    w(head + "\n")
    sub = f"{'':<24}"
    for mode in modes:
        sub += f" | {'mean':>8} {'min':>8} {'max':>8}"
        if with_accept:
            sub += f" {'accepted':>9}"
    w(sub + "\n")
    groups = _group(trials, row_key)
    for key in sorted(groups):
        by_mode = _group(groups[key], lambda t: t.mode)
        line = f"{row_fmt(key):<24}"
        for mode in modes:
            line += " | " + _mode_cells(by_mode.get(mode, []), with_accept)
        w(line + "\n")


def render_text(report: SuiteReport, config: Config) -> str:
    out = io.StringIO()
    modes = sorted(report.confusion, key=lambda m: m.value)
    w = out.write

    registered = [t for t in report.trials if t.registered]
    unmasked = [t for t in registered if not t.masked]
    w("== per-user confidence (registered subjects, unmasked) ==\n")
    _wide_table(w, unmasked, modes, lambda t: t.user_id, "user", str)

    w("\n== per-expression confidence (registered subjects, unmasked) ==\n")
    tagged = [t for t in unmasked if t.expression is not None]
    _wide_table(
        w,
        tagged,
        modes,
        lambda t: (t.user_id, t.expression),
        "user/expression",
        lambda key: f"{key[0]} {key[1]}",
        with_accept=False,
    )

    masked = [t for t in registered if t.masked]
    if masked:
        w("\n== masked frames (registered subjects) ==\n")
        _wide_table(w, masked, modes, lambda t: t.user_id, "user", str)

    w("\n== confusion (positive = registered subject, prediction = accepted) ==\n")
    w(f"{'mode':<10} {'tp':>5} {'fp':>5} {'fn':>5} {'tn':>5} {'accuracy':>10} {'precision':>10} {'recall':>10}\n")
    for mode in modes:
        c = report.confusion[mode]
        m = report.metrics(mode)
        w(
            f"{mode.value:<10} {c.tp:>5} {c.fp:>5} {c.fn:>5} {c.tn:>5} "
            f"{metric_str(m.accuracy):>10} {metric_str(m.precision):>10} {metric_str(m.recall):>10}\n"
        )
    if report.missing:
        w(f"\nmissing images ({len(report.missing)}):\n")
        for path in report.missing:
            w(f"  {path}\n")
    w(f"\naccept threshold: {config.accept_threshold:g}\n")
    return out.getvalue()


def render_csv(report: SuiteReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["path", "subject", "mode", "expression", "masked", "registered",
         "predicted", "confidence", "accepted"]
    )
    for t in report.trials:
        writer.writerow(
            [
                t.path,
                t.user_id,
                t.mode.value,
                t.expression if t.expression is not None else "-",
                int(t.masked),
                int(t.registered),
                t.predicted_label if t.predicted_label is not None else "-",
                f"{t.confidence:.6f}" if t.confidence is not None else "-",
                int(t.accepted),
            ]
        )
    return out.getvalue()


# -- distance sweep -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    scale: float
    recognized: bool
    confidence: float


def distance_sweep(
    img,
    model: RecognizerModel,
    detector,
    scales: list[float],
    config: Config,
) -> list[SweepPoint]:
    """Emulate growing camera distance by resolution loss on the matched ROI.

    Each scale shrinks the ROI to that fraction and blows it back up before
    prediction. Scales must be descending and in (0, 1]; every point is
    reported even after the first failure.
    """
    if not scales:
        raise InvalidInput("need at least one scale")
    if any(not (0.0 < s <= 1.0) for s in scales):
        raise InvalidInput("scales must lie in (0, 1]")
    if any(a <= b for a, b in zip(scales, scales[1:])):
        raise InvalidInput("scales must be strictly descending")
    landmarks = detector.detect(img)
    if model.mode is Mode.FULL_FACE:
        if landmarks.face is None:
            raise NoFaceDetected("no face box for sweep")
        box = landmarks.face
    else:
        lm = landmarks.ordered_eyes()
        if lm.eye1 is None or lm.eye2 is None:
            raise InsufficientLandmarks("sweep needs both eyes")
        box = union_eyes_nose(lm.eye1, lm.eye2, lm.nose)
    roi = extract_roi(img, box, model.input_size)
    w, h = model.input_size
    points = []
    for scale in scales:
        dw, dh = max(1, round(w * scale)), max(1, round(h * scale))
        degraded = kernels.resize_bilinear(kernels.resize_bilinear(roi, dw, dh), w, h)
        result = predict(model, degraded)
        points.append(
            SweepPoint(
                scale=scale,
                recognized=result.confidence < config.accept_threshold,
                confidence=result.confidence,
            )
        )
    return points


def sweep_cutoff(points: list[SweepPoint]) -> float | None:
    """Largest-to-smallest prefix of passing scales; the last one is the cutoff."""
    cutoff = None
    for p in points:
        if not p.recognized:
            break
        cutoff = p.scale
    return cutoff


def render_sweep(points: list[SweepPoint]) -> str:
    out = io.StringIO()
    out.write(f"{'scale':>7} {'recognized':>11} {'confidence':>11}\n")
    for p in points:
        out.write(f"{p.scale:7.3f} {str(p.recognized).lower():>11} {p.confidence:11.2f}\n")
    cutoff = sweep_cutoff(points)
    out.write(f"maximum-distance analog (last passing scale): "
              f"{'none' if cutoff is None else f'{cutoff:g}'}\n")
    return out.getvalue()
