"""Virtual device rig: camera queue, LCD buffer, lock, buzzer, photo store.

The rig is the single serialization point: every event goes through
``inject`` in timestamp order, the pure ``step`` function decides, and the
rig applies effects to the virtual devices. Everything is recorded in an
ordered trace (one line per event/phase-change/effect) that doubles as the
HTTP event feed; traces are byte-stable for golden-file comparison.

Scenario DSL, one event per line::

    @<seconds> motion
    @<seconds> frame <path>
    @<seconds> key <0-9|*|#>
    @<seconds> tick
    @<seconds> noface
    @<seconds> unknown [confidence]
    @<seconds> recognized <label> <confidence>
    @<seconds> admin <unlock|lock|mode1|mode2|register <name>>
"""

from __future__ import annotations

from collections import deque
from dataclasses import replace
from pathlib import Path

from . import controller as ctl
from .controller import Config, Event, Phase
from .errors import InsufficientLandmarks, InvalidInput, NoFaceDetected, NotTrained, ScenarioParseError
from .lbph import Mode
from .occlusion import recognize_full, recognize_occluded
from .pgm import GrayImage, encode_pgm, load_pgm


def load_scenario(text: str) -> list[tuple[float, Event]]:
    """Parse scenario text into a time-ordered event list (stable sort)."""
    events: list[tuple[float, Event]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        # full-line comments only: '#' is also a keypad key
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if not parts[0].startswith("@"):
            raise ScenarioParseError(f"line {lineno}: expected '@<seconds> <event>'")
        try:
            t = float(parts[0][1:])
        except ValueError:
            raise ScenarioParseError(f"line {lineno}: bad timestamp {parts[0]!r}") from None
        name, args = parts[1] if len(parts) > 1 else "", parts[2:]
        try:
            event = _parse_event(name, args)
        except Exception as exc:
            raise ScenarioParseError(f"line {lineno}: {exc}") from None
        if event is None:
            raise ScenarioParseError(f"line {lineno}: unrecognized event {name!r} with args {args}")
        events.append((t, event))
    events.sort(key=lambda te: te[0])  # timsort is stable: equal times keep file order
    return events


def _parse_event(name: str, args: list[str]):
    if name == "motion" and not args:
        return ctl.MotionDetected()
    if name == "frame" and len(args) == 1:
        return ctl.FrameAvailable(image=args[0])
    if name == "key" and len(args) == 1 and args[0] in tuple("0123456789*#"):
        return ctl.KeyPressed(key=args[0])
    if name == "tick" and not args:
        return ctl.Tick()
    if name == "noface" and not args:
        return ctl.RecognitionDone(outcome="no_face")
    if name == "unknown" and len(args) <= 1:
        conf = float(args[0]) if args else None
        return ctl.RecognitionDone(outcome="unknown", confidence=conf)
    if name == "recognized" and len(args) == 2:
        return ctl.RecognitionDone(outcome="match", label=args[0], confidence=float(args[1]))
    if name == "admin" and args:
        sub, rest = args[0], args[1:]
        if sub == "unlock" and not rest:
            return ctl.AdminUnlock()
        if sub == "lock" and not rest:
            return ctl.AdminLock()
        if sub == "mode1" and not rest:
            return ctl.AdminSetMode(Mode.FULL_FACE)
        if sub == "mode2" and not rest:
            return ctl.AdminSetMode(Mode.OCCLUDED)
        if sub == "register" and len(rest) == 1:
            return ctl.AdminRegisterStranger(name=rest[0])
    return None


class PipelineRecognizer:
    """Runs the mode-appropriate recognition pipeline over a frame."""

    def __init__(self, models: dict[Mode, object], detector):
        self.models = models
        self.detector = detector

    def __call__(self, mode: Mode, img: GrayImage) -> ctl.RecognitionDone:
        model = self.models.get(mode)
        if model is None:
            return ctl.RecognitionDone(outcome="no_face")
        run = recognize_full if mode is Mode.FULL_FACE else recognize_occluded
        try:
            result, _box = run(model, img, self.detector)
        except (NoFaceDetected, InsufficientLandmarks, NotTrained):
            return ctl.RecognitionDone(outcome="no_face")
        return ctl.RecognitionDone(outcome="match", label=result.label, confidence=result.confidence)


def _fmt_event(event: Event) -> str:
    if isinstance(event, ctl.FrameAvailable):
        return f"FrameAvailable {event.image}"
    if isinstance(event, ctl.RecognitionDone):
        parts = ["RecognitionDone", event.outcome]
        if event.label is not None:
            parts.append(event.label)
        if event.confidence is not None:
            parts.append(f"{event.confidence:.3f}")
        return " ".join(parts)
    if isinstance(event, ctl.KeyPressed):
        return f"KeyPressed {event.key}"
    if isinstance(event, ctl.AdminSetMode):
        return f"AdminSetMode {event.mode.value}"
    if isinstance(event, ctl.AdminRegisterStranger):
        return f"AdminRegisterStranger {event.name}"
    return type(event).__name__


def _fmt_effect(effect: ctl.Effect) -> str:
    if isinstance(effect, ctl.LcdShow):
        return f"LcdShow '{effect.line1}' '{effect.line2}'"
    if isinstance(effect, ctl.LockSet):
        return f"LockSet {'true' if effect.locked else 'false'}"
    if isinstance(effect, ctl.Buzz):
        return f"Buzz {effect.pattern}"
    if isinstance(effect, ctl.SavePhoto):
        return f"SavePhoto {effect.name} {effect.image or '-'}"
    if isinstance(effect, ctl.StartRecognition):
        return f"StartRecognition {effect.mode.value} {effect.image}"
    if isinstance(effect, ctl.Notify):
        n = effect.notification
        if isinstance(n, ctl.UnknownUserAlert):
            return f"Notify UnknownUserAlert {n.photo} {n.time:.3f}"
        if isinstance(n, ctl.DoorUnlockedAlert):
            return f"Notify DoorUnlockedAlert {n.user_id} {n.time:.3f}"
        if isinstance(n, ctl.EnrollmentDoneAlert):
            return f"Notify EnrollmentDoneAlert {n.user_id} {n.frames}"
        return f"Notify CommandAck {n.text}"
    return type(effect).__name__


class DoorRig:
    """Single-threaded event pump wiring the state machine to virtual devices."""

    def __init__(
        self,
        config: Config,
        pins: dict[str, str],
        *,
        recognize=None,
        camera_frames=(),
        image_root=None,
        notifier=None,
        photo_dir=None,
    ):
        self.config = config
        self.pins = dict(pins)
        self.recognize = recognize
        self.image_root = Path(image_root) if image_root else None
        self.notifier = notifier
        self.photo_dir = Path(photo_dir) if photo_dir else None

        self.phase: Phase = ctl.Idle()
        self.locked = True
        self.lcd = ("", "")
        self.buzzer_log: list[tuple[float, str]] = []
        self.photos: dict[str, bytes] = {}
        self.trace: list[str] = []
        self.feed: list[dict] = []
        self.now = 0.0
        self._seq = 0
        self._frames: dict[str, GrayImage] = {}
        self._camera: deque[str] = deque()
        self._uploads = 0
        self.last_frame_ref: str | None = None
        for i, frame in enumerate(camera_frames):
            ref = frame if isinstance(frame, str) else f"camera-{i}"
            if not isinstance(frame, str):
                self._frames[ref] = frame
            self._camera.append(ref)

    # -- frame handling -----------------------------------------------------

    def register_frame(self, img: GrayImage) -> str:
        self._uploads += 1
        ref = f"upload-{self._uploads}"
        self._frames[ref] = img
        return ref

    def resolve_frame(self, ref: str) -> GrayImage | None:
        if ref in self._frames:
            return self._frames[ref]
        path = Path(ref) if self.image_root is None else self.image_root / ref
        if path.exists():
            img = load_pgm(path)
            self._frames[ref] = img
            return img
        return None

    # -- trace / feed ---------------------------------------------------------

    def _emit(self, t: float, kind: str, text: str, **extra) -> None:
        line = f"{t:.3f} {text}"
        self.trace.append(line)
        self._seq += 1
        entry = {"seq": self._seq, "t": t, "kind": kind, "text": line}
        entry.update(extra)
        self.feed.append(entry)

    def trace_text(self) -> str:
        return "\n".join(self.trace) + ("\n" if self.trace else "")

    # -- event pump ------------------------------------------------------------

    def inject(self, t: float, event: Event) -> None:
        if t < self.now:
            raise InvalidInput(f"event at t={t} before current time {self.now}")
        self.now = t
        if isinstance(event, ctl.AdminSetMode):
            self.config = replace(self.config, mode=event.mode)
        if isinstance(event, ctl.FrameAvailable):
            self.last_frame_ref = event.image
        old = self.phase
        new_phase, effects = ctl.step(old, event, self.config, t, self.pins)
        if isinstance(event, ctl.Tick) and not effects and new_phase == old:
            self.phase = new_phase
            return  # idle clock ticks would flood the feed
        self._emit(t, "event", f"EVENT {_fmt_event(event)}", name=type(event).__name__)
        if ctl.phase_name(new_phase) != ctl.phase_name(old):
            self._emit(t, "phase", f"PHASE {ctl.phase_name(old)}->{ctl.phase_name(new_phase)}",
                       phase=ctl.phase_name(new_phase))
        self.phase = new_phase
        if not effects and new_phase == old:
            self._emit(t, "noop", "NOOP")
        followups: list[Event] = []
        for effect in effects:
            followups.extend(self._apply(t, effect))
        for ev in followups:
            self.inject(t, ev)

    def run_scenario(self, events: list[tuple[float, Event]]) -> str:
        for t, event in events:
            self.inject(t, event)
        return self.trace_text()

    # -- effects ---------------------------------------------------------------

    def _apply(self, t: float, effect: ctl.Effect) -> list[Event]:
        extra: dict = {"name": type(effect).__name__}
        followups: list[Event] = []
        if isinstance(effect, ctl.LcdShow):
            self.lcd = (effect.line1, effect.line2)
            extra["lines"] = [effect.line1, effect.line2]
        elif isinstance(effect, ctl.LockSet):
            self.locked = effect.locked
            extra["locked"] = effect.locked
        elif isinstance(effect, ctl.Buzz):
            self.buzzer_log.append((t, effect.pattern))
            extra["pattern"] = effect.pattern
        elif isinstance(effect, ctl.CaptureFrame):
            if self._camera:
                followups.append(ctl.FrameAvailable(image=self._camera.popleft()))
            else:
                followups.append(ctl.NoFrame())
        elif isinstance(effect, ctl.StartRecognition):
            img = self.resolve_frame(effect.image)
            if self.recognize is not None and img is not None:
                followups.append(self.recognize(effect.mode, img))
            extra["mode"] = effect.mode.value
        elif isinstance(effect, ctl.SavePhoto):
            self._save_photo(t, effect)
            extra["photo"] = effect.name
        elif isinstance(effect, ctl.Notify):
            extra.update(self._notification_fields(effect.notification))
            if self.notifier is not None:
                try:
                    self.notifier(effect.notification)
                except Exception:
                    pass  # notification failures never stall the door
        self._emit(t, "effect", f"EFFECT {_fmt_effect(effect)}", **extra)
        return followups

    def _save_photo(self, t: float, effect: ctl.SavePhoto) -> None:
        img = self.resolve_frame(effect.image) if effect.image else None
        if img is None:
            return
        data = encode_pgm(img)
        names = [effect.name]
        if effect.name == "stranger.jpg":
            # keep a timestamped copy so repeat strangers never overwrite
            names.append(f"stranger-{t:.3f}.jpg")
        for name in names:
            self.photos[name] = data
            if self.photo_dir is not None:
                self.photo_dir.mkdir(parents=True, exist_ok=True)
                (self.photo_dir / name).write_bytes(data)

    @staticmethod
    def _notification_fields(n: ctl.Notification) -> dict:
        if isinstance(n, ctl.UnknownUserAlert):
            return {"notification": "unknown_user", "photo": n.photo, "time": n.time}
        if isinstance(n, ctl.DoorUnlockedAlert):
            return {"notification": "door_unlocked", "user_id": n.user_id, "time": n.time}
        if isinstance(n, ctl.EnrollmentDoneAlert):
            return {"notification": "enrollment_done", "user_id": n.user_id, "frames": n.frames}
        return {"notification": "command_ack", "text_body": n.text}

    # -- gateway/service hooks ----------------------------------------------------

    def capture_photo(self, t: float | None = None) -> str | None:
        """Photograph on demand (chat 'capture'): next queued or last seen frame."""
        t = self.now if t is None else t
        ref = self._camera.popleft() if self._camera else self.last_frame_ref
        if ref is None:
            return None
        img = self.resolve_frame(ref)
        if img is None:
            return None
        name = f"capture-{t:.3f}.jpg"
        self.photos[name] = encode_pgm(img)
        if self.photo_dir is not None:
            self.photo_dir.mkdir(parents=True, exist_ok=True)
            (self.photo_dir / name).write_bytes(self.photos[name])
        return name

    def events_since(self, since: int) -> list[dict]:
        if since <= 0:
            return list(self.feed)
        return [e for e in self.feed if e["seq"] > since]

    def state_snapshot(self) -> dict:
        snap = {
            "phase": ctl.phase_name(self.phase),
            "locked": self.locked,
            "lcd": [self.lcd[0], self.lcd[1]],
            "mode": self.config.mode.value,
            "latest_seq": self._seq,
            "await": None,
        }
        if isinstance(self.phase, ctl.AwaitPin):
            snap["await"] = {
                "user_id": self.phase.user_id,
                "attempts_used": self.phase.attempts_used,
                "deadline": self.phase.deadline,
                "entered_digits": len(self.phase.entered),
            }
        return snap
