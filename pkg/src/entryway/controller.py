"""Pure access-control state machine.

``step`` is a deterministic total function over (phase, event): unexpected
pairs are explicit no-ops, never errors. Admin lock/unlock are override
effects that leave the phase untouched; the two-factor path is
motion -> recognition accepted under the confidence threshold -> correct PIN.

PIN keypad semantics: digits accumulate (up to 8), ``#`` submits, ``*``
clears. The attempt counter and the entry deadline both live in the phase.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Union

from .errors import InvalidInput
from .lbph import Mode

LCD_WIDTH = 16
_PIN_BUFFER_CAP = 8


@dataclass(frozen=True)
class Config:
    accept_threshold: float = 70.0
    pin_timeout: float = 30.0
    max_attempts: int = 3
    mode: Mode = Mode.FULL_FACE
    relock_after: float = 5.0

    def __post_init__(self):
        if self.accept_threshold <= 0 or self.pin_timeout <= 0 or self.relock_after <= 0:
            raise InvalidInput("thresholds and timeouts must be positive")
        if self.max_attempts < 1:
            raise InvalidInput("max_attempts must be >= 1")


def load_config(path) -> Config:
    """Parse a key=value config file ('#' comments allowed)."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"config line {lineno}: expected key=value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in ("accept_threshold", "pin_timeout", "relock_after"):
            values[key] = float(val)
        elif key == "max_attempts":
            values[key] = int(val)
        elif key == "mode":
            try:
                values[key] = Mode(val)
            except ValueError:
                raise InvalidInput(f"config line {lineno}: unknown mode {val!r}") from None
        else:
            raise InvalidInput(f"config line {lineno}: unknown key {key!r}")
    return Config(**values)


# -- phases -------------------------------------------------------------------


@dataclass(frozen=True)
class Idle:
    pass


@dataclass(frozen=True)
class Recognizing:
    frame: str | None = None  # ref of the frame being analyzed, once seen


@dataclass(frozen=True)
class AwaitPin:
    user_id: str
    attempts_used: int
    deadline: float
    entered: str = ""


@dataclass(frozen=True)
class Unlocked:
    until: float


@dataclass(frozen=True)
class StrangerAlert:
    photo: str
    until: float


Phase = Union[Idle, Recognizing, AwaitPin, Unlocked, StrangerAlert]

_PHASE_NAMES = {
    Idle: "idle",
    Recognizing: "recognizing",
    AwaitPin: "await_pin",
    Unlocked: "unlocked",
    StrangerAlert: "stranger_alert",
}


def phase_name(phase: Phase) -> str:
    return _PHASE_NAMES[type(phase)]


# -- events ---------------------------------------------------------------------


@dataclass(frozen=True)
class MotionDetected:
    pass


@dataclass(frozen=True)
class FrameAvailable:
    image: str


@dataclass(frozen=True)
class NoFrame:
    """Injected by the rig when the camera queue is empty."""


@dataclass(frozen=True)
class RecognitionDone:
    outcome: str  # match | unknown | no_face
    label: str | None = None
    confidence: float | None = None


@dataclass(frozen=True)
class KeyPressed:
    key: str  # 0-9, '*', '#'


@dataclass(frozen=True)
class Tick:
    pass


@dataclass(frozen=True)
class AdminUnlock:
    pass


@dataclass(frozen=True)
class AdminLock:
    pass


@dataclass(frozen=True)
class AdminSetMode:
    mode: Mode


@dataclass(frozen=True)
class AdminRegisterStranger:
    name: str


Event = Union[
    MotionDetected,
    FrameAvailable,
    NoFrame,
    RecognitionDone,
    KeyPressed,
    Tick,
    AdminUnlock,
    AdminLock,
    AdminSetMode,
    AdminRegisterStranger,
]


# -- notifications & effects ---------------------------------------------------


@dataclass(frozen=True)
class UnknownUserAlert:
    photo: str
    time: float


@dataclass(frozen=True)
class DoorUnlockedAlert:
    user_id: str
    time: float


@dataclass(frozen=True)
class EnrollmentDoneAlert:
    user_id: str
    frames: int


@dataclass(frozen=True)
class CommandAck:
    text: str


Notification = Union[UnknownUserAlert, DoorUnlockedAlert, EnrollmentDoneAlert, CommandAck]


@dataclass(frozen=True)
class CaptureFrame:
    pass


@dataclass(frozen=True)
class LcdShow:
    line1: str
    line2: str


@dataclass(frozen=True)
class LockSet:
    locked: bool


@dataclass(frozen=True)
class Buzz:
    pattern: str  # grant | deny


@dataclass(frozen=True)
class SavePhoto:
    name: str  # temp.jpg | stranger.jpg
    image: str


@dataclass(frozen=True)
class Notify:
    notification: Notification


@dataclass(frozen=True)
class StartRecognition:
    mode: Mode
    image: str


Effect = Union[CaptureFrame, LcdShow, LockSet, Buzz, SavePhoto, Notify, StartRecognition]


def lcd(line1: str, line2: str = "") -> LcdShow:
    # 1602 display: two rows of 16, hard truncation
    return LcdShow(line1[:LCD_WIDTH], line2[:LCD_WIDTH])


_NOOP: tuple = ()


def step(
    phase: Phase,
    event: Event,
    config: Config,
    now: float,
    pins: Mapping[str, str],
) -> tuple[Phase, tuple[Effect, ...]]:
    """One transition. ``pins`` maps user ids to their current PINs."""

    # admin overrides work from any phase and do not disturb it
    if isinstance(event, AdminUnlock):
        return phase, (LockSet(False),)
    if isinstance(event, AdminLock):
        return phase, (LockSet(True),)
    if isinstance(event, AdminSetMode):
        # the rig owns the mutable config; this ack is the only effect here
        return phase, (lcd("mode set", event.mode.value[:LCD_WIDTH]),)
    if isinstance(event, AdminRegisterStranger):
        if isinstance(phase, StrangerAlert):
            return Idle(), (lcd("user registered", event.name[:LCD_WIDTH]),)
        return phase, _NOOP

    if isinstance(phase, Idle):
        if isinstance(event, MotionDetected):
            return Recognizing(), (CaptureFrame(), lcd("scanning face", "look at camera"))
        return phase, _NOOP

    if isinstance(phase, Recognizing):
        if isinstance(event, FrameAvailable):
            return Recognizing(frame=event.image), (StartRecognition(config.mode, event.image),)
        if isinstance(event, NoFrame):
            return phase, _NOOP  # keep waiting; door/API can still push a frame
        if isinstance(event, RecognitionDone):
            frame = phase.frame or ""
            if event.outcome == "no_face":
                return Recognizing(), (lcd("no face found", "try again"),)
            accepted = (
                event.outcome == "match"
                and event.confidence is not None
                and event.confidence < config.accept_threshold
            )
            if accepted:
                return (
                    AwaitPin(event.label, 0, now + config.pin_timeout),
                    (lcd("face recognised", "enter pin"), SavePhoto("temp.jpg", frame)),
                )
            return (
                StrangerAlert(photo="stranger.jpg", until=now + config.relock_after),
                (
                    SavePhoto("stranger.jpg", frame),
                    Notify(UnknownUserAlert(photo="stranger.jpg", time=now)),
                    lcd("unknown user", "owner notified"),
                ),
            )
        return phase, _NOOP

    if isinstance(phase, AwaitPin):
        if isinstance(event, (Tick, KeyPressed)) and now > phase.deadline:
            return Recognizing(), (lcd("pin timeout", "try again"),)
        if isinstance(event, KeyPressed):
            key = event.key
            if key == "*":
                return replace(phase, entered=""), (lcd("enter pin", ""),)
            if key == "#":
                ok = phase.entered != "" and pins.get(phase.user_id) == phase.entered
                if ok:
                    return (
                        Unlocked(until=now + config.relock_after),
                        (
                            Buzz("grant"),
                            LockSet(False),
                            Notify(DoorUnlockedAlert(user_id=phase.user_id, time=now)),
                            lcd("door unlocked", phase.user_id[:LCD_WIDTH]),
                        ),
                    )
                attempts = phase.attempts_used + 1
                if attempts < config.max_attempts:
                    return (
                        replace(phase, attempts_used=attempts, entered=""),
                        (Buzz("deny"), lcd("wrong pin", f"attempt {attempts}/{config.max_attempts}")),
                    )
                return Recognizing(), (Buzz("deny"), lcd("too many tries", "face scan again"))
            if key.isdigit() and len(key) == 1:
                if len(phase.entered) >= _PIN_BUFFER_CAP:
                    return phase, _NOOP
                entered = phase.entered + key
                return replace(phase, entered=entered), (lcd("enter pin", "*" * len(entered)),)
            return phase, _NOOP
        return phase, _NOOP

    if isinstance(phase, Unlocked):
        if isinstance(event, Tick) and now > phase.until:
            return Idle(), (LockSet(True), lcd("door locked", ""))
        return phase, _NOOP

    if isinstance(phase, StrangerAlert):
        if isinstance(event, Tick) and now > phase.until:
            return Idle(), (lcd("door locked", ""),)
        if isinstance(event, MotionDetected):
            return Recognizing(), (CaptureFrame(), lcd("scanning face", "look at camera"))
        return phase, _NOOP

    return phase, _NOOP  # unreachable with known phases
