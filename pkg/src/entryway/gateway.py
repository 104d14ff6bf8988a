"""Chat command gateway: bot grammar, dispatch, and outbound notifications.

Commands (case-insensitive keywords, arguments verbatim)::

    capture                photograph the door camera and send the photo
    unlock / lock          override the door lock
    mode1 / mode2          select full-face / occluded recognition
    adduser_<name>         register a user and start enrollment
    change_<user>_<pin>    set a user's 4-digit PIN
    showpassword           list user:pin pairs

Transport is abstracted. The in-memory FIFO transport is the tested
reference; a live long-poll adapter (Telegram-style bot HTTP API) has the
shape: repeatedly GET getUpdates?offset=<last_update_id+1>&timeout=<s> and
map each update's message text through ``parse_command``; replies go out as
POST sendMessage (chat_id, text) and photos as multipart POST sendPhoto
(chat_id, caption, photo bytes). Only the offset bookkeeping is stateful.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field

from . import controller as ctl
from .errors import EntrywayError, InvalidInput
from .lbph import Mode

log = logging.getLogger(__name__)


# -- command grammar -------------------------------------------------------------


@dataclass(frozen=True)
class Capture:
    pass


@dataclass(frozen=True)
class Unlock:
    pass


@dataclass(frozen=True)
class Lock:
    pass


@dataclass(frozen=True)
class Mode1:
    pass


@dataclass(frozen=True)
class Mode2:
    pass


@dataclass(frozen=True)
class ShowPassword:
    pass


@dataclass(frozen=True)
class AddUser:
    name: str


@dataclass(frozen=True)
class ChangePin:
    user_id: str
    pin: str


BotCommand = Capture | Unlock | Lock | Mode1 | Mode2 | ShowPassword | AddUser | ChangePin


class CommandError(InvalidInput):
    pass


HELP_TEXT = (
    "commands: capture | unlock | lock | mode1 | mode2 | "
    "adduser_<name> | change_<user>_<4 digits> | showpassword"
)

_KEYWORDS = {
    "capture": Capture(),
    "unlock": Unlock(),
    "lock": Lock(),
    "mode1": Mode1(),
    "mode2": Mode2(),
    "showpassword": ShowPassword(),
}
_PIN_RE = re.compile(r"^[0-9]{4}$")


def parse_command(text: str) -> BotCommand:
    """Parse one chat message into a command; raises CommandError with help."""
    if not isinstance(text, str):
        raise CommandError(f"not a text command. {HELP_TEXT}")
    stripped = text.strip()
    lowered = stripped.lower()
    if lowered in _KEYWORDS:
        return _KEYWORDS[lowered]
    if lowered.startswith("adduser_"):
        name = stripped[len("adduser_"):]
        if not name or any(c.isspace() for c in name):
            raise CommandError(f"adduser_<name>: name must be nonempty, no spaces. {HELP_TEXT}")
        return AddUser(name=name)
    if lowered.startswith("change_"):
        rest = stripped[len("change_"):]
        user, sep, pin = rest.rpartition("_")
        if not sep or not user or any(c.isspace() for c in user):
            raise CommandError(f"change_<user>_<pin>: malformed. {HELP_TEXT}")
        if not _PIN_RE.match(pin):
            raise CommandError(f"change_<user>_<pin>: pin must be 4 digits. {HELP_TEXT}")
        return ChangePin(user_id=user, pin=pin)
    raise CommandError(f"unknown command {stripped[:40]!r}. {HELP_TEXT}")


def render_command(cmd: BotCommand) -> str:
    """Canonical command string; parse_command(render_command(c)) == c."""
    if isinstance(cmd, AddUser):
        return f"adduser_{cmd.name}"
    if isinstance(cmd, ChangePin):
        return f"change_{cmd.user_id}_{cmd.pin}"
    for keyword, value in _KEYWORDS.items():
        if cmd == value:
            return keyword
    raise InvalidInput(f"not a command: {cmd!r}")


# -- chat plumbing ---------------------------------------------------------------


@dataclass(frozen=True)
class ChatMessage:
    chat_id: str
    text: str
    photo: str | None = None  # photo-store name; raw bytes travel in the adapter
    timestamp: float = 0.0

    def __post_init__(self):
        if self.photo is not None and not self.text:
            raise InvalidInput("photo messages must carry caption text")


class TransportError(EntrywayError):
    pass


class InMemoryTransport:
    """FIFO transport for tests and the desk console."""

    def __init__(self):
        self.outbox: deque[ChatMessage] = deque()
        self.inbox: deque[ChatMessage] = deque()

    def send(self, message: ChatMessage) -> None:
        self.outbox.append(message)

    def push_inbound(self, message: ChatMessage) -> None:
        self.inbox.append(message)

    def poll(self) -> list[ChatMessage]:
        drained = list(self.inbox)
        self.inbox.clear()
        return drained


def render_notification(n: ctl.Notification, chat_id: str, now: float = 0.0) -> ChatMessage:
    if isinstance(n, ctl.UnknownUserAlert):
        return ChatMessage(
            chat_id=chat_id,
            text=f"unknown person at the door ({n.time:.0f}s); photo attached",
            photo=n.photo,
            timestamp=now,
        )
    if isinstance(n, ctl.DoorUnlockedAlert):
        return ChatMessage(
            chat_id=chat_id,
            text=f"{n.user_id} unlocked the door ({n.time:.0f}s)",
            timestamp=now,
        )
    if isinstance(n, ctl.EnrollmentDoneAlert):
        return ChatMessage(
            chat_id=chat_id,
            text=f"enrollment finished for {n.user_id}: {n.frames} frames",
            timestamp=now,
        )
    return ChatMessage(chat_id=chat_id, text=n.text, timestamp=now)


def notify(
    n: ctl.Notification,
    transport,
    *,
    admin_chat_id: str,
    now: float = 0.0,
    retries: int = 3,
    backoff: float = 0.2,
    sleep=time.sleep,
) -> ChatMessage | None:
    """Send a notification; up to ``retries`` attempts, then drop with a log.

    Never raises: a dead transport must not stall the door loop.
    """
    message = render_notification(n, admin_chat_id, now)
    for attempt in range(1, retries + 1):
        try:
            transport.send(message)
            return message
        except Exception as exc:
            if attempt == retries:
                log.warning("notification dropped after %d attempts: %s", retries, exc)
                return None
            sleep(backoff * attempt)
    return None


class NotificationPump:
    """Bounded queue between the door loop and a chat transport.

    ``offer`` never blocks and never raises, so the controller keeps moving
    whatever the transport is doing; a full queue drops the newest alert with
    a log line. One consumer calls ``drain`` (directly, or via the background
    thread that ``start`` spins up).
    """

    def __init__(self, transport, *, admin_chat_id: str, capacity: int = 64,
                 retries: int = 3, backoff: float = 0.2, sleep=time.sleep):
        self.transport = transport
        self.admin_chat_id = admin_chat_id
        self.capacity = capacity
        self.retries = retries
        self.backoff = backoff
        self.sleep = sleep
        self.dropped = 0
        self._queue: deque[ctl.Notification] = deque()
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._worker: threading.Thread | None = None

    def offer(self, n: ctl.Notification) -> bool:
        with self._lock:
            if len(self._queue) >= self.capacity:
                self.dropped += 1
                log.warning("notification queue full (%d); dropping %s", self.capacity, type(n).__name__)
                return False
            self._queue.append(n)
            return True

    def drain(self, now: float = 0.0) -> int:
        """Deliver everything queued, FIFO; returns how many sends succeeded."""
        delivered = 0
        while True:
            with self._lock:
                if not self._queue:
                    return delivered
                n = self._queue.popleft()
            if notify(n, self.transport, admin_chat_id=self.admin_chat_id, now=now,
                      retries=self.retries, backoff=self.backoff, sleep=self.sleep) is not None:
                delivered += 1

    def start(self, interval: float = 0.2) -> None:
        if self._worker is not None:
            return
        self._stop.clear()

        def loop():
            while not self._stop.is_set():
                self.drain()
                self._stop.wait(interval)
            self.drain()

        self._worker = threading.Thread(target=loop, name="notification-pump", daemon=True)
        self._worker.start()

    def stop(self) -> None:
        if self._worker is None:
            return
        self._stop.set()
        self._worker.join(timeout=5)
        self._worker = None


# -- dispatch --------------------------------------------------------------------


@dataclass
class Dispatcher:
    """Executes authorized commands against the rig and the user store."""

    rig: object
    store: object
    admin_chat_id: str
    enrollment_target: int = field(default=150)

    def dispatch(self, command: BotCommand, chat_id: str) -> ChatMessage:
        if chat_id != self.admin_chat_id:
            return ChatMessage(chat_id=chat_id, text="not authorized")
        reply = self._run(command)
        return ChatMessage(chat_id=chat_id, text=reply[0], photo=reply[1])

    def dispatch_text(self, text: str, chat_id: str) -> ChatMessage:
        try:
            command = parse_command(text)
        except CommandError as exc:
            return ChatMessage(chat_id=chat_id, text=str(exc))
        return self.dispatch(command, chat_id)

    def _run(self, command: BotCommand) -> tuple[str, str | None]:
        rig, store = self.rig, self.store
        now = rig.now
        try:
            if isinstance(command, Unlock):
                rig.inject(now, ctl.AdminUnlock())
                return "door unlocked", None
            if isinstance(command, Lock):
                rig.inject(now, ctl.AdminLock())
                return "door locked", None
            if isinstance(command, Mode1):
                rig.inject(now, ctl.AdminSetMode(Mode.FULL_FACE))
                return "mode 1: full-face recognition", None
            if isinstance(command, Mode2):
                rig.inject(now, ctl.AdminSetMode(Mode.OCCLUDED))
                return "mode 2: occluded-face recognition", None
            if isinstance(command, Capture):
                name = rig.capture_photo()
                if name is None:
                    return "no frame available to capture", None
                return f"captured {name}", name
            if isinstance(command, AddUser):
                store.add_user(command.name)
                return (
                    f"user {command.name} added; enroll "
                    f"{self.enrollment_target} frames to finish registration",
                    None,
                )
            if isinstance(command, ChangePin):
                store.set_pin(command.user_id, command.pin)
                rig.pins[command.user_id] = command.pin
                return f"pin updated for {command.user_id}", None
            if isinstance(command, ShowPassword):
                rows = [
                    f"{uid}: {rec.pin if rec.pin is not None else '(unset)'}"
                    for uid, rec in sorted(store.users.items())
                ]
                return "\n".join(rows) if rows else "no users registered", None
        except EntrywayError as exc:
            return f"error: {exc}", None
        raise InvalidInput(f"unhandled command {command!r}")  # pragma: no cover
