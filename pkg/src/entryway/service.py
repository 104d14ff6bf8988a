"""HTTP/JSON service wrapping one rig + store, consumed by the web console.

Endpoints:
    GET  /state                     phase, lock, LCD lines, mode, latest seq
    POST /door/motion               {} -> motion event
    POST /door/frame                raw binary PGM body -> FrameAvailable
    POST /door/key                  {"key": "7"}
    POST /admin/command             {"text": "unlock"}  (X-Admin-Token header)
    GET  /events?since=<seq>        ordered feed entries with seq > since
    GET  /photos/<name>             stored photo bytes (binary PGM payload)

Every mutation funnels through the rig's event queue under one lock; reads
serve a consistent snapshot. 400 malformed, 401 bad admin token, 409 frame
posted while not recognizing.
"""

from __future__ import annotations

import json
import os
import re
import secrets
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import controller as ctl
from .devices import DoorRig
from .errors import InvalidInput
from .gateway import Dispatcher
from .pgm import decode_pgm

ADMIN_TOKEN_ENV = "ENTRYWAY_ADMIN_TOKEN"

_PHOTO_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".png": "image/png",
}


class ServiceState:
    """Shared state behind the handlers; one lock serializes all mutations."""

    def __init__(self, rig: DoorRig, store, *, admin_token=None, admin_chat_id="admin",
                 clock=None, static_dir=None):
        self.rig = rig
        self.store = store
        self.admin_token = admin_token or os.environ.get(ADMIN_TOKEN_ENV) or secrets.token_hex(8)
        self.admin_chat_id = admin_chat_id
        self.clock = clock if clock is not None else time.monotonic
        self.static_dir = Path(static_dir) if static_dir else None
        self.lock = threading.RLock()
        self._t0 = self.clock()
        self.dispatcher = Dispatcher(rig=rig, store=store, admin_chat_id=admin_chat_id)

    def now(self) -> float:
        return max(self.clock() - self._t0, self.rig.now)

    def pump_clock(self) -> None:
        """Advance the rig with a Tick so deadlines fire lazily."""
        self.rig.inject(self.now(), ctl.Tick())


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, sort_keys=True) + "\n").encode()


def make_handler(state: ServiceState):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        server_version = "entryway"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        # -- helpers ------------------------------------------------------

        def _reply(self, code: int, payload, content_type="application/json") -> None:
            body = _json_bytes(payload) if isinstance(payload, (dict, list)) else payload
            self.send_response(code)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Admin-Token")
            self.end_headers()
            self.wfile.write(body)

        def _error(self, code: int, message: str) -> None:
            self._reply(code, {"error": message})

        def _read_body(self) -> bytes:
            length = int(self.headers.get("Content-Length") or 0)
            return self.rfile.read(length) if length else b""

        def _read_json(self) -> dict:
            raw = self._read_body()
            try:
                doc = json.loads(raw.decode() or "{}")
            except (UnicodeDecodeError, json.JSONDecodeError):
                raise InvalidInput("body is not valid JSON") from None
            if not isinstance(doc, dict):
                raise InvalidInput("JSON body must be an object")
            return doc

        # -- verbs ---------------------------------------------------------

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Admin-Token")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            url = urlparse(self.path)
            if url.path == "/state":
                with state.lock:
                    state.pump_clock()
                    return self._reply(200, state.rig.state_snapshot())
            if url.path == "/events":
                qs = parse_qs(url.query)
                try:
                    since = int(qs.get("since", ["0"])[0])
                except ValueError:
                    return self._error(400, "since must be an integer")
                with state.lock:
                    state.pump_clock()
                    events = state.rig.events_since(since)
                    latest = state.rig.state_snapshot()["latest_seq"]
                return self._reply(200, {"events": events, "latest": latest})
            if url.path.startswith("/photos/"):
                name = url.path[len("/photos/"):]
                if not _PHOTO_NAME_RE.match(name):
                    return self._error(400, "bad photo name")
                with state.lock:
                    data = state.rig.photos.get(name)
                if data is None:
                    return self._error(404, f"no photo {name}")
                return self._reply(200, data, content_type="image/x-portable-graymap")
            if state.static_dir is not None:
                return self._static(url.path)
            return self._error(404, "unknown path")

        def do_POST(self):
            url = urlparse(self.path)
            try:
                if url.path == "/door/motion":
                    self._read_body()
                    with state.lock:
                        state.pump_clock()
                        state.rig.inject(state.now(), ctl.MotionDetected())
                        return self._reply(200, {"ok": True, "state": state.rig.state_snapshot()})
                if url.path == "/door/frame":
                    body = self._read_body()
                    img = decode_pgm(body)
                    with state.lock:
                        state.pump_clock()
                        if not isinstance(state.rig.phase, ctl.Recognizing):
                            return self._error(409, "frames are only accepted while recognizing")
                        ref = state.rig.register_frame(img)
                        state.rig.inject(state.now(), ctl.FrameAvailable(image=ref))
                        return self._reply(
                            200, {"ok": True, "ref": ref, "state": state.rig.state_snapshot()}
                        )
                if url.path == "/door/key":
                    doc = self._read_json()
                    key = doc.get("key")
                    if not isinstance(key, str) or key not in tuple("0123456789*#"):
                        return self._error(400, "key must be one of 0-9 * #")
                    with state.lock:
                        state.pump_clock()
                        state.rig.inject(state.now(), ctl.KeyPressed(key=key))
                        return self._reply(200, {"ok": True, "state": state.rig.state_snapshot()})
                if url.path == "/admin/command":
                    token = self.headers.get("X-Admin-Token", "")
                    if token != state.admin_token:
                        return self._error(401, "bad admin token")
                    doc = self._read_json()
                    text = doc.get("text")
                    if not isinstance(text, str):
                        return self._error(400, "text field required")
                    with state.lock:
                        state.pump_clock()
                        reply = state.dispatcher.dispatch_text(text, state.admin_chat_id)
                        return self._reply(
                            200,
                            {
                                "ok": True,
                                "reply": reply.text,
                                "photo": reply.photo,
                                "state": state.rig.state_snapshot(),
                            },
                        )
                return self._error(404, "unknown path")
            except InvalidInput as exc:
                return self._error(400, str(exc))

        def _static(self, path: str) -> None:
            name = "index.html" if path == "/" else path.lstrip("/")
            target = (state.static_dir / name).resolve()
            if not str(target).startswith(str(state.static_dir.resolve())) or not target.is_file():
                return self._error(404, "unknown path")
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            return self._reply(200, target.read_bytes(), content_type=ctype)

    return Handler


def serve_api(state: ServiceState, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind and return the server; caller runs serve_forever (or a thread)."""
    server = ThreadingHTTPServer((host, port), make_handler(state))
    return server


def run_server(state: ServiceState, host: str, port: int) -> None:
    server = serve_api(state, host, port)
    bound = server.server_address
    print(f"listening on http://{bound[0]}:{bound[1]}", flush=True)
    print(f"admin token: {state.admin_token}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
