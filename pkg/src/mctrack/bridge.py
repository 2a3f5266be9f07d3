"""Client side of the external-observer wire protocol.

The backend is a child process speaking newline-delimited JSON over its
stdin/stdout, one message per line, UTF-8:

  -> {"type":"init","proto":1,"width":W,"height":H,"prompt_box":[cx,cy,w,h],"sequence":"<id>"}
  <- {"type":"ready","proto":1}
  -> {"type":"frame","index":t,"image":"<path, optional>","memory_admit_prev":true|false}
  <- {"type":"candidates","index":t,"candidates":[...]}
  -> {"type":"close"}
  <- {"type":"done"}

Unknown fields are ignored; any other deviation raises ProtocolError. The
client never reorders or drops frames: request indices increase by one.
"""

from __future__ import annotations

import json
import logging
import queue
import shlex
import subprocess
import threading

from .geometry import BoundingBox
from .observer import ObserverFrame, frame_from_wire

logger = logging.getLogger(__name__)

PROTO_VERSION = 1


class ProtocolError(RuntimeError):
    """The peer sent something outside the wire schema."""


class BridgeClosedError(RuntimeError):
    """The peer closed its stream before answering."""


class BridgeTimeoutError(RuntimeError):
    """No response within the configured deadline."""


class BridgeObserver:
    """Observer backed by a subprocess; exclusively owned by one run."""

    def __init__(
        self,
        command: str | list[str],
        width: int,
        height: int,
        prompt_box: BoundingBox,
        sequence: str = "",
        timeout: float = 30.0,
    ):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._next_index = 0
        self._closed = False
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._send(
            {
                "type": "init",
                "proto": PROTO_VERSION,
                "width": width,
                "height": height,
                "prompt_box": [prompt_box.cx, prompt_box.cy, prompt_box.w, prompt_box.h],
                "sequence": sequence,
            }
        )
        ready = self._recv_obj()
        if ready.get("type") != "ready" or ready.get("proto") != PROTO_VERSION:
            raise ProtocolError(f"expected ready/proto={PROTO_VERSION}, got {ready!r}")

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _send(self, obj: dict) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(obj) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeClosedError("backend pipe closed while sending") from exc

    def _recv_obj(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise BridgeTimeoutError(f"no response within {self.timeout}s") from None
        if line is None:
            raise BridgeClosedError("backend closed its output stream")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"backend sent non-JSON line: {line!r}") from exc
        if not isinstance(obj, dict):
            raise ProtocolError(f"backend message must be an object, got {obj!r}")
        return obj

    def observe(self, frame_index: int, memory_admit_prev: bool = False) -> ObserverFrame:
        if self._closed:
            raise BridgeClosedError("observer already closed")
        if frame_index != self._next_index:
            raise ValueError(f"bridge frames must be requested in order; expected {self._next_index}")
        self._send(
            {"type": "frame", "index": frame_index, "memory_admit_prev": bool(memory_admit_prev)}
        )
        obj = self._recv_obj()
        if obj.get("type") != "candidates":
            raise ProtocolError(f"expected candidates message, got {obj.get('type')!r}")
        if obj.get("index") != frame_index:
            raise ProtocolError(
                f"response index {obj.get('index')!r} does not echo request {frame_index}"
            )
        try:
            frame = frame_from_wire(obj.get("candidates"), frame_index)
        except ValueError as exc:
            raise ProtocolError(str(exc)) from exc
        self._next_index += 1
        return frame

    def close(self) -> None:
        """Best-effort close handshake, then reap the child."""
        if self._closed:
            return
        self._closed = True
        try:
            self._send({"type": "close"})
            done = self._recv_obj()
            if done.get("type") != "done":
                logger.warning("backend answered close with %r", done)
        except (BridgeClosedError, BridgeTimeoutError, ProtocolError) as exc:
            logger.debug("close handshake incomplete: %s", exc)
        try:
            self._proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._reader.join(timeout=1.0)

    @property
    def returncode(self) -> int | None:
        return self._proc.returncode

    def __enter__(self) -> "BridgeObserver":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
