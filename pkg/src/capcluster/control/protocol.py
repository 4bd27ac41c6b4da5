"""Newline-delimited JSON message protocol between agents and the manager.

One JSON object per line: {"type": ..., "seq": N, "payload": {...}} plus an
optional "reply_to" that pairs an Ack/Error with the command it answers.
Sequence numbers count per sender per connection and must strictly increase;
a violation kills the connection rather than risking reordered commands.
"""

from __future__ import annotations

import json
import socket
import threading
from dataclasses import dataclass, field
from enum import Enum


class MessageType(str, Enum):
    REGISTER = "Register"
    HEARTBEAT = "Heartbeat"
    START_APP = "StartApp"
    STOP_APP = "StopApp"
    APP_STATUS = "AppStatus"
    METRIC_BATCH = "MetricBatch"
    ACK = "Ack"
    ERROR = "Error"


class ProtocolError(Exception):
    pass


@dataclass(frozen=True)
class ProtocolMessage:
    type: MessageType
    seq: int
    payload: dict = field(default_factory=dict)
    reply_to: int | None = None

    def to_line(self) -> bytes:
        doc = {"type": self.type.value, "seq": self.seq, "payload": self.payload}
        if self.reply_to is not None:
            doc["reply_to"] = self.reply_to
        return (json.dumps(doc, separators=(",", ":")) + "\n").encode()

    @staticmethod
    def from_line(line: bytes) -> "ProtocolMessage":
        try:
            doc = json.loads(line)
            return ProtocolMessage(
                type=MessageType(doc["type"]),
                seq=int(doc["seq"]),
                payload=doc.get("payload", {}),
                reply_to=doc.get("reply_to"),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed message: {exc}") from exc


class LineConnection:
    """Full-duplex framed connection. Writes are serialized; reads enforce
    the strictly-increasing inbound sequence rule."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._wlock = threading.Lock()
        self._rbuf = b""
        self._out_seq = 0
        self._last_in_seq = 0
        self.closed = False

    def send(self, type_: MessageType, payload: dict | None = None,
             reply_to: int | None = None) -> int:
        with self._wlock:
            self._out_seq += 1
            msg = ProtocolMessage(type_, self._out_seq, payload or {}, reply_to)
            try:
                self._sock.sendall(msg.to_line())
            except OSError as exc:
                self.closed = True
                raise ProtocolError(f"send failed: {exc}") from exc
            return msg.seq

    def recv(self) -> ProtocolMessage | None:
        """Next message, or None once the peer closes."""
        while b"\n" not in self._rbuf:
            try:
                chunk = self._sock.recv(65536)
            except OSError:
                self.closed = True
                return None
            if not chunk:
                self.closed = True
                return None
            self._rbuf += chunk
        line, self._rbuf = self._rbuf.split(b"\n", 1)
        msg = ProtocolMessage.from_line(line)
        if msg.seq <= self._last_in_seq:
            raise ProtocolError(
                f"sequence regression: got {msg.seq} after {self._last_in_seq}"
            )
        self._last_in_seq = msg.seq
        return msg

    def messages(self):
        while True:
            msg = self.recv()
            if msg is None:
                return
            yield msg

    def close(self) -> None:
        self.closed = True
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
