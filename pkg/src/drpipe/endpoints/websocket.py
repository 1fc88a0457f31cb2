"""Minimal RFC 6455 server-side websocket: handshake plus binary frames.

Just enough carrier for one WireFrame per binary message: no extensions,
no compression, fragmentation and ping/pong handled, client frames must
be masked per the RFC.
"""

from __future__ import annotations

import base64
import hashlib
import os
import socket
import struct
import threading

import numpy as np

from ..errors import DrError


def _apply_mask(payload: bytearray, mask: bytes) -> bytearray:
    if len(payload) > 512:
        arr = np.frombuffer(bytes(payload), dtype=np.uint8)
        reps = -(-len(payload) // 4)
        m = np.frombuffer(mask * reps, dtype=np.uint8)[: len(payload)]
        return bytearray((arr ^ m).tobytes())
    for i in range(len(payload)):
        payload[i] ^= mask[i & 3]
    return payload

WS_GUID = b"258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA

_MAX_HEADER = 64 * 1024
_MAX_MESSAGE = 80 * 1024 * 1024


class WebSocketError(DrError):
    pass


def _read_until(sock: socket.socket, marker: bytes, limit: int) -> bytes:
    buf = bytearray()
    while marker not in buf:
        if len(buf) > limit:
            raise WebSocketError("handshake header too large")
        chunk = sock.recv(4096)
        if not chunk:
            raise WebSocketError("connection closed during handshake")
        buf.extend(chunk)
    return bytes(buf)


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1(client_key.strip().encode("ascii") + WS_GUID).digest()
    return base64.b64encode(digest).decode("ascii")


def server_handshake(sock: socket.socket) -> str:
    """Upgrade an accepted TCP socket; returns the requested path."""
    raw = _read_until(sock, b"\r\n\r\n", _MAX_HEADER)
    head = raw.split(b"\r\n\r\n", 1)[0].decode("latin-1")
    lines = head.split("\r\n")
    parts = lines[0].split(" ")
    if len(parts) < 3 or parts[0] != "GET":
        raise WebSocketError(f"bad request line {lines[0]!r}")
    path = parts[1]
    headers = {}
    for line in lines[1:]:
        if ":" in line:
            k, v = line.split(":", 1)
            headers[k.strip().lower()] = v.strip()
    if headers.get("upgrade", "").lower() != "websocket":
        raise WebSocketError("not a websocket upgrade")
    key = headers.get("sec-websocket-key")
    if not key:
        raise WebSocketError("missing Sec-WebSocket-Key")
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    )
    sock.sendall(response.encode("ascii"))
    return path


def client_handshake(sock: socket.socket, host: str, path: str = "/") -> None:
    """Upgrade an outbound TCP socket (used by tests; browsers bring their own)."""
    key = base64.b64encode(os.urandom(16)).decode("ascii")
    request = (
        f"GET {path} HTTP/1.1\r\n"
        f"Host: {host}\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\n"
        "Sec-WebSocket-Version: 13\r\n"
        "\r\n"
    )
    sock.sendall(request.encode("ascii"))
    raw = _read_until(sock, b"\r\n\r\n", _MAX_HEADER)
    head = raw.split(b"\r\n\r\n", 1)[0].decode("latin-1")
    if " 101 " not in head.split("\r\n")[0]:
        raise WebSocketError(f"upgrade refused: {head.splitlines()[0]}")
    expected = accept_key(key)
    for line in head.split("\r\n")[1:]:
        if line.lower().startswith("sec-websocket-accept:"):
            if line.split(":", 1)[1].strip() != expected:
                raise WebSocketError("bad Sec-WebSocket-Accept")
            return
    raise WebSocketError("missing Sec-WebSocket-Accept")


class WebSocketConnection:
    """One upgraded connection; concurrent sends are serialized.

    Servers send unmasked frames and require masked ones; clients
    (mask_outbound=True) do the reverse.
    """

    def __init__(self, sock: socket.socket, mask_outbound: bool = False):
        self.sock = sock
        self.mask_outbound = mask_outbound
        self._send_lock = threading.Lock()
        self._closed = False

    def _read_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                raise WebSocketError("connection closed mid-frame")
            buf.extend(chunk)
        return bytes(buf)

    def _read_frame(self):
        b0, b1 = self._read_exact(2)
        fin = bool(b0 & 0x80)
        opcode = b0 & 0x0F
        masked = bool(b1 & 0x80)
        length = b1 & 0x7F
        if length == 126:
            (length,) = struct.unpack(">H", self._read_exact(2))
        elif length == 127:
            (length,) = struct.unpack(">Q", self._read_exact(8))
        if length > _MAX_MESSAGE:
            raise WebSocketError(f"frame of {length} bytes exceeds limit")
        if masked:
            mask = self._read_exact(4)
            payload = _apply_mask(bytearray(self._read_exact(length)), mask)
        else:
            if not self.mask_outbound:
                raise WebSocketError("client frames must be masked")
            payload = self._read_exact(length)
        return fin, opcode, bytes(payload)

    def recv_message(self) -> bytes | None:
        """Next binary/text message payload; None once the peer closes."""
        fragments: list[bytes] = []
        frag_opcode = None
        while True:
            try:
                fin, opcode, payload = self._read_frame()
            except (OSError, WebSocketError):
                return None
            if opcode == OP_CLOSE:
                self._send_raw(OP_CLOSE, payload[:125])
                return None
            if opcode == OP_PING:
                self._send_raw(OP_PONG, payload)
                continue
            if opcode == OP_PONG:
                continue
            if opcode in (OP_BINARY, OP_TEXT):
                if fragments:
                    raise WebSocketError("new message while fragments pending")
                if fin:
                    return payload
                fragments = [payload]
                frag_opcode = opcode
            elif opcode == OP_CONT:
                if not fragments:
                    raise WebSocketError("continuation without a start frame")
                fragments.append(payload)
                if fin:
                    return b"".join(fragments)
            else:
                raise WebSocketError(f"unsupported opcode {opcode:#x}")

    def _send_raw(self, opcode: int, payload: bytes) -> None:
        header = bytearray([0x80 | opcode])
        n = len(payload)
        mask_bit = 0x80 if self.mask_outbound else 0x00
        if n < 126:
            header.append(mask_bit | n)
        elif n < 1 << 16:
            header.append(mask_bit | 126)
            header += struct.pack(">H", n)
        else:
            header.append(mask_bit | 127)
            header += struct.pack(">Q", n)
        if self.mask_outbound:
            mask = os.urandom(4)
            header += mask
            payload = bytes(_apply_mask(bytearray(payload), mask))
        with self._send_lock:
            if self._closed:
                raise WebSocketError("connection closed")
            self.sock.sendall(bytes(header) + payload)

    def send_binary(self, payload: bytes) -> None:
        self._send_raw(OP_BINARY, payload)

    def close(self, code: int = 1000) -> None:
        if not self._closed:
            try:
                self._send_raw(OP_CLOSE, struct.pack(">H", code))
            except (OSError, WebSocketError):
                pass
            self._closed = True
        try:
            self.sock.close()
        except OSError:
            pass
