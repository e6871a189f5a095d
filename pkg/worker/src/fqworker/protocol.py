"""Server-side framing of the segmentation wire protocol.

All integers little-endian. Per connection: one handshake, then sequential
request/response pairs.

  handshake   client -> magic "FQS1" + u8 protocol_version
              server -> magic "FQS1" + u8 accepted_version (always 1)
  request     u32 width, u32 height, u8 channels(=3), width*height*3 RGB bytes
  response    u8 status, u32 width, u32 height, u8 class_count, then
              width*height class-id bytes (status 0) or u16 length-prefixed
              UTF-8 message (status 1 = model error, 2 = bad request)
"""

from __future__ import annotations

import socket
import struct

import numpy as np

MAGIC = b"FQS1"
ACCEPTED_VERSION = 1

STATUS_OK = 0
STATUS_MODEL_ERROR = 1
STATUS_BAD_REQUEST = 2

MAX_SIDE = 65535
MAX_PIXELS = 1 << 26  # 64 Mpx, ~192 MB request payload

_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")


class Disconnect(Exception):
    """Peer went away cleanly or mid-message."""


class BadRequest(Exception):
    """Malformed request; answer status 2 and drop the connection."""


def recv_exact(conn: socket.socket, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = conn.recv(remaining)
        if not chunk:
            raise Disconnect(f"peer closed with {remaining} bytes outstanding")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_handshake(conn: socket.socket) -> int:
    """Validate the client's magic; reply with ours. Returns the client version."""
    greeting = recv_exact(conn, 5)
    if greeting[:4] != MAGIC:
        raise Disconnect(f"bad magic {greeting[:4]!r}")
    conn.sendall(MAGIC + bytes([ACCEPTED_VERSION]))
    return greeting[4]


def read_request(conn: socket.socket) -> np.ndarray:
    """Read one frame request; returns (height, width, 3) uint8 RGB."""
    header = recv_exact(conn, 9)
    width = _U32.unpack_from(header, 0)[0]
    height = _U32.unpack_from(header, 4)[0]
    channels = header[8]
    if channels != 3:
        raise BadRequest(f"unsupported channel count {channels}, expected 3")
    if width == 0 or height == 0:
        raise BadRequest(f"degenerate frame {width}x{height}")
    if width > MAX_SIDE or height > MAX_SIDE or width * height > MAX_PIXELS:
        raise BadRequest(f"frame {width}x{height} exceeds worker limits")
    payload = recv_exact(conn, width * height * 3)
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)


def send_mask(conn: socket.socket, labels: np.ndarray, class_count: int) -> None:
    height, width = labels.shape
    header = bytes([STATUS_OK]) + _U32.pack(width) + _U32.pack(height) + bytes([class_count])
    conn.sendall(header + labels.tobytes())


def send_error(conn: socket.socket, status: int, message: str) -> None:
    body = message.encode("utf-8")[:65535]
    header = bytes([status]) + _U32.pack(0) + _U32.pack(0) + bytes([0])
    conn.sendall(header + _U16.pack(len(body)) + body)
