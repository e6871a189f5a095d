"""Client-side byte layout of the remote segmentation protocol.

All integers are little-endian. One TCP connection carries one handshake and
then strictly sequential request/response pairs (one in flight at a time):

  handshake   client -> magic "FQS1" + u8 protocol_version(=1)
              server -> magic "FQS1" + u8 accepted_version
  request     u32 width, u32 height, u8 channels(=3), width*height*3 RGB bytes
  response    u8 status, u32 width, u32 height, u8 class_count, then
              width*height class-id bytes (status 0) or a u16 length-prefixed
              UTF-8 message (status != 0)

Statuses: 0 = OK, 1 = model error, 2 = bad request.
"""

from __future__ import annotations

import socket
import struct

from .errors import ProtocolError

MAGIC = b"FQS1"
PROTOCOL_VERSION = 1

STATUS_OK = 0
STATUS_MODEL_ERROR = 1
STATUS_BAD_REQUEST = 2

_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")


def recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining > 0:
        try:
            chunk = sock.recv(remaining)
        except socket.timeout as exc:
            raise ProtocolError(f"timed out waiting for {remaining} bytes") from exc
        except OSError as exc:
            raise ProtocolError(f"connection failed: {exc}") from exc
        if not chunk:
            raise ProtocolError(f"connection closed with {remaining} bytes outstanding")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def handshake_bytes(version: int = PROTOCOL_VERSION) -> bytes:
    return MAGIC + bytes([version])


def do_handshake(sock: socket.socket, version: int = PROTOCOL_VERSION) -> None:
    """Send our magic+version, validate the server's reply."""
    sock.sendall(handshake_bytes(version))
    reply = recv_exact(sock, 5)
    if reply[:4] != MAGIC:
        raise ProtocolError(f"bad magic in handshake reply: {reply[:4]!r}")
    accepted = reply[4]
    if accepted != version:
        raise ProtocolError(
            f"server accepted protocol version {accepted}, client speaks {version}"
        )


def encode_request(width: int, height: int, rgb_bytes: bytes) -> bytes:
    return _U32.pack(width) + _U32.pack(height) + bytes([3]) + rgb_bytes


def read_response(sock: socket.socket) -> tuple[int, int, int, int, bytes, str]:
    """Read one response; returns (status, width, height, class_count, payload, message)."""
    header = recv_exact(sock, 10)
    status = header[0]
    width = _U32.unpack_from(header, 1)[0]
    height = _U32.unpack_from(header, 5)[0]
    class_count = header[9]
    if status == STATUS_OK:
        payload = recv_exact(sock, width * height)
        return status, width, height, class_count, payload, ""
    msg_len = _U16.unpack(recv_exact(sock, 2))[0]
    message = recv_exact(sock, msg_len).decode("utf-8", errors="replace")
    return status, width, height, class_count, b"", message
