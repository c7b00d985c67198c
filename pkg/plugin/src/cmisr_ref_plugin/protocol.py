"""Wire-level constants and framing for the external-upscaler protocol.

Everything on the wire is little-endian:

  handshake   8 bytes: magic "CSR1", u16 version = 1, u16 reserved = 0;
              the server echoes the same 8 bytes before serving frames
  frame       u32 length (bytes that follow), u8 type, type-specific body
  type 1      SR_APPLY: u32 h, u32 w, u32 c, u32 scale, then h*w*c float32
              samples, row-major, channel-interleaved
  type 2      SR_RESULT: u32 out_h, u32 out_w, u32 c, then float32 samples
  type 255    ERROR: u32 byte length, UTF-8 message
  type 0      shutdown: empty body, server exits cleanly

This module is deliberately standalone so the served bytes are pinned here
and nowhere else.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

MAGIC = b"CSR1"
VERSION = 1
HANDSHAKE = MAGIC + struct.pack("<HH", VERSION, 0)

TYPE_SHUTDOWN = 0
TYPE_SR_APPLY = 1
TYPE_SR_RESULT = 2
TYPE_ERROR = 255

LENGTH = struct.Struct("<I")
APPLY_HEADER = struct.Struct("<IIII")  # h, w, c, scale after the type byte
RESULT_HEADER = struct.Struct("<III")  # out_h, out_w, c

MAX_FRAME = 1 << 28  # cap on declared frame lengths, both directions


class TruncatedStreamError(EOFError):
    """The peer closed the stream in the middle of a frame or handshake."""


def read_exact(stream: BinaryIO, n: int) -> bytes | None:
    """Read exactly n bytes.

    Returns None when the stream is already at EOF (a clean boundary) and
    raises TruncatedStreamError when it ends partway through.
    """
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            if not buf:
                return None
            raise TruncatedStreamError(f"stream closed after {len(buf)}/{n} bytes")
        buf += chunk
    return buf


def encode_frame(body: bytes) -> bytes:
    """Prefix a frame body (type byte included) with its u32 length."""
    return LENGTH.pack(len(body)) + body


def encode_error(message: str) -> bytes:
    """Build a complete ERROR frame carrying a UTF-8 message."""
    text = message.encode("utf-8")
    return encode_frame(bytes([TYPE_ERROR]) + LENGTH.pack(len(text)) + text)
