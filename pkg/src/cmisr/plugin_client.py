"""Client side of the external-upscaler wire protocol.

A plugin is a subprocess spoken to over stdin/stdout with length-prefixed
binary frames, one request in flight at a time:

  handshake   8 bytes: magic "CSR1", u16 version = 1, u16 reserved = 0,
              echoed verbatim by the server before any frame
  frame       u32 length (bytes that follow), u8 type, type-specific body
  type 1      SR_APPLY: u32 h, u32 w, u32 c, u32 scale, then h*w*c float32
              samples, row-major, channel-interleaved
  type 2      SR_RESULT: u32 out_h, u32 out_w, u32 c, then float32 samples
  type 255    ERROR: u32 byte length, UTF-8 message
  type 0      shutdown: empty body, server exits cleanly

All integers and floats are little-endian. A session is stateful and owned
by one logical thread; concurrent runs must each spawn their own session.
"""

from __future__ import annotations

import shlex
import struct
import subprocess

import numpy as np

from .errors import PluginError, ProtocolError
from .images import image, validate_image

MAGIC = b"CSR1"
VERSION = 1
HANDSHAKE = MAGIC + struct.pack("<HH", VERSION, 0)

TYPE_SHUTDOWN = 0
TYPE_SR_APPLY = 1
TYPE_SR_RESULT = 2
TYPE_ERROR = 255

_HEADER = struct.Struct("<IIII")  # h, w, c, scale after the type byte
_RESULT_HEADER = struct.Struct("<III")  # out_h, out_w, c

MAX_FRAME = 1 << 28  # safety cap on declared frame lengths


class PluginSession:
    """One live plugin subprocess with the handshake already exchanged."""

    def __init__(self, command: str):
        if not command or not command.strip():
            raise PluginError("empty plugin command")
        self.command = command
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise PluginError(f"cannot launch plugin {command!r}: {exc}") from exc
        try:
            self._write(HANDSHAKE)
            echo = self._read_exact(len(HANDSHAKE))
            if echo != HANDSHAKE:
                raise ProtocolError(f"bad handshake echo: {echo!r}")
        except Exception:
            self.kill()
            raise

    # -- low-level I/O ------------------------------------------------------

    def _write(self, data: bytes) -> None:
        try:
            self._proc.stdin.write(data)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"plugin pipe closed while writing: {exc}") from exc

    def _read_exact(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            chunk = self._proc.stdout.read(n - len(buf))
            if not chunk:
                raise ProtocolError(f"plugin closed stream after {len(buf)}/{n} bytes")
            buf += chunk
        return buf

    def _send_frame(self, body: bytes) -> None:
        self._write(struct.pack("<I", len(body)) + body)

    def _recv_frame(self) -> bytes:
        (length,) = struct.unpack("<I", self._read_exact(4))
        if length < 1 or length > MAX_FRAME:
            raise ProtocolError(f"implausible frame length {length}")
        return self._read_exact(length)

    # -- protocol operations ------------------------------------------------

    def apply(self, img: np.ndarray, scale: int) -> np.ndarray:
        """Send SR_APPLY and return the upscaled image as float64."""
        validate_image(img)
        h, w, c = img.shape
        payload = np.ascontiguousarray(img, dtype="<f4").tobytes()
        body = bytes([TYPE_SR_APPLY]) + _HEADER.pack(h, w, c, scale) + payload
        self._send_frame(body)
        frame = self._recv_frame()
        ftype = frame[0]
        if ftype == TYPE_ERROR:
            if len(frame) < 5:
                raise ProtocolError("truncated ERROR frame")
            (msg_len,) = struct.unpack_from("<I", frame, 1)
            msg = frame[5:5 + msg_len].decode("utf-8", errors="replace")
            raise PluginError(f"plugin error: {msg}")
        if ftype != TYPE_SR_RESULT:
            raise ProtocolError(f"unexpected frame type {ftype}")
        if len(frame) < 1 + _RESULT_HEADER.size:
            raise ProtocolError("truncated SR_RESULT header")
        out_h, out_w, out_c = _RESULT_HEADER.unpack_from(frame, 1)
        expected = (h * scale, w * scale, c)
        if (out_h, out_w, out_c) != expected:
            raise ProtocolError(f"plugin returned {out_h}x{out_w}x{out_c}, "
                                f"expected {expected[0]}x{expected[1]}x{expected[2]}")
        data = frame[1 + _RESULT_HEADER.size:]
        count = out_h * out_w * out_c
        if len(data) != 4 * count:
            raise ProtocolError(f"SR_RESULT payload holds {len(data)} bytes, "
                                f"expected {4 * count}")
        out = np.frombuffer(data, dtype="<f4").astype(np.float64)
        return image(out.reshape(out_h, out_w, out_c), copy=False)

    def shutdown(self) -> None:
        """Send the shutdown frame and wait for a clean exit."""
        if self._proc.poll() is None:
            try:
                self._send_frame(bytes([TYPE_SHUTDOWN]))
                self._proc.stdin.close()
            except ProtocolError:
                pass
            try:
                self._proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.kill()

    def kill(self) -> None:
        if self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()

    def close(self) -> None:
        self.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            if getattr(self, "_proc", None) is not None and self._proc.poll() is None:
                self._proc.kill()
        except Exception:
            pass
