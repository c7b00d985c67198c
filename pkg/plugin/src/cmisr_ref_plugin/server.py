"""Single-threaded server loop behind the cmisr-ref-plugin executable.

One process serves one session over stdin/stdout, one request at a time:
handshake first, then length-prefixed frames until a shutdown frame or EOF.
A malformed frame gets exactly one ERROR frame in reply and the loop keeps
going; only conditions that desynchronize the byte stream end the process.

Exit codes:
  0   shutdown frame received, or the client closed the stream at a frame
      boundary (an implicit shutdown)
  1   stream failure mid-session: EOF inside a frame, a declared frame
      length beyond the cap, or a write onto a closed pipe
  2   handshake never completed or did not match
"""

from __future__ import annotations

import argparse
import sys
from typing import BinaryIO

import numpy as np

from .protocol import (
    APPLY_HEADER,
    HANDSHAKE,
    LENGTH,
    MAX_FRAME,
    RESULT_HEADER,
    TYPE_ERROR,
    TYPE_SHUTDOWN,
    TYPE_SR_APPLY,
    TYPE_SR_RESULT,
    TruncatedStreamError,
    encode_error,
    encode_frame,
    read_exact,
)
from .resample import UPSCALERS, upscale

SCALE_RANGE = (1, 4)


def handle_apply(body: bytes, mode: str) -> bytes:
    """Turn one SR_APPLY frame body into a complete reply frame.

    Every validation failure is answered with an ERROR frame rather than an
    exception, so a bad request can never take the session down.
    """
    header_bytes = len(body) - 1
    if header_bytes < APPLY_HEADER.size:
        return encode_error(f"SR_APPLY header truncated ({header_bytes} of {APPLY_HEADER.size} bytes)")
    h, w, c, scale = APPLY_HEADER.unpack_from(body, 1)
    if min(h, w, c) < 1:
        return encode_error(f"zero dimension in {h}x{w}x{c} request")
    lo, hi = SCALE_RANGE
    if not lo <= scale <= hi:
        return encode_error(f"scale {scale} outside {lo}..{hi}")
    samples = h * w * c
    if 1 + APPLY_HEADER.size + 4 * samples > MAX_FRAME:
        return encode_error(f"request {h}x{w}x{c} exceeds the frame cap")
    payload = body[1 + APPLY_HEADER.size:]
    if len(payload) != 4 * samples:
        return encode_error(f"payload holds {len(payload)} bytes, header implies {4 * samples}")
    if 1 + RESULT_HEADER.size + 4 * samples * scale * scale > MAX_FRAME:
        return encode_error(f"result for {h}x{w}x{c} at scale {scale} exceeds the frame cap")
    try:
        x = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(h, w, c)
        y = upscale(x, scale, mode)
    except Exception as exc:  # never crash the session over one request
        return encode_error(f"upscale failed: {exc}")
    out = np.ascontiguousarray(y, dtype="<f4").tobytes()
    head = bytes([TYPE_SR_RESULT]) + RESULT_HEADER.pack(h * scale, w * scale, c)
    return encode_frame(head + out)


def serve(stdin: BinaryIO, stdout: BinaryIO, mode: str) -> int:
    """Run one session on the given binary streams; returns the exit code."""

    def send(frame: bytes) -> bool:
        try:
            stdout.write(frame)
            stdout.flush()
            return True
        except (BrokenPipeError, OSError):
            return False

    try:
        greeting = read_exact(stdin, len(HANDSHAKE))
    except TruncatedStreamError:
        return 2
    if greeting is None:
        return 2
    if greeting != HANDSHAKE:
        send(encode_error(f"bad handshake {greeting!r}, expected {HANDSHAKE!r}"))
        print(f"cmisr-ref-plugin: handshake mismatch, got {greeting!r}", file=sys.stderr)
        return 2
    if not send(HANDSHAKE):
        return 1

    while True:
        try:
            head = read_exact(stdin, LENGTH.size)
            if head is None:
                return 0
            (length,) = LENGTH.unpack(head)
            if length > MAX_FRAME:
                send(encode_error(f"declared frame length {length} exceeds cap {MAX_FRAME}"))
                print(f"cmisr-ref-plugin: unreadable frame length {length}", file=sys.stderr)
                return 1
            body = read_exact(stdin, length) if length else b""
            if length and body is None:
                return 1
        except TruncatedStreamError:
            return 1

        if not body:
            reply = encode_error("frame length 0 carries no type byte")
        else:
            ftype = body[0]
            if ftype == TYPE_SHUTDOWN:
                if len(body) == 1:
                    return 0
                reply = encode_error(f"shutdown frame carries {len(body) - 1} stray bytes")
            elif ftype == TYPE_SR_APPLY:
                reply = handle_apply(body, mode)
            elif ftype == TYPE_ERROR:
                reply = encode_error("ERROR frames flow server to client only")
            else:
                reply = encode_error(f"unknown frame type {ftype}")
        if not send(reply):
            return 1


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="cmisr-ref-plugin",
        description="Reference external upscaler: speaks the length-prefixed "
                    "binary frame protocol on stdin/stdout, one session per process.",
    )
    parser.add_argument("--mode", choices=tuple(UPSCALERS), default="nearest",
                        help="upscaling family served by this process")
    parser.add_argument("--scale", type=int, choices=range(SCALE_RANGE[0], SCALE_RANGE[1] + 1),
                        default=2,
                        help="scale the launcher intends to request; every SR_APPLY "
                             "frame still names its own scale and that is what gets "
                             "served (a fixed-scale model plugin would instead use "
                             "this to pick its weights)")
    args = parser.parse_args(argv)
    try:
        code = serve(sys.stdin.buffer, sys.stdout.buffer, mode=args.mode)
    except KeyboardInterrupt:
        code = 130
    sys.exit(code)


if __name__ == "__main__":
    main()
