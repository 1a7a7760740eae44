"""Scripted echo sidecar for protocol conformance tests.

Speaks the line-delimited JSON reader protocol over stdio.  For each
request it returns one span covering the first ``n`` characters of the
passage (``n`` = min(5, passage length)) with score ``id % 7 + 0.5``,
which lets tests verify id matching end to end.

Flags:
    --shuffle N     buffer N requests and answer them in reverse order,
                    exercising out-of-order response handling
    --fail-after M  exit abruptly after answering M requests
    --delay SEC     sleep before each response

Run: ``python -m odqa.testing.echo_sidecar [flags]``
"""

from __future__ import annotations

import argparse
import json
import os
import select
import sys
import time


def _respond(out, req: dict) -> None:
    passage = req["passage"]
    n = min(5, len(passage))
    spans = []
    if n > 0:
        spans.append({"start": 0, "end": n, "score": req["id"] % 7 + 0.5})
    out.write(json.dumps({"id": req["id"], "spans": spans}) + "\n")
    out.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--shuffle", type=int, default=1)
    parser.add_argument("--fail-after", type=int, default=-1)
    parser.add_argument("--delay", type=float, default=0.0)
    args = parser.parse_args(argv)

    # Read stdin with os.read so select() never lies about buffered
    # lines, and a partially filled shuffle batch can be flushed after
    # a short idle instead of stalling a pipelined sender.
    fd = sys.stdin.fileno()
    out = sys.stdout
    pending = b""
    eof = False

    def read_line(timeout=None):
        nonlocal pending, eof
        while True:
            nl = pending.find(b"\n")
            if nl >= 0:
                line, pending = pending[: nl + 1], pending[nl + 1 :]
                return line.decode("utf-8")
            if eof:
                return ""
            ready, _, _ = select.select([fd], [], [], timeout)
            if not ready:
                return None  # idle
            chunk = os.read(fd, 65536)
            if not chunk:
                eof = True
            pending += chunk

    hello = json.loads(read_line())
    assert hello.get("proto") == 1, f"unexpected handshake: {hello}"
    out.write(json.dumps({"proto": 1}) + "\n")
    out.flush()

    answered = 0
    buffer: list[dict] = []

    def flush_buffer() -> bool:
        nonlocal answered
        for req in reversed(buffer):
            if args.fail_after >= 0 and answered >= args.fail_after:
                return False
            if args.delay:
                time.sleep(args.delay)
            _respond(out, req)
            answered += 1
        buffer.clear()
        return True

    while True:
        line = read_line(timeout=0.05)
        if line is None:
            # No traffic; answer what we have so the sender can proceed.
            if buffer and not flush_buffer():
                return 1
            continue
        if not line:
            break
        if not line.strip():
            continue
        buffer.append(json.loads(line))
        if len(buffer) >= max(1, args.shuffle):
            if not flush_buffer():
                return 1
    if buffer and not flush_buffer():
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
