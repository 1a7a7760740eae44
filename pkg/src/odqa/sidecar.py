"""Client for the external reader sidecar protocol.

Framing: UTF-8 JSON objects, one per line, '\\n' terminated, over a
stream socket or a spawned subprocess's stdio.  Each side sends
``{"proto": 1}`` before the first request.

Request:  ``{"id": int, "question": str, "passage": str,
"max_passage_tokens": 384, "top_spans": int}``
Response: ``{"id": int, "spans": [{"start": int, "end": int,
"score": float}, ...]}`` -- ``start``/``end`` are character offsets
(Unicode scalar values) into the passage, spans sorted by score
descending.

The client multiplexes concurrent requests over one connection:
writes are serialized under a lock, a background thread matches
responses to waiters by id, and out-of-order responses are fine.
Passages longer than the declared capacity are split into overlapping
token chunks and span scores are max-pooled across chunks.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import threading
from typing import Sequence

from odqa.analysis import tokenize_with_offsets
from odqa.corpus import Segment
from odqa.reader import ReaderTransportError, SpanCandidate

PROTO_VERSION = 1
MAX_PASSAGE_TOKENS = 384
CHUNK_STRIDE_TOKENS = 128


class _Pending:
    __slots__ = ("event", "payload", "error")

    def __init__(self):
        self.event = threading.Event()
        self.payload = None
        self.error = None


class SidecarClient:
    """One connection to a sidecar; safe for concurrent request() calls."""

    def __init__(self, read_fh, write_fh, timeout: float = 30.0, on_close=None):
        self._read_fh = read_fh
        self._write_fh = write_fh
        self._timeout = timeout
        self._on_close = on_close
        self._write_lock = threading.Lock()
        self._pending_lock = threading.Lock()
        self._pending: dict[int, _Pending] = {}
        self._next_id = 0
        self._closed = False
        self._handshake()
        self._reader_thread = threading.Thread(target=self._read_loop, daemon=True)
        self._reader_thread.start()

    # -- connection factories ---------------------------------------------

    @classmethod
    def connect(cls, address: str, timeout: float = 30.0) -> "SidecarClient":
        """Connect over TCP to ``host:port``."""
        host, _, port = address.rpartition(":")
        try:
            sock = socket.create_connection((host, int(port)), timeout=timeout)
        except OSError as e:
            raise ReaderTransportError(f"cannot connect to sidecar at {address}: {e}") from e
        sock.settimeout(timeout)
        read_fh = sock.makefile("rb")
        write_fh = sock.makefile("wb")
        return cls(read_fh, write_fh, timeout=timeout, on_close=sock.close)

    @classmethod
    def spawn(cls, command: str | Sequence[str], timeout: float = 30.0) -> "SidecarClient":
        """Spawn a sidecar subprocess and speak the protocol over stdio."""
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        except OSError as e:
            raise ReaderTransportError(f"cannot spawn sidecar {argv!r}: {e}") from e

        def _close():
            proc.terminate()
            proc.wait(timeout=5)

        return cls(proc.stdout, proc.stdin, timeout=timeout, on_close=_close)

    # -- wire --------------------------------------------------------------

    def _send_obj(self, obj: dict) -> None:
        data = (json.dumps(obj, ensure_ascii=False) + "\n").encode("utf-8")
        try:
            with self._write_lock:
                self._write_fh.write(data)
                self._write_fh.flush()
        except (OSError, ValueError) as e:
            raise ReaderTransportError(f"sidecar write failed: {e}") from e

    def _handshake(self) -> None:
        try:
            with self._write_lock:
                self._write_fh.write(
                    (json.dumps({"proto": PROTO_VERSION}) + "\n").encode("utf-8")
                )
                self._write_fh.flush()
            line = self._read_fh.readline()
        except OSError as e:
            raise ReaderTransportError(f"sidecar handshake failed: {e}") from e
        if not line:
            raise ReaderTransportError("sidecar closed connection during handshake")
        try:
            hello = json.loads(line)
        except json.JSONDecodeError as e:
            raise ReaderTransportError(f"bad handshake line: {line!r}") from e
        if hello.get("proto") != PROTO_VERSION:
            raise ReaderTransportError(f"unsupported sidecar protocol: {hello!r}")

    def _read_loop(self) -> None:
        try:
            while True:
                line = self._read_fh.readline()
                if not line:
                    raise ReaderTransportError("sidecar closed the connection")
                try:
                    obj = json.loads(line)
                    rid = obj["id"]
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise ReaderTransportError(f"unparseable response: {line!r}") from e
                with self._pending_lock:
                    waiter = self._pending.pop(rid, None)
                if waiter is None:
                    # Response for an id nobody is waiting on.
                    raise ReaderTransportError(f"unexpected response id {rid}")
                waiter.payload = obj
                waiter.event.set()
        except ReaderTransportError as e:
            self._fail_all(e)
        except Exception as e:  # pragma: no cover - defensive
            self._fail_all(ReaderTransportError(f"sidecar reader crashed: {e}"))

    def _fail_all(self, error: ReaderTransportError) -> None:
        with self._pending_lock:
            self._closed = True
            pending = list(self._pending.values())
            self._pending.clear()
        for waiter in pending:
            waiter.error = error
            waiter.event.set()

    def request(self, question: str, passage: str, top_spans: int) -> list[dict]:
        """Send one request and block for its response's spans."""
        with self._pending_lock:
            if self._closed:
                raise ReaderTransportError("sidecar connection is closed")
            self._next_id += 1
            rid = self._next_id
            waiter = _Pending()
            self._pending[rid] = waiter
        self._send_obj(
            {
                "id": rid,
                "question": question,
                "passage": passage,
                "max_passage_tokens": MAX_PASSAGE_TOKENS,
                "top_spans": top_spans,
            }
        )
        if not waiter.event.wait(self._timeout):
            with self._pending_lock:
                self._pending.pop(rid, None)
            raise ReaderTransportError(f"sidecar response timed out (id {rid})")
        if waiter.error is not None:
            raise waiter.error
        spans = waiter.payload.get("spans")
        if not isinstance(spans, list):
            raise ReaderTransportError(f"malformed spans in response id {rid}")
        for sp in spans:
            if not (
                isinstance(sp, dict)
                and isinstance(sp.get("start"), int)
                and isinstance(sp.get("end"), int)
                and 0 <= sp["start"] < sp["end"] <= len(passage)
            ):
                raise ReaderTransportError(f"invalid span {sp!r} in response id {rid}")
        return spans

    def close(self) -> None:
        self._closed = True
        for fh in (self._write_fh, self._read_fh):
            try:
                fh.close()
            except OSError:
                pass
        if self._on_close is not None:
            try:
                self._on_close()
            except Exception:
                pass


class SidecarReader:
    """Reader backed by a sidecar process or socket, connected lazily.

    ``target`` is either ``"host:port"`` or ``"cmd: <command line>"`` for
    a spawned subprocess.
    """

    kind = "sidecar"

    def __init__(self, target: str, timeout: float = 30.0):
        self._target = target
        self._timeout = timeout
        self._client: SidecarClient | None = None
        self._lock = threading.Lock()

    def _get_client(self) -> SidecarClient:
        with self._lock:
            if self._client is None:
                if self._target.startswith("cmd:"):
                    self._client = SidecarClient.spawn(
                        self._target[4:].strip(), timeout=self._timeout
                    )
                else:
                    self._client = SidecarClient.connect(
                        self._target, timeout=self._timeout
                    )
            return self._client

    def read_spans(
        self, question: str, segment: Segment, top_spans: int
    ) -> list[SpanCandidate]:
        if top_spans < 1:
            raise ValueError("top_spans must be >= 1")
        client = self._get_client()
        passage = segment.text
        tokens = tokenize_with_offsets(passage)

        if len(tokens) <= MAX_PASSAGE_TOKENS:
            chunks = [(0, passage)]
        else:
            chunks = []
            start_tok = 0
            while True:
                end_tok = min(start_tok + MAX_PASSAGE_TOKENS, len(tokens))
                cs = tokens[start_tok].start
                ce = tokens[end_tok - 1].end
                chunks.append((cs, passage[cs:ce]))
                if end_tok >= len(tokens):
                    break
                start_tok += CHUNK_STRIDE_TOKENS

        # Max-pool scores for identical spans across overlapping chunks.
        best: dict[tuple[int, int], float] = {}
        for offset, chunk_text in chunks:
            for sp in client.request(question, chunk_text, top_spans):
                key = (offset + sp["start"], offset + sp["end"])
                score = float(sp["score"])
                if key not in best or score > best[key]:
                    best[key] = score

        ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))[:top_spans]
        return [
            SpanCandidate(
                segment_id=segment.segment_id,
                char_start=cs,
                char_end=ce,
                text=passage[cs:ce],
                reader_score=score,
            )
            for (cs, ce), score in ranked
        ]

    def close(self) -> None:
        with self._lock:
            if self._client is not None:
                self._client.close()
                self._client = None
