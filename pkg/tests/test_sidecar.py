import sys
import threading

import pytest

from odqa.corpus import Granularity, Segment
from odqa.reader import ReaderTransportError
from odqa.sidecar import MAX_PASSAGE_TOKENS, SidecarClient, SidecarReader

ECHO = [sys.executable, "-m", "odqa.testing.echo_sidecar"]


def _seg(text, sid="a1:paragraph:0"):
    return Segment(
        segment_id=sid,
        article_id="a1",
        granularity=Granularity.PARAGRAPH,
        text=text,
        char_start=0,
        char_end=len(text),
    )


@pytest.fixture
def echo_client():
    client = SidecarClient.spawn(ECHO, timeout=10.0)
    yield client
    client.close()


class TestProtocol:
    def test_roundtrip(self, echo_client):
        spans = echo_client.request("q?", "Hello world passage", top_spans=1)
        assert spans == [{"start": 0, "end": 5, "score": pytest.approx(1.5)}]

    def test_id_matching_sequential(self, echo_client):
        for i in range(20):
            passage = f"passage number {i} content"
            spans = echo_client.request("q?", passage, top_spans=1)
            assert spans[0]["start"] == 0 and spans[0]["end"] == 5

    def test_out_of_order_responses(self):
        client = SidecarClient.spawn(ECHO + ["--shuffle", "4"], timeout=10.0)
        try:
            results = {}
            errors = []

            def worker(n):
                try:
                    results[n] = client.request("q?", f"payload {n} here", 1)
                except Exception as e:  # pragma: no cover
                    errors.append(e)

            threads = [threading.Thread(target=worker, args=(n,)) for n in range(8)]
            for t in threads:
                t.start()
            for t in threads:
                t.join(timeout=10)
            assert not errors
            assert len(results) == 8
            # Echo score is id % 7 + 0.5, so scores prove ids were matched.
            scores = {r[0]["score"] for r in results.values()}
            assert scores == {i % 7 + 0.5 for i in range(1, 9)}
        finally:
            client.close()

    def test_transport_error_on_dead_sidecar(self):
        client = SidecarClient.spawn(ECHO + ["--fail-after", "2"], timeout=5.0)
        try:
            client.request("q?", "first passage", 1)
            client.request("q?", "second passage", 1)
            with pytest.raises(ReaderTransportError):
                client.request("q?", "third passage", 1)
        finally:
            client.close()

    def test_connect_refused(self):
        with pytest.raises(ReaderTransportError):
            SidecarClient.connect("127.0.0.1:1", timeout=2.0)


class TestSidecarReader:
    def test_span_candidate_from_echo(self):
        reader = SidecarReader("cmd: " + " ".join(ECHO), timeout=10.0)
        try:
            seg = _seg("Hello world this is a passage.")
            spans = reader.read_spans("anything?", seg, top_spans=1)
            assert len(spans) == 1
            assert spans[0].text == seg.text[:5] == "Hello"
            assert spans[0].segment_id == seg.segment_id
        finally:
            reader.close()

    def test_long_passage_chunked(self):
        reader = SidecarReader("cmd: " + " ".join(ECHO), timeout=10.0)
        try:
            text = " ".join(f"word{i}" for i in range(MAX_PASSAGE_TOKENS * 2))
            seg = _seg(text)
            spans = reader.read_spans("q?", seg, top_spans=3)
            assert spans
            for c in spans:
                assert seg.text[c.char_start : c.char_end] == c.text
        finally:
            reader.close()

    def test_lazy_connection_failure(self):
        reader = SidecarReader("127.0.0.1:1", timeout=2.0)
        with pytest.raises(ReaderTransportError):
            reader.read_spans("q?", _seg("some passage"), 1)
