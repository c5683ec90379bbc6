import json

import pytest

from logprob_adapter import AdapterError, ByteBpe


class TestEncode:
    def test_merges_apply_in_rank_order(self, tok):
        # "the" -> t+h first (rank 0), then th+e (rank 1): one token.
        ids = tok.encode(b"the")
        assert len(ids) == 1
        assert ids[0] == tok.vocab["the"]

    def test_unmerged_bytes_pass_through(self, tok):
        ids = tok.encode(b"xyz")
        assert len(ids) == 3

    def test_empty(self, tok):
        assert tok.encode(b"") == []

    def test_arbitrary_bytes(self, tok):
        assert len(tok.encode(bytes(range(256)))) > 0

    def test_deterministic(self, tok):
        data = b"the thin anthem in another thicket"
        assert tok.encode(data) == tok.encode(data)


class TestLoading:
    def test_vocab_size(self, tok):
        assert tok.vocab_size == 260

    def test_digest_shape(self, tok):
        digest = tok.digest()
        assert len(digest) == 16
        assert all(c in "0123456789abcdef" for c in digest)

    def test_rejects_non_byte_level(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"vocab": {"a": 0}, "merges": [], "byte_level": False}))
        with pytest.raises(AdapterError, match="byte-level"):
            ByteBpe.from_file(path)

    def test_rejects_missing_vocab(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"merges": []}))
        with pytest.raises(AdapterError, match="vocab"):
            ByteBpe.from_file(path)

    def test_rejects_dangling_merge(self):
        with pytest.raises(AdapterError, match="missing"):
            ByteBpe({"a": 0, "b": 1}, [("a", "b")])
