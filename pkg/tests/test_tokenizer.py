import json

import pytest
from hypothesis import given, settings, strategies as st

from infocap.errors import CoverageError, DomainError, ParseError
from infocap.tokenizer import (
    BYTE_TO_CHAR,
    TokenSpan,
    TokenizerDef,
    bits_per_token,
    decode,
    dump_tokenizer,
    encode,
    load_tokenizer,
    load_tokenizer_file,
    load_tokenizer_files,
    spans_for_ids,
    tokenizer_digest,
)
from .conftest import BYTE_VOCAB


class TestLoading:
    def test_byte_vocab_no_merges(self):
        tok = TokenizerDef(vocab=dict(BYTE_VOCAB), merges=())
        assert tok.vocab_size == 256

    def test_merge_closure_ok(self):
        vocab = dict(BYTE_VOCAB)
        vocab["th"] = 256
        tok = TokenizerDef(vocab=vocab, merges=(("t", "h"),))
        assert tok.vocab_size == 257

    def test_merge_product_missing(self):
        with pytest.raises(ParseError, match="product"):
            TokenizerDef(vocab=dict(BYTE_VOCAB), merges=(("t", "h"),))

    def test_merge_side_missing(self):
        with pytest.raises(ParseError, match="left"):
            TokenizerDef(vocab=dict(BYTE_VOCAB), merges=(("zz", "q"),))
        with pytest.raises(ParseError, match="right"):
            TokenizerDef(vocab=dict(BYTE_VOCAB), merges=(("q", "zz"),))

    def test_duplicate_ids(self):
        vocab = dict(BYTE_VOCAB)
        vocab["th"] = 3
        with pytest.raises(ParseError, match="duplicate"):
            TokenizerDef(vocab=vocab, merges=())

    def test_non_dense_ids(self):
        vocab = dict(BYTE_VOCAB)
        vocab["th"] = 999
        with pytest.raises(ParseError, match="dense"):
            TokenizerDef(vocab=vocab, merges=())

    def test_byte_level_requires_all_singletons(self):
        vocab = dict(BYTE_VOCAB)
        missing_char = BYTE_TO_CHAR[0]
        del vocab[missing_char]
        vocab = {t: i for i, t in enumerate(sorted(vocab, key=vocab.get))}
        with pytest.raises(ParseError, match="single-byte"):
            TokenizerDef(vocab=vocab, merges=())

    def test_flat_json_round_trip(self, th_tok):
        loaded = load_tokenizer(dump_tokenizer(th_tok))
        assert loaded.vocab == dict(th_tok.vocab)
        assert loaded.merges == th_tok.merges
        assert tokenizer_digest(loaded) == tokenizer_digest(th_tok)

    def test_combined_document_form(self):
        doc = {
            "pre_tokenizer": {"type": "ByteLevel", "add_prefix_space": False},
            "model": {
                "type": "BPE",
                "vocab": {**BYTE_VOCAB, "th": 256},
                "merges": ["t h"],
            },
            "added_tokens": [{"id": 257, "content": "<|end|>", "special": True}],
        }
        tok = load_tokenizer(json.dumps(doc))
        assert tok.byte_level
        assert tok.vocab["<|end|>"] == 257
        assert 257 in tok.special_tokens
        assert tok.merges == (("t", "h"),)

    def test_two_file_form(self, tmp_path):
        vocab_path = tmp_path / "vocab.txt"
        merges_path = tmp_path / "merges.txt"
        tokens = sorted(BYTE_VOCAB, key=BYTE_VOCAB.get) + ["th"]
        vocab_path.write_text("\n".join(tokens), encoding="utf-8")
        merges_path.write_text("#version: 0.2\nt h\n", encoding="utf-8")
        tok = load_tokenizer_files(vocab_path, merges_path)
        assert tok.vocab["th"] == 256
        assert tok.merges == (("t", "h"),)

    def test_malformed_json(self):
        with pytest.raises(ParseError, match="JSON"):
            load_tokenizer("{not json")

    def test_bad_merge_entry(self):
        with pytest.raises(ParseError, match="merge 0"):
            load_tokenizer({"vocab": BYTE_VOCAB, "merges": ["t h e"]})

    def test_load_file(self, tmp_path, byte_tok):
        p = tmp_path / "tok.json"
        p.write_text(dump_tokenizer(byte_tok), encoding="utf-8")
        assert load_tokenizer_file(p).vocab_size == 256


class TestEncode:
    def test_hello_five_single_byte_spans(self, byte_tok):
        spans = encode(byte_tok, b"hello")
        assert len(spans) == 5
        assert all(s.byte_len == 1 for s in spans)
        assert decode(byte_tok, [s.token_id for s in spans]) == b"hello"

    def test_the_the_merge_fixture(self, th_tok):
        spans = encode(th_tok, b"the the")
        assert [s.byte_len for s in spans] == [2, 1, 1, 2, 1]
        assert [s.token_id for s in spans][0] == 256
        assert decode(th_tok, [s.token_id for s in spans]) == b"the the"

    def test_empty_input(self, byte_tok, th_tok):
        assert encode(byte_tok, b"") == []
        assert encode(th_tok, "") == []

    def test_str_input_is_utf8(self, byte_tok):
        assert sum(s.byte_len for s in encode(byte_tok, "héllo")) == len("héllo".encode())

    def test_merge_priority_order(self):
        # ("e","d") ranks above ("d","e"); "deed" must become [d, ee?]..
        # build vocab with both products and check lowest index wins.
        vocab = dict(BYTE_VOCAB)
        vocab["ed"] = 256
        vocab["de"] = 257
        tok = TokenizerDef(vocab=vocab, merges=(("e", "d"), ("d", "e")))
        ids = [s.token_id for s in encode(tok, b"ded")]
        # "ded": pair (d,e) rank 1, pair (e,d) rank 0 -> merge (e,d) first.
        assert ids == [BYTE_VOCAB["d"], 256]

    def test_leftmost_first_on_overlap(self):
        vocab = dict(BYTE_VOCAB)
        vocab["aa"] = 256
        tok = TokenizerDef(vocab=vocab, merges=(("a", "a"),))
        ids = [s.token_id for s in encode(tok, b"aaa")]
        assert ids == [256, BYTE_VOCAB["a"]]

    def test_deterministic(self, th_tok):
        data = b"thhhe ththt the" * 11
        assert encode(th_tok, data) == encode(th_tok, data)

    def test_pretokenize_blocks_cross_piece_merges(self):
        vocab = dict(BYTE_VOCAB)
        vocab["th"] = 256
        plain = TokenizerDef(vocab=vocab, merges=(("t", "h"),))
        # Split between 't' and 'h' so the merge cannot fire across pieces.
        split = TokenizerDef(
            vocab=vocab, merges=(("t", "h"),), pretokenize_pattern="t"
        )
        data = b"th"
        assert [s.token_id for s in encode(plain, data)] == [256]
        assert [s.token_id for s in encode(split, data)] == [
            BYTE_VOCAB["t"],
            BYTE_VOCAB["h"],
        ]
        assert decode(split, [s.token_id for s in encode(split, data)]) == data

    def test_non_byte_level_coverage_errors(self):
        vocab = {c: i for i, c in enumerate("abc")}
        tok = TokenizerDef(vocab=vocab, merges=(), byte_level=False)
        assert [s.byte_len for s in encode(tok, b"abc")] == [1, 1, 1]
        with pytest.raises(CoverageError, match="not covered"):
            encode(tok, b"abd")
        with pytest.raises(CoverageError, match="UTF-8"):
            encode(tok, b"\xff\xfe")

    def test_non_byte_level_multibyte_char_len(self):
        vocab = {"é": 0, "x": 1}
        tok = TokenizerDef(vocab=vocab, merges=(), byte_level=False)
        spans = encode(tok, "éx")
        assert [s.byte_len for s in spans] == [2, 1]


@settings(max_examples=200)
@given(data=st.binary(max_size=600))
def test_round_trip_and_byte_conservation(data):
    sp = BYTE_TO_CHAR[0x20]  # space in the mapped alphabet
    vocab = dict(BYTE_VOCAB)
    vocab["th"] = 256
    vocab["the"] = 257
    vocab[sp + sp] = 258
    tok = TokenizerDef(
        vocab=vocab, merges=(("t", "h"), ("th", "e"), (sp, sp))
    )
    spans = encode(tok, data)
    assert sum(s.byte_len for s in spans) == len(data)
    assert decode(tok, [s.token_id for s in spans]) == data


@given(data=st.binary(max_size=400))
def test_merges_never_increase_token_count(data):
    vocab = dict(BYTE_VOCAB)
    vocab["th"] = 256
    base = TokenizerDef(vocab=dict(BYTE_VOCAB), merges=())
    merged = TokenizerDef(vocab=vocab, merges=(("t", "h"),))
    assert len(encode(merged, data)) <= len(encode(base, data))


class TestSpansAndStats:
    def test_spans_for_ids_matches_encode(self, th_tok):
        spans = encode(th_tok, b"the theatre")
        rebuilt = spans_for_ids(th_tok, [s.token_id for s in spans])
        assert rebuilt == spans

    def test_special_tokens_have_zero_byte_len(self):
        vocab = dict(BYTE_VOCAB)
        vocab["<pad>"] = 256
        tok = TokenizerDef(vocab=vocab, merges=(), special_tokens=frozenset({256}))
        assert tok.token_byte_len(256) == 0
        assert decode(tok, [BYTE_VOCAB["a"], 256, BYTE_VOCAB["b"]]) == b"ab"

    def test_bits_per_token_plain(self):
        spans = [TokenSpan(0, 1)] * 5
        assert bits_per_token(spans) == 8.0

    def test_bits_per_token_fixture(self):
        spans = [TokenSpan(0, n) for n in (2, 1, 1, 2, 1)]
        assert bits_per_token(spans, skip_first=True) == 10.0
        assert bits_per_token(spans, skip_first=False) == 11.2

    def test_bits_per_token_too_few(self):
        with pytest.raises(DomainError):
            bits_per_token([], skip_first=False)
        with pytest.raises(DomainError):
            bits_per_token([TokenSpan(0, 1)], skip_first=True)

    def test_digest_sensitive_to_merges(self, byte_tok, th_tok):
        assert tokenizer_digest(byte_tok) != tokenizer_digest(th_tok)
        assert len(tokenizer_digest(byte_tok)) == 16

    def test_token_string_bounds(self, byte_tok):
        with pytest.raises(DomainError):
            byte_tok.token_string(256)
