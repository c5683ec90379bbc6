#!/usr/bin/env python3
"""Byte-level BPE and the text-size side of the metric.

The numerator of the capacity metric starts from C, the UTF-8 byte size
of the text a model's tokens span. That makes tokenizer efficiency part
of the score: a tokenizer that covers the same text with fewer tokens
gives every token more bits of text to compress. This demo builds two
tokenizers over the same byte alphabet and measures bits per token.
"""

from infocap.tokenizer import (
    BYTE_TO_CHAR,
    TokenizerDef,
    bits_per_token,
    decode,
    encode,
    tokenizer_digest,
)

BYTE_VOCAB = {BYTE_TO_CHAR[b]: b for b in range(256)}

# ---------------------------------------------------------------------------
# A bare byte tokenizer: one token per byte, 8.0 bits/token always.
# ---------------------------------------------------------------------------
plain = TokenizerDef(vocab=dict(BYTE_VOCAB), merges=())

# A tokenizer with a few learned merges. Merges apply in priority order
# (lowest index first, leftmost occurrence first).
vocab = dict(BYTE_VOCAB)
vocab.update({"th": 256, "the": 257, "in": 258, "ing": 259})
merged = TokenizerDef(
    vocab=vocab,
    merges=(("t", "h"), ("th", "e"), ("i", "n"), ("in", "g")),
)

text = b"the thing they were thinking of in the morning"
for name, tok in (("plain-bytes", plain), ("with-merges", merged)):
    spans = encode(tok, text)
    assert decode(tok, [s.token_id for s in spans]) == text  # lossless
    print(
        f"{name}: {len(spans):2d} tokens, "
        f"{bits_per_token(spans):5.2f} bits/token, "
        f"{bits_per_token(spans, skip_first=True):5.2f} skipping the first token"
    )
print()

# ---------------------------------------------------------------------------
# Byte accounting survives anything, including invalid UTF-8: every
# token owns exactly the bytes of its byte-level spelling.
# ---------------------------------------------------------------------------
hostile = b"\xff\xfe broken \xc3( utf-8 \x00\x01"
spans = encode(merged, hostile)
assert sum(s.byte_len for s in spans) == len(hostile)
assert decode(merged, [s.token_id for s in spans]) == hostile
print(f"hostile bytes: {len(hostile)} in, {sum(s.byte_len for s in spans)} attributed, round trip ok")
print()

# ---------------------------------------------------------------------------
# Definitions are content-addressed so an external scorer can prove it
# loaded the very same tokenizer.
# ---------------------------------------------------------------------------
print("digest(plain) =", tokenizer_digest(plain))
print("digest(merged) =", tokenizer_digest(merged))

# Multi-byte characters may split across tokens; attribution follows
# bytes, so the totals still balance.
snowman = "snow☃man".encode()  # 3-byte code point inside
spans = encode(plain, snowman)
print("snowman bytes:", len(snowman), "-> tokens:", len(spans), "(each 1 byte)")
