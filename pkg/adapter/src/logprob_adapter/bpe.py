"""Minimal byte-level BPE encoder, independent of the evaluation engine.

Reads the same combined-document tokenizer definitions the engine reads
and must produce identical token ids on identical bytes; the engine
verifies that agreement on every run via the tokenizer digest in the
manifest and spot checks on token ids. Merge semantics: the pair with
the lowest merge index present in the sequence is merged first, all of
its occurrences at once, leftmost first.
"""

from __future__ import annotations

import hashlib
import json
from functools import lru_cache
from pathlib import Path

from .config import AdapterError


@lru_cache(maxsize=1)
def _byte_to_char() -> dict[int, str]:
    keep = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(0xA1, 0xAC + 1))
        + list(range(0xAE, 0xFF + 1))
    )
    table = {b: chr(b) for b in keep}
    bump = 0
    for b in range(256):
        if b not in table:
            table[b] = chr(256 + bump)
            bump += 1
    return table


class ByteBpe:
    """Just enough tokenizer to score text: bytes in, token ids out."""

    def __init__(
        self,
        vocab: dict[str, int],
        merges: list[tuple[str, str]],
        special_ids: list[int] | None = None,
    ):
        self.vocab = dict(vocab)
        self.merges = [tuple(m) for m in merges]
        self.rank = {pair: i for i, pair in enumerate(self.merges)}
        self.vocab_size = len(self.vocab)
        self.special_ids = sorted(special_ids or [])
        missing = [p for pair in self.merges for p in (*pair, pair[0] + pair[1]) if p not in self.vocab]
        if missing:
            raise AdapterError(f"merge parts missing from vocab: {missing[:3]}")

    @classmethod
    def from_file(cls, path: str | Path) -> "ByteBpe":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        model = doc.get("model", doc)
        vocab = model.get("vocab")
        merges_raw = model.get("merges", [])
        if not vocab:
            raise AdapterError(f"{path}: no vocab found")
        if not doc.get("byte_level", True):
            raise AdapterError(f"{path}: this adapter only scores byte-level tokenizers")
        merges = []
        for entry in merges_raw:
            if isinstance(entry, str):
                left, _, right = entry.partition(" ")
                merges.append((left, right))
            else:
                merges.append((entry[0], entry[1]))
        specials = [s for s in doc.get("special_tokens", []) if isinstance(s, int)]
        return cls(vocab, merges, specials)

    def encode(self, data: bytes) -> list[int]:
        table = _byte_to_char()
        parts = [table[b] for b in data]
        rank = self.rank
        while len(parts) > 1:
            pairs = set(zip(parts, parts[1:]))
            ranked = [(rank[p], p) for p in pairs if p in rank]
            if not ranked:
                break
            _, (left, right) = min(ranked)
            joined = left + right
            rebuilt: list[str] = []
            i = 0
            while i < len(parts):
                if i + 1 < len(parts) and parts[i] == left and parts[i + 1] == right:
                    rebuilt.append(joined)
                    i += 2
                else:
                    rebuilt.append(parts[i])
                    i += 1
            parts = rebuilt
        try:
            return [self.vocab[p] for p in parts]
        except KeyError as exc:
            raise AdapterError(f"token {exc.args[0]!r} missing from vocab") from None

    def digest(self) -> str:
        """Same canonical digest the engine computes: SHA-256 (first 16
        hex) over sorted-key JSON of byte_level/merges/special/vocab."""
        canonical = json.dumps(
            {
                "byte_level": True,
                "merges": [list(m) for m in self.merges],
                "special_tokens": self.special_ids,
                "vocab": {k: v for k, v in sorted(self.vocab.items())},
            },
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
