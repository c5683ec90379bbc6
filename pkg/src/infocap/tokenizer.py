"""Byte-level BPE tokenizer runtime with exact byte accounting.

Loads tokenizer definitions (the combined single-document JSON form or a
minimal vocab+merges two-file form), encodes arbitrary byte sequences,
and attributes to every emitted token the exact number of UTF-8 bytes it
spans. Attribution follows the byte-level representation even when a
token splits a multi-byte code point: the per-token text size is a byte
measure, so the sum of span lengths always equals the input length and
decoding is lossless bit-for-bit.

Only inference is implemented (apply learned merges); there is no
training, no unigram/wordpiece support, and no normalization beyond the
byte-to-printable-alphabet mapping.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import CoverageError, DomainError, ParseError

__all__ = [
    "TokenSpan",
    "TokenizerDef",
    "load_tokenizer",
    "load_tokenizer_file",
    "load_tokenizer_files",
    "dump_tokenizer",
    "encode",
    "decode",
    "spans_for_ids",
    "bits_per_token",
    "tokenizer_digest",
]


def _byte_to_char_table() -> dict[int, str]:
    # Printable bytes map to themselves; the rest are relocated above
    # U+0100 so every byte has a one-character, newline-free spelling.
    keep = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    table: dict[int, str] = {b: chr(b) for b in keep}
    shift = 0
    for b in range(256):
        if b not in table:
            table[b] = chr(256 + shift)
            shift += 1
    return table


BYTE_TO_CHAR: Mapping[int, str] = _byte_to_char_table()
CHAR_TO_BYTE: Mapping[str, int] = {c: b for b, c in BYTE_TO_CHAR.items()}


class TokenSpan(NamedTuple):
    """One emitted token and the count of input bytes it covers."""

    token_id: int
    byte_len: int


@dataclass(frozen=True)
class TokenizerDef:
    """Validated, immutable tokenizer definition.

    ``vocab`` maps token strings to ids; for byte-level tokenizers the
    strings live in the mapped printable alphabet, so their character
    length equals their byte length. ``special_tokens`` are ids excluded
    from byte attribution; raw-text evaluation never emits them.
    """

    vocab: Mapping[str, int]
    merges: tuple[tuple[str, str], ...]
    byte_level: bool = True
    special_tokens: frozenset[int] = frozenset()
    pretokenize_pattern: str | None = None
    _id_to_token: tuple[str, ...] = field(init=False, repr=False, compare=False)
    _ranks: Mapping[tuple[str, str], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ids = sorted(self.vocab.values())
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ParseError(f"duplicate token ids: {dupes[:5]}")
        if ids != list(range(len(ids))):
            missing = sorted(set(range(len(ids))) - set(ids))[:5]
            raise ParseError(
                f"token ids must be dense in [0, {len(ids)}); missing {missing}"
            )
        id_to_token = [""] * len(ids)
        for token, token_id in self.vocab.items():
            id_to_token[token_id] = token
        for i, (left, right) in enumerate(self.merges):
            for part, name in ((left, "left"), (right, "right"), (left + right, "product")):
                if part not in self.vocab:
                    raise ParseError(f"merge {i} ({left!r}, {right!r}): {name} {part!r} not in vocab")
        if self.byte_level:
            specials = self.special_tokens
            single = {t for t in self.vocab if len(t) == 1 and self.vocab[t] not in specials}
            missing_bytes = [b for b in range(256) if BYTE_TO_CHAR[b] not in single]
            if missing_bytes:
                raise ParseError(
                    "byte-level vocab must contain all 256 single-byte tokens; "
                    f"missing bytes {missing_bytes[:5]}"
                )
        bad_special = [i for i in self.special_tokens if not 0 <= i < len(ids)]
        if bad_special:
            raise ParseError(f"special token ids out of range: {bad_special[:5]}")
        object.__setattr__(self, "_id_to_token", tuple(id_to_token))
        object.__setattr__(
            self, "_ranks", {pair: i for i, pair in enumerate(self.merges)}
        )

    @property
    def vocab_size(self) -> int:
        return len(self._id_to_token)

    def token_string(self, token_id: int) -> str:
        if not 0 <= token_id < self.vocab_size:
            raise DomainError(f"token id {token_id} outside [0, {self.vocab_size})")
        return self._id_to_token[token_id]

    def token_byte_len(self, token_id: int) -> int:
        """Bytes the token contributes to decoded output (0 for specials)."""
        if token_id in self.special_tokens:
            return 0
        s = self.token_string(token_id)
        return len(s) if self.byte_level else len(s.encode("utf-8"))


def _coerce_bytes(text: bytes | str) -> bytes:
    return text.encode("utf-8") if isinstance(text, str) else bytes(text)


def _merge_pass(parts: list[str], ranks: Mapping[tuple[str, str], int]) -> list[str]:
    # Lowest merge index wins each round; within a round, occurrences
    # are replaced leftmost-first so overlaps resolve deterministically.
    while len(parts) >= 2:
        best_rank = None
        best = None
        prev = parts[0]
        for cur in parts[1:]:
            rank = ranks.get((prev, cur))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best = (prev, cur)
            prev = cur
        if best is None:
            break
        left, right = best
        merged = left + right
        out: list[str] = []
        i = 0
        n = len(parts)
        while i < n:
            if i < n - 1 and parts[i] == left and parts[i + 1] == right:
                out.append(merged)
                i += 2
            else:
                out.append(parts[i])
                i += 1
        parts = out
    return parts


def _pieces(mapped: str, pattern: str | None) -> Iterable[str]:
    if pattern is None:
        yield mapped
        return
    pos = 0
    for m in re.finditer(pattern, mapped):
        if m.start() > pos:
            yield mapped[pos : m.start()]
        if m.group():
            yield m.group()
        pos = m.end()
    if pos < len(mapped):
        yield mapped[pos:]


def encode(tok: TokenizerDef, text: bytes | str) -> list[TokenSpan]:
    """Tokenize a byte sequence, returning spans with exact byte lengths.

    Byte-level definitions accept arbitrary bytes, including invalid
    UTF-8, and are lossless by construction. Non-byte-level definitions
    require the input to decode as UTF-8 and every character to exist in
    the vocabulary, else :class:`CoverageError`.
    """
    data = _coerce_bytes(text)
    if not data:
        return []
    vocab = tok.vocab
    if tok.byte_level:
        mapped = "".join(BYTE_TO_CHAR[b] for b in data)
        spans: list[TokenSpan] = []
        for piece in _pieces(mapped, tok.pretokenize_pattern):
            for part in _merge_pass(list(piece), tok._ranks):
                spans.append(TokenSpan(vocab[part], len(part)))
        return spans
    try:
        chars = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CoverageError(
            f"input is not valid UTF-8 at byte {exc.start} and the tokenizer "
            "is not byte-level"
        ) from None
    missing = next((c for c in set(chars) if c not in vocab), None)
    if missing is not None:
        raise CoverageError(f"character {missing!r} is not covered by the vocabulary")
    spans = []
    for piece in _pieces(chars, tok.pretokenize_pattern):
        for part in _merge_pass(list(piece), tok._ranks):
            spans.append(TokenSpan(vocab[part], len(part.encode("utf-8"))))
    return spans


def decode(tok: TokenizerDef, token_ids: Iterable[int]) -> bytes:
    """Inverse of :func:`encode`; special tokens contribute no bytes."""
    out = bytearray()
    for token_id in token_ids:
        if token_id in tok.special_tokens:
            continue
        s = tok.token_string(token_id)
        if tok.byte_level:
            out.extend(CHAR_TO_BYTE[c] for c in s)
        else:
            out.extend(s.encode("utf-8"))
    return bytes(out)


def spans_for_ids(tok: TokenizerDef, token_ids: Iterable[int]) -> list[TokenSpan]:
    """Rebuild spans from ids alone, using the vocabulary's byte lengths."""
    return [TokenSpan(i, tok.token_byte_len(i)) for i in token_ids]


def bits_per_token(spans: Sequence[TokenSpan], skip_first: bool = False) -> float:
    """Average text size per token in bits (UTF-8 bytes times 8).

    With ``skip_first`` the first span leaves both the numerator and the
    denominator, matching how measurement excludes the unpredicted first
    token.
    """
    counted = spans[1:] if skip_first else spans
    if not counted:
        raise DomainError(
            "bits_per_token needs at least "
            + ("two spans when skip_first is set" if skip_first else "one span")
        )
    return 8.0 * sum(s.byte_len for s in counted) / len(counted)


def tokenizer_digest(tok: TokenizerDef) -> str:
    """First 16 hex digits of a SHA-256 over the canonical definition.

    Canonical form: JSON with sorted keys of ``{"byte_level", "merges",
    "special_tokens", "vocab"}``, UTF-8, no whitespace. Adapters that
    produce likelihood records recompute this to prove both sides loaded
    the same tokenizer.
    """
    canonical = json.dumps(
        {
            "byte_level": tok.byte_level,
            "merges": [list(m) for m in tok.merges],
            "special_tokens": sorted(tok.special_tokens),
            "vocab": {k: v for k, v in sorted(tok.vocab.items())},
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _parse_merge_entry(entry, index: int) -> tuple[str, str]:
    if isinstance(entry, str):
        parts = entry.split(" ")
        if len(parts) != 2:
            raise ParseError(f"merge {index}: expected 'left right', got {entry!r}")
        return parts[0], parts[1]
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return str(entry[0]), str(entry[1])
    raise ParseError(f"merge {index}: expected a pair, got {entry!r}")


def _mentions_byte_level(node) -> bool:
    if isinstance(node, dict):
        if node.get("type") == "ByteLevel":
            return True
        return any(_mentions_byte_level(v) for v in node.values())
    if isinstance(node, list):
        return any(_mentions_byte_level(v) for v in node)
    return False


def load_tokenizer(source: str | bytes | Mapping) -> TokenizerDef:
    """Build a :class:`TokenizerDef` from combined-document content.

    Accepts either the widely used single-JSON-document layout (vocab
    and merges under a ``model`` key, added tokens alongside; byte-level
    detected from the pre-tokenizer/decoder sections) or a flat layout
    with top-level ``vocab``/``merges`` and optional ``byte_level``,
    ``special_tokens`` and ``pretokenize_pattern`` keys.
    """
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"tokenizer definition is not valid JSON: {exc}") from None
    else:
        doc = dict(source)
    if not isinstance(doc, dict):
        raise ParseError("tokenizer definition must be a JSON object")

    if "model" in doc and isinstance(doc["model"], dict):
        model = doc["model"]
        vocab_raw = model.get("vocab")
        merges_raw = model.get("merges", [])
        byte_level = _mentions_byte_level(
            {k: doc.get(k) for k in ("pre_tokenizer", "decoder", "post_processor")}
        )
        vocab = dict(vocab_raw) if vocab_raw else None
        special_ids = set()
        if vocab is not None:
            for added in doc.get("added_tokens", []):
                content, token_id = added.get("content"), added.get("id")
                if content is None or token_id is None:
                    raise ParseError(f"added token entry missing content/id: {added!r}")
                existing = vocab.get(content)
                if existing is not None and existing != token_id:
                    raise ParseError(
                        f"added token {content!r} id {token_id} conflicts with vocab id {existing}"
                    )
                vocab[content] = token_id
                if added.get("special", True):
                    special_ids.add(token_id)
    else:
        vocab_raw = doc.get("vocab")
        merges_raw = doc.get("merges", [])
        byte_level = bool(doc.get("byte_level", True))
        vocab = dict(vocab_raw) if vocab_raw else None
        special_ids = set()
        for entry in doc.get("special_tokens", []):
            if isinstance(entry, int):
                special_ids.add(entry)
            elif isinstance(entry, str) and vocab and entry in vocab:
                special_ids.add(vocab[entry])
            else:
                raise ParseError(f"special token {entry!r} not found in vocab")

    if not vocab:
        raise ParseError("tokenizer definition has no vocab")
    merges = tuple(_parse_merge_entry(m, i) for i, m in enumerate(merges_raw))
    pattern = doc.get("pretokenize_pattern")
    if pattern is not None:
        try:
            re.compile(pattern)
        except re.error as exc:
            raise ParseError(f"pretokenize_pattern does not compile: {exc}") from None
    return TokenizerDef(
        vocab=vocab,
        merges=merges,
        byte_level=byte_level,
        special_tokens=frozenset(special_ids),
        pretokenize_pattern=pattern,
    )


def dump_tokenizer(tok: TokenizerDef) -> str:
    """Serialize to the flat combined-document form ``load_tokenizer`` reads."""
    doc = {
        "vocab": {k: v for k, v in sorted(tok.vocab.items(), key=lambda kv: kv[1])},
        "merges": [list(m) for m in tok.merges],
        "byte_level": tok.byte_level,
        "special_tokens": sorted(tok.special_tokens),
    }
    if tok.pretokenize_pattern is not None:
        doc["pretokenize_pattern"] = tok.pretokenize_pattern
    return json.dumps(doc, ensure_ascii=False, indent=1)


def load_tokenizer_file(path: str | Path) -> TokenizerDef:
    return load_tokenizer(Path(path).read_text(encoding="utf-8"))


def load_tokenizer_files(vocab_path: str | Path, merges_path: str | Path) -> TokenizerDef:
    """Minimal two-file form: one token per vocab line (line number = id),
    one ``left right`` pair per merges line. Byte-level by construction;
    a leading ``#version`` line in the merges file is skipped."""
    vocab: dict[str, int] = {}
    for i, line in enumerate(Path(vocab_path).read_text(encoding="utf-8").splitlines()):
        if line in vocab:
            raise ParseError(f"vocab line {i + 1}: duplicate token {line!r}")
        vocab[line] = i
    merges = []
    lines = Path(merges_path).read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines):
        if not line.strip() or (i == 0 and line.startswith("#version")):
            continue
        merges.append(_parse_merge_entry(line, len(merges)))
    return TokenizerDef(vocab=vocab, merges=tuple(merges), byte_level=True)
