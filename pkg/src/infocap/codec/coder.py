"""Integer arithmetic coder with explicit renormalization.

The coder keeps a B-bit [low, high] interval and narrows it by integer
cumulative frequencies. Renormalization emits a bit whenever the
interval settles in one half of the register and defers "straddle" bits
(interval pinched around the midpoint) until the ambiguity resolves, so
no carry ever propagates into already-emitted output. Termination
spends two bits plus any deferred ones to pin a value strictly inside
the final interval; the decoder consumes exactly B - 2 bits beyond what
the encoder wrote, reading implicit zeros, which is why a decoder that
overdraws further can flag the stream as truncated instead of returning
wrong symbols.

Frequencies are f-bit integers with ``f <= B - 2``. Realized symbol
widths lose at most one integer step to division truncation, so each
symbol costs at most about ``1.45 * 2**(f - B + 2)`` bits over the
discretized ideal; the default config (B=48, f=20) keeps that far below
``4 * 2**-f`` per symbol, the slack this package guarantees in its
length bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import DecodeError, DomainError, InputError, ModelError
from .models import ProbabilityModel

__all__ = [
    "CoderConfig",
    "DEFAULT_CONFIG",
    "Bitstream",
    "encode_stream",
    "decode_stream",
    "ideal_bits",
]


@dataclass(frozen=True)
class CoderConfig:
    """Register width ``precision_bits`` (B) and frequency precision
    ``freq_bits`` (f). Valid range: 16 <= B <= 62 and f <= B - 2."""

    precision_bits: int = 48
    freq_bits: int = 20

    def __post_init__(self) -> None:
        if not 16 <= self.precision_bits <= 62:
            raise DomainError(
                f"precision_bits must be in [16, 62], got {self.precision_bits}"
            )
        if not 1 <= self.freq_bits <= self.precision_bits - 2:
            raise DomainError(
                f"freq_bits must be in [1, precision_bits - 2], got {self.freq_bits}"
            )

    @property
    def freq_cap(self) -> int:
        return 1 << self.freq_bits


DEFAULT_CONFIG = CoderConfig()


@dataclass(frozen=True)
class Bitstream:
    """A bit-exact byte buffer: ``data`` is zero-padded to whole bytes,
    ``nbits`` is the true length."""

    data: bytes
    nbits: int

    def __post_init__(self) -> None:
        if not 0 <= 8 * len(self.data) - self.nbits < 8:
            raise DomainError(
                f"nbits {self.nbits} inconsistent with {len(self.data)} data bytes"
            )

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int | None = None) -> "Bitstream":
        return cls(bytes(data), 8 * len(data) if nbits is None else nbits)


class _BitWriter:
    __slots__ = ("_chunks", "_acc", "_nacc", "_nbits")

    def __init__(self) -> None:
        self._chunks = bytearray()
        self._acc = 0
        self._nacc = 0
        self._nbits = 0

    def write(self, bit: int) -> None:
        self._acc = (self._acc << 1) | bit
        self._nacc += 1
        self._nbits += 1
        if self._nacc == 8:
            self._chunks.append(self._acc)
            self._acc = 0
            self._nacc = 0

    def bitstream(self) -> Bitstream:
        data = bytes(self._chunks)
        if self._nacc:
            data += bytes([self._acc << (8 - self._nacc)])
        return Bitstream(data, self._nbits)


class _BitReader:
    """Reads bits most-significant first; up to ``extra`` implicit zero
    bits may be read past the end, after which the stream counts as
    truncated."""

    __slots__ = ("_data", "_nbits", "_pos", "_limit")

    def __init__(self, bits: Bitstream, extra: int):
        self._data = bits.data
        self._nbits = bits.nbits
        self._pos = 0
        self._limit = bits.nbits + extra

    def read(self) -> int:
        pos = self._pos
        if pos >= self._limit:
            raise DecodeError(
                f"bitstream truncated: needed more than {self._nbits} bits "
                f"plus {self._limit - self._nbits} implicit zeros"
            )
        self._pos = pos + 1
        if pos >= self._nbits:
            return 0
        return (self._data[pos >> 3] >> (7 - (pos & 7))) & 1


def _validate_table(cum, alphabet_size: int, cap: int, model: ProbabilityModel) -> np.ndarray:
    arr = np.asarray(cum, dtype=np.uint64)
    if arr.ndim != 1 or arr.size != alphabet_size + 1:
        raise ModelError(
            f"model {model.model_id}: cumulative table must have length "
            f"{alphabet_size + 1}, got shape {arr.shape}"
        )
    if arr[0] != 0:
        raise ModelError(f"model {model.model_id}: cumulative table must start at 0")
    if (arr[1:] <= arr[:-1]).any():
        raise ModelError(
            f"model {model.model_id}: frequencies must all be >= 1 "
            "(table not strictly increasing)"
        )
    if int(arr[-1]) > cap:
        raise ModelError(
            f"model {model.model_id}: total frequency {int(arr[-1])} exceeds "
            f"the configured cap {cap}"
        )
    return arr


def encode_stream(
    model: ProbabilityModel,
    symbols: Iterable[int] | bytes,
    cfg: CoderConfig = DEFAULT_CONFIG,
) -> Bitstream:
    """Arithmetic-code ``symbols`` under ``model``; returns the bitstream.

    The model is advanced in place, one ``observe`` per symbol. The
    stream carries no symbol count; callers store it out of band (see
    the container format) and pass it back to :func:`decode_stream`.
    """
    B = cfg.precision_bits
    half = 1 << (B - 1)
    quarter = half >> 1
    three_quarters = half + quarter
    cap = cfg.freq_cap
    n = model.alphabet_size

    writer = _BitWriter()
    emit = writer.write
    low = 0
    high = (1 << B) - 1
    pending = 0
    checked = False

    for symbol in symbols:
        cum = model.cumulative_freqs()
        if not checked:
            # Full structural check once; per-symbol checks below are O(1).
            _validate_table(cum, n, cap, model)
            checked = True
        s = int(symbol)
        if not 0 <= s < n:
            raise InputError(f"symbol {s!r} outside alphabet of size {n}")
        total = int(cum[n])
        if total > cap:
            raise ModelError(
                f"model {model.model_id}: total frequency {total} exceeds cap {cap}"
            )
        sym_lo = int(cum[s])
        sym_hi = int(cum[s + 1])
        if sym_lo >= sym_hi:
            raise ModelError(f"model {model.model_id}: symbol {s} has zero frequency")

        span = high - low + 1
        high = low + sym_hi * span // total - 1
        low = low + sym_lo * span // total
        while True:
            if high < half:
                emit(0)
                while pending:
                    emit(1)
                    pending -= 1
            elif low >= half:
                emit(1)
                while pending:
                    emit(0)
                    pending -= 1
                low -= half
                high -= half
            elif low >= quarter and high < three_quarters:
                pending += 1
                low -= quarter
                high -= quarter
            else:
                break
            low <<= 1
            high = (high << 1) | 1
        model.observe(s)

    # Terminator: one disambiguating bit plus deferred straddle bits pins
    # a value inside [low, high]; with implicit zeros the decoder needs
    # exactly B - 2 bits beyond this point.
    pending += 1
    if low < quarter:
        emit(0)
        while pending:
            emit(1)
            pending -= 1
    else:
        emit(1)
        while pending:
            emit(0)
            pending -= 1
    return writer.bitstream()


def decode_stream(
    model: ProbabilityModel,
    bits: Bitstream,
    count: int,
    cfg: CoderConfig = DEFAULT_CONFIG,
) -> list[int]:
    """Recover ``count`` symbols from a stream made by :func:`encode_stream`.

    ``model`` must be a pristine instance equivalent to the one encoding
    started from. Truncated or corrupt input raises :class:`DecodeError`
    (the decoder tracks both its implicit-zero budget and the coding
    interval, so it fails instead of fabricating symbols).
    """
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}")
    B = cfg.precision_bits
    half = 1 << (B - 1)
    quarter = half >> 1
    three_quarters = half + quarter
    cap = cfg.freq_cap
    n = model.alphabet_size

    reader = _BitReader(bits, extra=B - 2)
    read = reader.read
    code = 0
    for _ in range(B):
        code = (code << 1) | read()
    low = 0
    high = (1 << B) - 1
    out: list[int] = []
    checked = False

    for _ in range(count):
        cum = model.cumulative_freqs()
        if not checked:
            _validate_table(cum, n, cap, model)
            checked = True
        arr = cum if isinstance(cum, np.ndarray) else np.asarray(cum, dtype=np.uint64)
        total = int(arr[n])
        if total > cap:
            raise ModelError(
                f"model {model.model_id}: total frequency {total} exceeds cap {cap}"
            )
        if not low <= code <= high:
            raise DecodeError("bitstream corrupt: code value left the coding interval")
        span = high - low + 1
        value = ((code - low + 1) * total - 1) // span
        s = int(np.searchsorted(arr, value, side="right")) - 1
        sym_lo = int(arr[s])
        sym_hi = int(arr[s + 1])
        high = low + sym_hi * span // total - 1
        low = low + sym_lo * span // total
        while True:
            if high < half:
                pass
            elif low >= half:
                low -= half
                high -= half
                code -= half
            elif low >= quarter and high < three_quarters:
                low -= quarter
                high -= quarter
                code -= quarter
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            code = (code << 1) | read()
        out.append(s)
        model.observe(s)
    return out


def ideal_bits(
    model: ProbabilityModel,
    symbols: Iterable[int] | bytes,
    cfg: CoderConfig = DEFAULT_CONFIG,
) -> float:
    """Negative log2-likelihood of ``symbols`` under the model's own
    discretized frequencies: the coder's length target, before the
    bounded termination and truncation overheads."""
    cap = cfg.freq_cap
    n = model.alphabet_size
    checked = False
    terms: list[float] = []
    for symbol in symbols:
        cum = model.cumulative_freqs()
        if not checked:
            _validate_table(cum, n, cap, model)
            checked = True
        s = int(symbol)
        if not 0 <= s < n:
            raise InputError(f"symbol {s!r} outside alphabet of size {n}")
        total = int(cum[n])
        if total > cap:
            raise ModelError(
                f"model {model.model_id}: total frequency {total} exceeds cap {cap}"
            )
        width = int(cum[s + 1]) - int(cum[s])
        if width <= 0:
            raise ModelError(f"model {model.model_id}: symbol {s} has zero frequency")
        terms.append(math.log2(total) - math.log2(width))
        model.observe(s)
    return math.fsum(terms)
