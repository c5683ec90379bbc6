"""Probability models that drive the arithmetic coder.

A model exposes integer cumulative frequencies over its alphabet and is
advanced one symbol at a time. Determinism is the whole contract: the
decoder reconstructs probabilities by replaying exactly the updates the
encoder performed, so identical histories must always produce identical
tables. Every symbol keeps a frequency of at least 1 so nothing the
model considers impossible can stall the coder.
"""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from typing import Callable, Sequence

import numpy as np

from ..errors import InputError, ModelError

__all__ = [
    "ProbabilityModel",
    "StaticModel",
    "AdaptiveContextModel",
    "build_model",
    "register_model",
    "registered_model_ids",
]


class ProbabilityModel(ABC):
    """Next-symbol distribution as integer cumulative frequencies.

    ``cumulative_freqs`` returns an array of length ``alphabet_size + 1``
    with ``cum[0] == 0``, strictly increasing entries, and total
    ``cum[-1]`` no larger than the coder's configured frequency cap.
    ``observe`` advances the state after a symbol is coded; encoder and
    decoder call it in lockstep.
    """

    @property
    @abstractmethod
    def alphabet_size(self) -> int: ...

    @property
    @abstractmethod
    def model_id(self) -> str: ...

    @abstractmethod
    def cumulative_freqs(self) -> np.ndarray: ...

    @abstractmethod
    def observe(self, symbol: int) -> None: ...

    @abstractmethod
    def spawn(self) -> "ProbabilityModel":
        """Fresh instance with the same parameters and pristine state."""

    @abstractmethod
    def state_digest(self) -> str:
        """Hex digest of the mutable state, for encoder/decoder symmetry checks."""


class StaticModel(ProbabilityModel):
    """Fixed frequency table; observing symbols changes nothing."""

    def __init__(self, freqs: Sequence[int], model_id: str | None = None):
        arr = np.asarray(list(freqs), dtype=np.uint64)
        if arr.ndim != 1 or arr.size < 1:
            raise InputError("StaticModel needs a non-empty 1-D frequency list")
        if (arr < 1).any():
            raise ModelError("StaticModel frequencies must all be >= 1")
        self._freqs = arr
        self._cum = np.concatenate([[np.uint64(0)], np.cumsum(arr, dtype=np.uint64)])
        uniform = bool((arr == arr[0]).all())
        self._model_id = model_id or (
            f"uniform-{arr.size}" if uniform and arr[0] == 1 else f"static-{arr.size}"
        )

    @classmethod
    def uniform(cls, alphabet_size: int) -> "StaticModel":
        return cls([1] * alphabet_size)

    @property
    def alphabet_size(self) -> int:
        return int(self._freqs.size)

    @property
    def model_id(self) -> str:
        return self._model_id

    def cumulative_freqs(self) -> np.ndarray:
        return self._cum

    def observe(self, symbol: int) -> None:
        pass

    def spawn(self) -> "StaticModel":
        return StaticModel(self._freqs, model_id=self._model_id)

    def state_digest(self) -> str:
        return hashlib.sha256(self._cum.tobytes()).hexdigest()


class AdaptiveContextModel(ProbabilityModel):
    """Order-k adaptive model with add-one smoothing.

    Each context (the previous ``order`` symbols; shorter near the start
    of a stream) owns a count table. A symbol's frequency is one plus
    the times it followed that context, so the initial distribution is
    uniform and counts only ever grow by single increments. Should a
    context's total ever reach ``max_total`` (far beyond the stream
    lengths this engine processes at the default cap), its counts freeze
    rather than rescale, keeping encode and decode trivially symmetric.
    """

    def __init__(self, order: int = 2, alphabet_size: int = 256, max_total: int = 1 << 20):
        if order < 0:
            raise InputError(f"order must be >= 0, got {order}")
        if alphabet_size < 1:
            raise InputError(f"alphabet_size must be >= 1, got {alphabet_size}")
        if max_total < alphabet_size + 1:
            raise InputError(
                f"max_total {max_total} leaves no room above the uniform "
                f"floor of {alphabet_size}"
            )
        self.order = order
        self._n = alphabet_size
        self.max_total = max_total
        self._base = np.arange(alphabet_size + 1, dtype=np.uint64)
        self._tables: dict[tuple[int, ...], np.ndarray] = {}
        self._recent: tuple[int, ...] = ()

    @property
    def alphabet_size(self) -> int:
        return self._n

    @property
    def model_id(self) -> str:
        return f"adaptive-o{self.order}"

    def cumulative_freqs(self) -> np.ndarray:
        table = self._tables.get(self._recent)
        if table is None:
            return self._base
        return self._base + table

    def observe(self, symbol: int) -> None:
        if not 0 <= symbol < self._n:
            raise InputError(f"symbol {symbol} outside alphabet of size {self._n}")
        ctx = self._recent
        table = self._tables.get(ctx)
        if table is None:
            table = np.zeros(self._n + 1, dtype=np.uint64)
            self._tables[ctx] = table
        if int(table[self._n]) + self._n < self.max_total:
            table[symbol + 1 :] += np.uint64(1)
        if self.order:
            self._recent = (ctx + (symbol,))[-self.order :]

    def spawn(self) -> "AdaptiveContextModel":
        return AdaptiveContextModel(self.order, self._n, self.max_total)

    def state_digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"o{self.order}/n{self._n}/cap{self.max_total}".encode())
        h.update(repr(self._recent).encode())
        for ctx in sorted(self._tables):
            h.update(repr(ctx).encode())
            h.update(self._tables[ctx].tobytes())
        return h.hexdigest()


_REGISTRY: dict[str, Callable[[int], ProbabilityModel]] = {}


def register_model(model_id: str, factory: Callable[[int], ProbabilityModel]) -> None:
    """Register a byte-alphabet model factory for container round trips.

    The factory receives the coder's frequency cap (``2 ** freq_bits``)
    and must return a fresh model whose ``model_id`` matches."""
    _REGISTRY[model_id] = factory


def build_model(model_id: str, freq_cap: int) -> ProbabilityModel:
    try:
        factory = _REGISTRY[model_id]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise InputError(f"unknown model id {model_id!r}; known: {known}") from None
    return factory(freq_cap)


def registered_model_ids() -> list[str]:
    return sorted(_REGISTRY)


register_model("uniform-256", lambda cap: StaticModel.uniform(256))
register_model("adaptive-o2", lambda cap: AdaptiveContextModel(2, 256, max_total=cap))
