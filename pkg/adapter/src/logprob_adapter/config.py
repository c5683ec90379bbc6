"""Scoring configuration for the measurement protocol.

The protocol is fixed where it matters: temperature is pinned to 1
(recommended generation temperatures tune sampling, not probability
estimation of given text), logits are truncated to the tokenizer's
vocabulary before the softmax (modern checkpoints pad the logits row for
kernel efficiency; the padding is never a real token), and logits are
promoted from their storage dtype to float32 before the log-softmax.
"""

from __future__ import annotations

from dataclasses import dataclass


class AdapterError(Exception):
    """Base error for the adapter."""


class SampleTooShort(AdapterError):
    """The sample does not reach the truncation length; callers skip it."""


@dataclass(frozen=True)
class AdapterConfig:
    model_id: str
    seq_len: int
    vocab_truncate: int
    temperature: float = 1.0
    precision_promotion: bool = True
    batch_size: int = 4
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.temperature != 1.0:
            raise AdapterError(
                "temperature is fixed at 1 for likelihood measurement, "
                f"got {self.temperature}"
            )
        if self.seq_len < 2:
            raise AdapterError(f"seq_len must be >= 2, got {self.seq_len}")
        if self.vocab_truncate < 1:
            raise AdapterError("vocab_truncate must be positive")
        if self.batch_size < 1:
            raise AdapterError("batch_size must be >= 1")
