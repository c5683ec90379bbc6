"""Per-token log-likelihood extraction from causal language models.

Produces newline-delimited records in the evaluation engine's wire
format (sample_id, model_id, token_ids, nll_bits in base 2,
vocab_size_used) plus a run manifest carrying the tokenizer digest so
engine and adapter can prove they tokenized identically. The measurement
protocol is pinned: temperature 1, logits truncated to the tokenizer
vocabulary before softmax, logits promoted to float32, first token
excluded.
"""

from .bpe import ByteBpe
from .config import AdapterConfig, AdapterError, SampleTooShort
from .export import export_run, iter_samples
from .scoring import (
    score_sample,
    score_token_batch,
    score_tokens,
    truncated_probability_mass,
)
from .tiny_model import TinyCausalLM
from .wire import record_to_line, validate_record, validate_record_line

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "SampleTooShort",
    "ByteBpe",
    "TinyCausalLM",
    "score_sample",
    "score_tokens",
    "score_token_batch",
    "truncated_probability_mass",
    "export_run",
    "iter_samples",
    "validate_record",
    "validate_record_line",
    "record_to_line",
    "__version__",
]
