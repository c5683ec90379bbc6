"""Per-token negative log2-likelihood extraction.

The measurement contract, applied at the model boundary:

* truncate the sample to exactly ``seq_len`` tokens;
* run the model once over the truncated ids;
* slice the logits row down to the tokenizer's vocabulary width before
  any softmax (the padded tail is not probability mass);
* promote logits to float32 first when the model stores less precision;
* temperature stays 1;
* record -log2 p for tokens 2..L only; the first token has no context
  and is excluded everywhere downstream too.

Scores are computed in batches for throughput; every batch is assembled
from same-length rows with explicit padding masks, and callers re-check
a sample of records against single-sample scoring to prove the batch
path changes nothing.
"""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F

from .bpe import ByteBpe
from .config import AdapterConfig, AdapterError, SampleTooShort

LN2 = math.log(2.0)


def _nll_bits_from_logits(logits: torch.Tensor, targets: torch.Tensor, cfg: AdapterConfig) -> torch.Tensor:
    """logits [n, width] for positions 1..L-1, targets [n] -> bits [n]."""
    if cfg.vocab_truncate > logits.shape[-1]:
        raise AdapterError(
            f"vocab_truncate {cfg.vocab_truncate} exceeds logits width {logits.shape[-1]}"
        )
    if cfg.precision_promotion:
        logits = logits.float()
    logits = logits[..., : cfg.vocab_truncate]
    log_probs = F.log_softmax(logits / cfg.temperature, dim=-1)
    nll_nats = -log_probs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    return nll_nats / LN2


def score_tokens(model, token_ids: list[int], cfg: AdapterConfig) -> list[float]:
    """Bits for tokens 2..L of one already-truncated id sequence."""
    if len(token_ids) != cfg.seq_len:
        raise AdapterError(
            f"expected exactly {cfg.seq_len} token ids, got {len(token_ids)}"
        )
    ids = torch.tensor([token_ids], dtype=torch.long, device=cfg.device)
    logits = model(ids)[0]
    bits = _nll_bits_from_logits(logits[:-1], ids[0, 1:], cfg)
    return _checked(bits).tolist()


def score_token_batch(model, batch_ids: list[list[int]], cfg: AdapterConfig) -> list[list[float]]:
    """Batched form of :func:`score_tokens`; rows must all be seq_len long."""
    for row in batch_ids:
        if len(row) != cfg.seq_len:
            raise AdapterError("all batch rows must be exactly seq_len tokens")
    ids = torch.tensor(batch_ids, dtype=torch.long, device=cfg.device)
    pad_mask = torch.zeros(ids.shape, dtype=torch.bool, device=cfg.device)
    logits = model(ids, pad_mask)
    bits = _nll_bits_from_logits(
        logits[:, :-1, :].reshape(-1, logits.shape[-1]),
        ids[:, 1:].reshape(-1),
        cfg,
    ).reshape(ids.shape[0], cfg.seq_len - 1)
    return [_checked(row).tolist() for row in bits]


def _checked(bits: torch.Tensor) -> torch.Tensor:
    if not torch.isfinite(bits).all():
        raise AdapterError(
            "non-finite negative log-likelihood; this signals a truncation or "
            "precision bug, not a bad sample"
        )
    if (bits < 0).any():
        raise AdapterError("negative code length produced; softmax is broken")
    return bits


def score_sample(model, tok: ByteBpe, text: bytes, cfg: AdapterConfig) -> dict:
    """Tokenize, truncate, and score one raw sample into a record dict.

    Raises :class:`SampleTooShort` when the text tokenizes to fewer than
    ``seq_len`` tokens; export loops catch that and skip the sample.
    """
    token_ids = tok.encode(text)
    if len(token_ids) < cfg.seq_len:
        raise SampleTooShort(
            f"{len(token_ids)} tokens < required {cfg.seq_len}"
        )
    token_ids = token_ids[: cfg.seq_len]
    nll_bits = score_tokens(model, token_ids, cfg)
    return {
        "model_id": cfg.model_id,
        "token_ids": token_ids,
        "nll_bits": nll_bits,
        "vocab_size_used": cfg.vocab_truncate,
    }


def truncated_probability_mass(model, token_ids: list[int], cfg: AdapterConfig) -> float:
    """Total probability over the truncated vocabulary; must be ~1.

    Diagnostic for the renormalization contract: after slicing to
    ``vocab_truncate`` and log-softmaxing, exp sums to one per position.
    """
    ids = torch.tensor([token_ids], dtype=torch.long, device=cfg.device)
    logits = model(ids)[0]
    if cfg.precision_promotion:
        logits = logits.float()
    log_probs = F.log_softmax(logits[..., : cfg.vocab_truncate], dim=-1)
    return float(log_probs.exp().sum(dim=-1).mean().item())
