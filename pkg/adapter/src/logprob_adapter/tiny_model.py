"""A small self-contained causal transformer for adapter tests and demos.

Downloading checkpoints is out of reach in offline environments, so this
stands in for an open-weight model: deterministic seeded weights, bf16
storage like real releases, and a logits row deliberately wider than the
tokenizer's vocabulary (the padded tail is driven to large negative
values, mimicking the untrained "ineffective" logits real checkpoints
carry for kernel-friendly shapes). Everything the adapter must handle is
therefore present: dtype promotion, logits truncation, causal masking,
and batches.
"""

from __future__ import annotations

import hashlib
import math

import torch
import torch.nn as nn
import torch.nn.functional as F

PAD_SLOTS = 16
PAD_LOGIT_BIAS = -30.0


class _Block(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.ln2 = nn.LayerNorm(dim)
        self.mlp = nn.Sequential(
            nn.Linear(dim, 4 * dim), nn.GELU(), nn.Linear(4 * dim, dim)
        )

    def forward(self, x: torch.Tensor, attn_mask: torch.Tensor, pad_mask: torch.Tensor | None):
        h = self.ln1(x)
        attn_out, _ = self.attn(
            h, h, h, attn_mask=attn_mask, key_padding_mask=pad_mask, need_weights=False
        )
        x = x + attn_out
        return x + self.mlp(self.ln2(x))


class TinyCausalLM(nn.Module):
    """Byte-ish causal LM whose logits row exceeds the vocabulary."""

    def __init__(self, vocab_size: int, dim: int = 64, heads: int = 4, layers: int = 2, seed: int = 0):
        super().__init__()
        torch.manual_seed(seed)
        self.vocab_size = vocab_size
        self.logits_width = vocab_size + PAD_SLOTS
        self.embed = nn.Embedding(self.logits_width, dim)
        self.pos = nn.Embedding(512, dim)
        self.blocks = nn.ModuleList([_Block(dim, heads) for _ in range(layers)])
        self.ln_f = nn.LayerNorm(dim)
        self.head = nn.Linear(dim, self.logits_width, bias=True)
        with torch.no_grad():
            # The padded tail is never a legal token; pin it far below
            # everything else, as trained checkpoints effectively do.
            self.head.bias[vocab_size:] = PAD_LOGIT_BIAS
        self.to(torch.bfloat16)
        self.eval()

    @torch.no_grad()
    def forward(self, token_ids: torch.Tensor, pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        """token_ids [batch, seq] -> logits [batch, seq, logits_width] (bf16).

        ``pad_mask`` marks padding positions True; padded keys are
        excluded from attention so batch composition cannot leak across
        samples.
        """
        batch, seq = token_ids.shape
        positions = torch.arange(seq, device=token_ids.device)
        x = self.embed(token_ids) + self.pos(positions)[None, :, :]
        causal = torch.triu(
            torch.ones((seq, seq), dtype=torch.bool, device=token_ids.device),
            diagonal=1,
        )
        for block in self.blocks:
            x = block(x, causal, pad_mask)
        return self.head(self.ln_f(x))

    def weights_digest(self) -> str:
        h = hashlib.sha256()
        for name, tensor in sorted(self.state_dict().items()):
            h.update(name.encode())
            h.update(tensor.detach().cpu().to(torch.float32).numpy().tobytes())
        return h.hexdigest()[:16]

    @torch.no_grad()
    def mean_cross_entropy(self, token_ids: list[int]) -> float:
        """The model's own report of mean next-token loss (nats) over
        tokens 2..L, full logits row, float32. Used as an independent
        oracle for the adapter's bit accounting."""
        ids = torch.tensor([token_ids], dtype=torch.long)
        logits = self.forward(ids)[0, :-1, :].float()
        targets = ids[0, 1:]
        return float(F.cross_entropy(logits, targets).item())
