"""Inference FLOPs per token from a transformer architecture descriptor.

Counts 2 FLOPs per multiply-accumulate for every matrix product,
including attention scores and value mixing. Embedding lookup is free;
the LM head is always counted, tied or not; normalization, residuals and
activations are excluded (sub-percent at the scales of interest). For
mixture-of-experts layers only the shared expert plus the routed experts
actually activated per token contribute, so the total expert count never
changes the estimate: two models differing only in expert count but
activating the same number are assigned identical FLOPs. The router
matmul is likewise excluded to preserve that equality exactly.

The estimate splits into a context-independent linear part and a
per-context-token attention coefficient:

    total(c) = flops_per_token_linear + c * flops_per_token_attn_coeff

Config loading understands the field names of commonly published model
configs; the mapping is documented on :func:`load_descriptor`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import DescriptorError, DomainError, ParseError

logger = logging.getLogger(__name__)

__all__ = [
    "MoEConfig",
    "ArchitectureDescriptor",
    "FlopsEstimate",
    "estimate_flops",
    "mean_flops_per_token",
    "load_descriptor",
    "load_descriptor_file",
]


def _positive(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise DescriptorError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class MoEConfig:
    """Sparse FFN configuration: per token, ``experts_per_token`` routed
    experts of width ``expert_ffn_hidden`` plus an always-on shared
    expert of width ``shared_expert_ffn_hidden`` (0 for none) run in the
    layers listed in ``moe_layers`` (None means every layer)."""

    num_experts: int
    experts_per_token: int
    expert_ffn_hidden: int
    shared_expert_ffn_hidden: int = 0
    moe_layers: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        _positive("num_experts", self.num_experts)
        _positive("experts_per_token", self.experts_per_token)
        _positive("expert_ffn_hidden", self.expert_ffn_hidden)
        if self.shared_expert_ffn_hidden < 0:
            raise DescriptorError("shared_expert_ffn_hidden must be >= 0")
        if self.experts_per_token > self.num_experts:
            raise DescriptorError(
                f"experts_per_token ({self.experts_per_token}) exceeds "
                f"num_experts ({self.num_experts})"
            )


@dataclass(frozen=True)
class ArchitectureDescriptor:
    hidden_size: int
    num_layers: int
    num_q_heads: int
    num_kv_heads: int
    head_dim: int
    ffn_hidden: int
    ffn_matrices: int
    vocab_size: int
    tied_embeddings: bool = False
    moe: MoEConfig | None = None

    def __post_init__(self) -> None:
        for name in (
            "hidden_size",
            "num_layers",
            "num_q_heads",
            "num_kv_heads",
            "head_dim",
            "ffn_hidden",
            "vocab_size",
        ):
            _positive(name, getattr(self, name))
        if self.ffn_matrices not in (2, 3):
            raise DescriptorError(
                f"ffn_matrices must be 2 (plain MLP) or 3 (gated), got {self.ffn_matrices!r}"
            )
        if self.num_q_heads % self.num_kv_heads != 0:
            raise DescriptorError(
                f"num_q_heads ({self.num_q_heads}) must be a multiple of "
                f"num_kv_heads ({self.num_kv_heads})"
            )
        if self.moe is not None and self.moe.moe_layers is not None:
            bad = [i for i in self.moe.moe_layers if not 0 <= i < self.num_layers]
            if bad:
                raise DescriptorError(
                    f"moe_layers indices out of range [0, {self.num_layers}): {bad[:5]}"
                )

    def moe_layer_indices(self) -> frozenset[int]:
        if self.moe is None:
            return frozenset()
        if self.moe.moe_layers is None:
            return frozenset(range(self.num_layers))
        return frozenset(self.moe.moe_layers)


@dataclass(frozen=True)
class FlopsEstimate:
    """Per-token cost split into a linear part and an attention
    coefficient that multiplies the context length. The breakdown keys
    are ``attention_projections``, ``ffn`` and ``lm_head``; they sum to
    the linear part exactly."""

    flops_per_token_linear: int
    flops_per_token_attn_coeff: int
    breakdown: Mapping[str, int]

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.breakdown.values()):
            raise DomainError("breakdown components must be non-negative")
        if sum(self.breakdown.values()) != self.flops_per_token_linear:
            raise DomainError("breakdown components must sum to the linear part")
        if self.flops_per_token_attn_coeff < 0:
            raise DomainError("attention coefficient must be non-negative")

    def total_at_context(self, context_tokens: float) -> float:
        """FLOPs for one token attending to ``context_tokens`` prior tokens."""
        return self.flops_per_token_linear + context_tokens * self.flops_per_token_attn_coeff


def estimate_flops(arch: ArchitectureDescriptor) -> FlopsEstimate:
    """Count per-token inference FLOPs for a descriptor.

    Linear part: 2 x (attention projection params + activated FFN params
    + LM head params). Attention coefficient: 4 x q_heads x head_dim per
    layer (score and value products at 2 FLOPs per MAC each).
    """
    h = arch.hidden_size
    q_width = arch.num_q_heads * arch.head_dim
    kv_width = arch.num_kv_heads * arch.head_dim
    attn_proj_params = arch.num_layers * (2 * h * q_width + 2 * h * kv_width)

    moe_layers = arch.moe_layer_indices()
    dense_ffn_params = arch.ffn_matrices * h * arch.ffn_hidden
    if arch.moe is not None:
        activated_width = (
            arch.moe.shared_expert_ffn_hidden
            + arch.moe.experts_per_token * arch.moe.expert_ffn_hidden
        )
        moe_ffn_params = arch.ffn_matrices * h * activated_width
    else:
        moe_ffn_params = 0
    ffn_params = sum(
        moe_ffn_params if layer in moe_layers else dense_ffn_params
        for layer in range(arch.num_layers)
    )
    lm_head_params = h * arch.vocab_size

    breakdown = {
        "attention_projections": 2 * attn_proj_params,
        "ffn": 2 * ffn_params,
        "lm_head": 2 * lm_head_params,
    }
    return FlopsEstimate(
        flops_per_token_linear=sum(breakdown.values()),
        flops_per_token_attn_coeff=4 * arch.num_q_heads * arch.head_dim * arch.num_layers,
        breakdown=breakdown,
    )


def mean_flops_per_token(est: FlopsEstimate, seq_len: int) -> float:
    """Average per-token cost over the predicted tokens of an L-token sample.

    Token i (1-based) attends to i-1 prior tokens; averaging i-1 over
    i = 2..L gives exactly L/2, so the mean is
    ``linear + coeff * L / 2``. The unpredicted first token is excluded,
    mirroring the text and likelihood accounting.
    """
    if seq_len < 2:
        raise DomainError(f"seq_len must be >= 2, got {seq_len}")
    return est.flops_per_token_linear + est.flops_per_token_attn_coeff * (seq_len / 2.0)


#: Accepted config field names, in lookup order.
_FIELD_ALIASES: Mapping[str, tuple[str, ...]] = {
    "hidden_size": ("hidden_size", "n_embd", "d_model"),
    "num_layers": ("num_hidden_layers", "num_layers", "n_layer"),
    "num_q_heads": ("num_attention_heads", "num_q_heads", "n_head"),
    "num_kv_heads": ("num_key_value_heads", "num_kv_heads"),
    "head_dim": ("head_dim",),
    "ffn_hidden": ("intermediate_size", "ffn_hidden", "n_inner"),
    "ffn_matrices": ("ffn_matrices",),
    "vocab_size": ("vocab_size",),
    "tied_embeddings": ("tie_word_embeddings", "tied_embeddings"),
    "moe_num_experts": ("num_experts", "n_routed_experts", "num_local_experts"),
    "moe_experts_per_token": ("num_experts_per_tok", "experts_per_token", "moe_top_k"),
    "moe_expert_ffn_hidden": ("moe_intermediate_size", "expert_ffn_hidden"),
    "moe_shared_expert_ffn_hidden": (
        "shared_expert_intermediate_size",
        "shared_expert_ffn_hidden",
    ),
    "moe_n_shared_experts": ("n_shared_experts",),
    "moe_layers": ("moe_layers",),
    "moe_first_k_dense": ("first_k_dense_replace",),
}


def _lookup(config: Mapping, logical: str):
    for alias in _FIELD_ALIASES[logical]:
        if alias in config:
            return config[alias]
    return None


def load_descriptor(source: str | bytes | Mapping) -> ArchitectureDescriptor:
    """Build a descriptor from a model config mapping or its JSON text.

    Field mapping (first present alias wins):

    ====================  =================================================
    descriptor field      accepted config keys
    ====================  =================================================
    hidden_size           hidden_size, n_embd, d_model
    num_layers            num_hidden_layers, num_layers, n_layer
    num_q_heads           num_attention_heads, num_q_heads, n_head
    num_kv_heads          num_key_value_heads (default: num_q_heads)
    head_dim              head_dim (default: hidden_size // num_q_heads)
    ffn_hidden            intermediate_size, ffn_hidden, n_inner
    ffn_matrices          ffn_matrices (default: 3, gated)
    vocab_size            vocab_size
    tied_embeddings       tie_word_embeddings (default: false)
    moe.num_experts       num_experts, n_routed_experts, num_local_experts
    moe.experts_per_token num_experts_per_tok, moe_top_k
    moe.expert_ffn_hidden moe_intermediate_size (default: intermediate_size)
    moe.shared_expert...  shared_expert_intermediate_size, or
                          n_shared_experts * moe_intermediate_size
    moe.moe_layers        moe_layers, or layers >= first_k_dense_replace
    ====================  =================================================

    Unknown keys are ignored with a warning; missing required fields
    raise :class:`DescriptorError` naming them.
    """
    if isinstance(source, (str, bytes)):
        try:
            config = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"descriptor config is not valid JSON: {exc}") from None
    else:
        config = dict(source)
    if not isinstance(config, Mapping):
        raise ParseError("descriptor config must be a JSON object")

    recognized = {alias for aliases in _FIELD_ALIASES.values() for alias in aliases}
    unknown = sorted(k for k in config if k not in recognized)
    if unknown:
        logger.warning("ignoring unrecognized config fields: %s", ", ".join(unknown))

    moe_num_experts = _lookup(config, "moe_num_experts")
    missing = [
        _FIELD_ALIASES[name][0]
        for name in ("hidden_size", "num_layers", "num_q_heads", "vocab_size")
        if _lookup(config, name) is None
    ]
    if _lookup(config, "ffn_hidden") is None and moe_num_experts is None:
        missing.append("intermediate_size")
    if missing:
        raise DescriptorError(f"config is missing required fields: {', '.join(missing)}")

    hidden_size = int(_lookup(config, "hidden_size"))
    num_layers = int(_lookup(config, "num_layers"))
    num_q_heads = int(_lookup(config, "num_q_heads"))
    num_kv_heads = int(_lookup(config, "num_kv_heads") or num_q_heads)
    if num_q_heads <= 0 or hidden_size <= 0:
        raise DescriptorError(
            f"hidden_size and num_attention_heads must be positive, got "
            f"{hidden_size} and {num_q_heads}"
        )
    head_dim = int(_lookup(config, "head_dim") or hidden_size // num_q_heads)
    ffn_matrices = int(_lookup(config, "ffn_matrices") or 3)

    moe = None
    if moe_num_experts is not None:
        experts_per_token = _lookup(config, "moe_experts_per_token")
        if experts_per_token is None:
            raise DescriptorError(
                "config declares experts but is missing num_experts_per_tok"
            )
        expert_ffn = _lookup(config, "moe_expert_ffn_hidden") or _lookup(config, "ffn_hidden")
        if expert_ffn is None:
            raise DescriptorError("config is missing moe_intermediate_size")
        shared = _lookup(config, "moe_shared_expert_ffn_hidden")
        if shared is None:
            n_shared = _lookup(config, "moe_n_shared_experts")
            shared = int(n_shared) * int(expert_ffn) if n_shared else 0
        explicit_layers = _lookup(config, "moe_layers")
        first_k_dense = _lookup(config, "moe_first_k_dense")
        if explicit_layers is not None:
            moe_layers = tuple(int(i) for i in explicit_layers)
        elif first_k_dense is not None:
            moe_layers = tuple(range(int(first_k_dense), num_layers))
        else:
            moe_layers = None
        moe = MoEConfig(
            num_experts=int(moe_num_experts),
            experts_per_token=int(experts_per_token),
            expert_ffn_hidden=int(expert_ffn),
            shared_expert_ffn_hidden=int(shared),
            moe_layers=moe_layers,
        )

    ffn_hidden = _lookup(config, "ffn_hidden")
    if ffn_hidden is None:
        # All layers sparse: the dense width is never used, but the field
        # is required; fall back to the expert width.
        ffn_hidden = moe.expert_ffn_hidden
    return ArchitectureDescriptor(
        hidden_size=hidden_size,
        num_layers=num_layers,
        num_q_heads=num_q_heads,
        num_kv_heads=num_kv_heads,
        head_dim=head_dim,
        ffn_hidden=int(ffn_hidden),
        ffn_matrices=ffn_matrices,
        vocab_size=int(_lookup(config, "vocab_size")),
        tied_embeddings=bool(_lookup(config, "tied_embeddings") or False),
        moe=moe,
    )


def load_descriptor_file(path: str | Path) -> ArchitectureDescriptor:
    return load_descriptor(Path(path).read_text(encoding="utf-8"))
