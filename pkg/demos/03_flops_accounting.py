#!/usr/bin/env python3
"""Per-token FLOPs: the denominator of the capacity metric.

Costs split into a context-independent linear part (projections, FFN,
LM head; 2 FLOPs per multiply-accumulate) and an attention coefficient
paid once per context token. Mixture-of-experts layers charge only the
experts a token actually activates, so total expert count is invisible
while the activated set stays fixed.
"""

import dataclasses
import json

from infocap.flops import (
    ArchitectureDescriptor,
    MoEConfig,
    estimate_flops,
    load_descriptor,
    mean_flops_per_token,
)

# ---------------------------------------------------------------------------
# A small dense model, hand-checkable.
# ---------------------------------------------------------------------------
dense = ArchitectureDescriptor(
    hidden_size=64,
    num_layers=2,
    num_q_heads=4,
    num_kv_heads=4,
    head_dim=16,
    ffn_hidden=256,
    ffn_matrices=3,  # gated MLP
    vocab_size=1000,
)
est = estimate_flops(dense)
print("dense breakdown:", dict(est.breakdown))
print("linear/token:", est.flops_per_token_linear, " attn coeff:", est.flops_per_token_attn_coeff)
for L in (2, 128, 1024, 2048):
    print(f"  mean FLOPs/token at L={L:4d}: {mean_flops_per_token(est, L):,.0f}")
print()

# ---------------------------------------------------------------------------
# Grouped-query attention shrinks only the k/v projections.
# ---------------------------------------------------------------------------
gqa = dataclasses.replace(dense, num_kv_heads=1)
print("GQA attn projections:", estimate_flops(gqa).breakdown["attention_projections"],
      "vs MHA:", est.breakdown["attention_projections"])
print()

# ---------------------------------------------------------------------------
# Sparse FFN: 64 experts exist, 4 run. Doubling the expert pool changes
# nothing per token; that's the sparsity effect in one line.
# ---------------------------------------------------------------------------
moe = dataclasses.replace(
    dense,
    moe=MoEConfig(num_experts=64, experts_per_token=4, expert_ffn_hidden=64,
                  shared_expert_ffn_hidden=32),
)
wider_pool = dataclasses.replace(
    moe, moe=dataclasses.replace(moe.moe, num_experts=128)
)
print("moe ffn flops:", estimate_flops(moe).breakdown["ffn"])
print("128-expert pool identical:", estimate_flops(moe) == estimate_flops(wider_pool))

# Full activation degenerates to a dense model of the summed width.
degenerate = dataclasses.replace(
    dense,
    ffn_hidden=64,
    moe=MoEConfig(num_experts=4, experts_per_token=4, expert_ffn_hidden=64),
)
assert estimate_flops(degenerate) == estimate_flops(dataclasses.replace(dense, ffn_hidden=256))
print("4-of-4 experts == dense of 4x width:", True)
print()

# ---------------------------------------------------------------------------
# Descriptors load from the field names found in published configs.
# ---------------------------------------------------------------------------
config = {
    "hidden_size": 2048,
    "num_hidden_layers": 24,
    "num_attention_heads": 16,
    "num_key_value_heads": 8,
    "intermediate_size": 8192,
    "vocab_size": 151_936,
    "tie_word_embeddings": True,
}
arch = load_descriptor(json.dumps(config))
big = estimate_flops(arch)
print(f"published-style config: {mean_flops_per_token(big, 1024):.4e} FLOPs/token at L=1024")
