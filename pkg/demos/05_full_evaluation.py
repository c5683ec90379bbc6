#!/usr/bin/env python3
"""The whole pipeline on a toy corpus, no GPU anywhere.

Real runs consume per-token likelihood records produced by an external
adapter around an actual model. Here the built-in adaptive coder stands
in for the model: its per-symbol code lengths are genuine negative
log2-likelihoods, so every downstream stage (selection, truncation,
joining, aggregation, ranking, plot data) runs exactly as in production.
"""

import math
import tempfile
from pathlib import Path

from infocap.codec import AdaptiveContextModel, CoderConfig
from infocap.flops import ArchitectureDescriptor, estimate_flops
from infocap.metrics import BiasTable
from infocap.pipeline import (
    DatasetSpec,
    RunManifest,
    TokenNllRecord,
    evaluate_records,
    select_samples,
    truncate,
    write_records,
)
from infocap.report import emit_plot_data, format_leaderboard, format_results, rank
from infocap.tokenizer import BYTE_TO_CHAR, TokenizerDef, encode, tokenizer_digest

SEQ_LEN = 96
BYTE_VOCAB = {BYTE_TO_CHAR[b]: b for b in range(256)}

# ---------------------------------------------------------------------------
# 1. A corpus: one file per sample.
# ---------------------------------------------------------------------------
workdir = Path(tempfile.mkdtemp(prefix="infocap-demo-"))
corpus_dir = workdir / "corpus"
corpus_dir.mkdir()
sentences = [
    "the cat sat on the mat and the dog sat on the log while rain fell",
    "compression is prediction and prediction is compression, over and over",
    "a model that knows the next byte owes the channel almost nothing at all",
    "four score and seven tokens ago this corpus began to repeat itself badly",
]
for i, base in enumerate(sentences * 3):
    (corpus_dir / f"sample_{i:02d}.txt").write_text(f"{base}. take {i}. {base}.")

tok = TokenizerDef(vocab=dict(BYTE_VOCAB), merges=())
spec = DatasetSpec(dataset_id="toy", sources=(corpus_dir,), seq_len=SEQ_LEN)
samples = select_samples(spec, [tok])
print(f"corpus: {len(samples)} samples of >= {SEQ_LEN} tokens under every tokenizer")

# ---------------------------------------------------------------------------
# 2. "Score" each sample with two synthetic models of different skill:
#    adaptive coders of order 1 and 2. Per-token code lengths are the
#    NLL record entries; the first token is never predicted.
# ---------------------------------------------------------------------------
cfg = CoderConfig()


def score(sample_bytes: bytes, order: int) -> list[float]:
    model = AdaptiveContextModel(order, 256, cfg.freq_cap)
    nll = []
    for i, symbol in enumerate(sample_bytes):
        cum = model.cumulative_freqs()
        width = int(cum[symbol + 1]) - int(cum[symbol])
        if i > 0:
            nll.append(math.log2(int(cum[-1])) - math.log2(width))
        model.observe(symbol)
    return nll


records = []
for order in (1, 2):
    for sample in samples:
        spans = truncate(encode(tok, sample.data), SEQ_LEN)
        symbols = bytes(s.token_id for s in spans)
        records.append(
            TokenNllRecord(
                sample_id=sample.sample_id,
                model_id=f"adaptive-o{order}",
                token_ids=tuple(symbols),
                nll_bits=tuple(score(symbols, order)),
                vocab_size_used=tok.vocab_size,
            )
        )
records_path = workdir / "records.jsonl"
write_records(records_path, records)
RunManifest(
    dataset_id="toy",
    seq_len=SEQ_LEN,
    tokenizer_digest=tokenizer_digest(tok),
    adapter_settings={"kind": "adaptive-coder-demo"},
).save(workdir / "manifest.json")
print(f"wrote {len(records)} records -> {records_path}")

# ---------------------------------------------------------------------------
# 3. Evaluate: records + tokenizer + FLOPs estimate + bias table.
#    The corpus mapping makes the join re-verify every token id.
# ---------------------------------------------------------------------------
arch = ArchitectureDescriptor(
    hidden_size=64, num_layers=2, num_q_heads=4, num_kv_heads=4, head_dim=16,
    ffn_hidden=256, ffn_matrices=3, vocab_size=256,
)
results, per_sample = evaluate_records(
    records,
    tok,
    estimate_flops(arch),
    dataset_id="toy",
    bias_table=BiasTable({"toy": -2.0}),
    corpus={s.sample_id: s.data for s in samples},
    seq_len=SEQ_LEN,
    workers=4,
)
print()
print(format_results(results, "table"))

# ---------------------------------------------------------------------------
# 4. Rank and emit plot data.
# ---------------------------------------------------------------------------
print(format_leaderboard(rank(results), "table"))
print(emit_plot_data(results, "ic_vs_bits_per_token"))
print(f"(per-sample capacities available for {len(per_sample)} rows; workdir {workdir})")
