"""Adapter acceptance: the scoring oracle, the wire schema, and exact
tokenizer agreement with the evaluation engine.

The forward-pass cross-entropy reported by the model itself (natural
log, full logits row, mean reduction) is an independent computation of
the very quantity the adapter records in bits, so
``mean(nll_bits) * ln(2)`` must match it to 1e-3. Tokenizer agreement is
checked across implementations: the engine CLI tokenizes the same corpus
and must produce byte-identical token ids and the same definition
digest.
"""

import json
import math
import subprocess
import sys

from logprob_adapter import export_run, validate_record_line


def _report(detail: str) -> None:
    print(f"[acceptance] criterion 8: PASS - {detail}")


def test_criterion_8_adapter_oracle(model, tok, cfg, corpus_file, tmp_path):
    records_path = tmp_path / "records.jsonl"
    manifest_path = tmp_path / "manifest.json"
    count = export_run(
        model, tok, cfg, corpus_file, records_path, manifest_path, dataset_id="toy"
    )
    assert count == 10

    # Wire schema: every line validates.
    lines = records_path.read_text().splitlines()
    records = [validate_record_line(line, f"line {i}") for i, line in enumerate(lines)]

    # Oracle: per sample, mean(nll_bits) * ln2 == model's own mean
    # cross-entropy on tokens 2..L (full-width logits, nats).
    worst = 0.0
    for record in records:
        mean_bits = sum(record["nll_bits"]) / len(record["nll_bits"])
        reported = model.mean_cross_entropy(record["token_ids"])
        worst = max(worst, abs(mean_bits * math.log(2.0) - reported))
    assert worst <= 1e-3, f"oracle drift {worst:.2e} nats"

    # Cross-implementation tokenizer agreement, via the engine CLI only.
    ids_path = tmp_path / "engine_ids.jsonl"
    stats = subprocess.run(
        [
            sys.executable,
            "-m",
            "infocap",
            "tokenize",
            str(corpus_file),
            "--tokenizer",
            str(cfg_tokenizer_path := _tokenizer_path_of(tok, tmp_path)),
            "--ids",
            str(ids_path),
            "--format",
            "jsonl",
        ],
        capture_output=True,
        text=True,
    )
    assert stats.returncode == 0, stats.stderr
    engine_stats = json.loads(stats.stdout)

    manifest = json.loads(manifest_path.read_text())
    assert engine_stats["tokenizer_digest"] == manifest["tokenizer_digest"]

    engine_ids = {
        obj["sample_id"]: obj["token_ids"]
        for obj in map(json.loads, ids_path.read_text().splitlines())
    }
    for record in records:
        engine_tokens = engine_ids[record["sample_id"]][: cfg.seq_len]
        assert engine_tokens == record["token_ids"], record["sample_id"]

    _report(
        f"{count} records schema-valid; oracle drift {worst:.2e} nats <= 1e-3; "
        "token ids and tokenizer digest identical to the engine"
    )


def _tokenizer_path_of(tok, tmp_path):
    """Serialize the adapter's tokenizer back to the shared file form."""
    path = tmp_path / "tokenizer.json"
    path.write_text(
        json.dumps(
            {
                "vocab": tok.vocab,
                "merges": [list(m) for m in tok.merges],
                "byte_level": True,
                "special_tokens": tok.special_ids,
            },
            ensure_ascii=False,
        ),
        encoding="utf-8",
    )
    return path
