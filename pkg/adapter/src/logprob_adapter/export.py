"""Scoring runs: dataset in, record file plus manifest out.

Samples stream from the same dataset shapes the engine reads (JSONL with
a ``text`` field, or a directory of one-file-per-sample text). Output is
written atomically: records go to a temporary file, every line is
validated against the wire schema, a fraction of batch-scored samples is
re-scored individually to prove padding and batch composition changed
nothing, and only then is the file renamed into place. A partial or
self-inconsistent run leaves nothing behind but the temp file's absence.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from pathlib import Path
from typing import Iterator

from .bpe import ByteBpe
from .config import AdapterConfig, AdapterError, SampleTooShort
from .scoring import score_token_batch, score_tokens
from .wire import record_to_line, validate_record_line

logger = logging.getLogger(__name__)

RECHECK_EVERY = 100  # single-sample re-validation cadence (1% of records)
RECHECK_TOLERANCE_BITS = 1e-3


def iter_samples(path: str | Path) -> Iterator[tuple[str, bytes]]:
    """Yield (sample_id, raw bytes); ids are content digests, like the engine's."""
    path = Path(path)
    if path.is_dir():
        children: Iterator[bytes] = (
            p.read_bytes() for p in sorted(path.iterdir()) if p.is_file()
        )
    elif path.is_file():
        def _lines() -> Iterator[bytes]:
            with path.open("r", encoding="utf-8") as fp:
                for lineno, line in enumerate(fp, start=1):
                    if not line.strip():
                        continue
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise AdapterError(f"{path}:{lineno}: bad JSON: {exc}") from None
                    if "text" not in obj:
                        raise AdapterError(f"{path}:{lineno}: no 'text' field")
                    yield str(obj["text"]).encode("utf-8")

        children = _lines()
    else:
        raise AdapterError(f"dataset {path} is not a file or directory")
    seen = set()
    for data in children:
        sid = hashlib.sha256(data).hexdigest()[:16]
        if sid not in seen:
            seen.add(sid)
            yield sid, data


def export_run(
    model,
    tok: ByteBpe,
    cfg: AdapterConfig,
    dataset_path: str | Path,
    records_path: str | Path,
    manifest_path: str | Path,
    dataset_id: str = "corpus",
) -> int:
    """Score a dataset and write records plus manifest; returns record count."""
    records_path = Path(records_path)
    manifest_path = Path(manifest_path)

    eligible: list[tuple[str, list[int]]] = []
    skipped = 0
    for sid, data in iter_samples(dataset_path):
        token_ids = tok.encode(data)
        if len(token_ids) < cfg.seq_len:
            skipped += 1
            logger.info(
                "skipping %s: %d tokens < seq_len %d", sid, len(token_ids), cfg.seq_len
            )
            continue
        eligible.append((sid, token_ids[: cfg.seq_len]))
    if skipped:
        logger.warning("skipped %d samples shorter than seq_len", skipped)

    lines: list[str] = []
    for start in range(0, len(eligible), cfg.batch_size):
        batch = eligible[start : start + cfg.batch_size]
        nll_rows = score_token_batch(model, [ids for _, ids in batch], cfg)
        for (sid, ids), nll_bits in zip(batch, nll_rows):
            lines.append(
                record_to_line(
                    {
                        "sample_id": sid,
                        "model_id": cfg.model_id,
                        "token_ids": ids,
                        "nll_bits": nll_bits,
                        "vocab_size_used": cfg.vocab_truncate,
                    }
                )
            )

    # Self-checks before anything becomes visible.
    parsed = [
        validate_record_line(line, f"self-check line {i + 1}")
        for i, line in enumerate(lines)
    ]
    for index in range(0, len(parsed), RECHECK_EVERY):
        record = parsed[index]
        single = score_tokens(model, record["token_ids"], cfg)
        drift = max(
            (abs(a - b) for a, b in zip(single, record["nll_bits"])), default=0.0
        )
        if drift > RECHECK_TOLERANCE_BITS or math.isnan(drift):
            raise AdapterError(
                f"batch scoring drifted {drift:.2e} bits from single-sample "
                f"scoring on record {index}; padding contamination suspected"
            )

    tmp = records_path.with_suffix(records_path.suffix + ".tmp")
    tmp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    os.replace(tmp, records_path)

    manifest = {
        "dataset_id": dataset_id,
        "seq_len": cfg.seq_len,
        "tokenizer_digest": tok.digest(),
        "adapter_settings": {
            "model_id": cfg.model_id,
            "model_digest": model.weights_digest(),
            "vocab_truncate": cfg.vocab_truncate,
            "temperature": cfg.temperature,
            "precision_promotion": cfg.precision_promotion,
            "batch_size": cfg.batch_size,
            "device": cfg.device,
        },
    }
    tmp_manifest = manifest_path.with_suffix(manifest_path.suffix + ".tmp")
    tmp_manifest.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    os.replace(tmp_manifest, manifest_path)
    return len(lines)
