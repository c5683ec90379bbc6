"""Corpus ingestion, sample selection, and measurement assembly.

Datasets arrive either as newline-delimited JSON records with a ``text``
field or as directories with one plain-text file per sample. Samples are
identified by a content digest so ids are stable across machines.
Selection keeps only samples long enough to truncate to the configured
token length under every registered tokenizer, which keeps comparisons
across models on identical text.

Per-token negative log2-likelihoods arrive as newline-delimited records
(one JSON object per line) produced by an external adapter:

    {"sample_id": str, "model_id": str, "token_ids": [int, ...],
     "nll_bits": [float, ...], "vocab_size_used": int}

``nll_bits`` covers tokens 2..L only, so its length is one less than
``token_ids``. Joining such a record with the tokenizer's byte spans and
a FLOPs estimate yields a :class:`~infocap.metrics.SampleMeasurement`;
token ids are compared position by position first, so silently
misaligned joins are impossible.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import (
    DomainError,
    InputError,
    IntegrityError,
    ParseError,
    PipelineError,
)
from .flops import FlopsEstimate
from .metrics import BiasTable, IcResult, SampleMeasurement, aggregate, sample_ic
from .tokenizer import TokenSpan, TokenizerDef, encode, spans_for_ids

logger = logging.getLogger(__name__)

__all__ = [
    "RawSample",
    "DatasetSpec",
    "TokenNllRecord",
    "RunManifest",
    "PerSampleIc",
    "sample_id_for",
    "iter_dataset",
    "select_samples",
    "truncate",
    "join_measurement",
    "read_records",
    "write_records",
    "evaluate_records",
]


class RawSample(NamedTuple):
    sample_id: str
    data: bytes


def sample_id_for(data: bytes) -> str:
    """Stable sample id: first 16 hex digits of SHA-256 over the raw bytes."""
    return hashlib.sha256(data).hexdigest()[:16]


@dataclass(frozen=True)
class DatasetSpec:
    """Where a dataset lives and how it is truncated.

    ``min_token_len`` is the eligibility threshold (defaults to
    ``seq_len``; never below it); ``sample_limit`` optionally caps how
    many qualifying samples are taken, in sample-id order.
    """

    dataset_id: str
    sources: tuple[Path, ...]
    seq_len: int = 1024
    min_token_len: int | None = None
    sample_limit: int | None = None

    def __post_init__(self) -> None:
        if self.seq_len < 2:
            raise DomainError(f"seq_len must be >= 2, got {self.seq_len}")
        if self.min_token_len is not None and self.min_token_len < self.seq_len:
            raise DomainError(
                f"min_token_len ({self.min_token_len}) must be >= seq_len "
                f"({self.seq_len})"
            )
        if self.sample_limit is not None and self.sample_limit < 1:
            raise DomainError(f"sample_limit must be >= 1, got {self.sample_limit}")
        object.__setattr__(self, "sources", tuple(Path(p) for p in self.sources))

    @property
    def threshold(self) -> int:
        return self.min_token_len if self.min_token_len is not None else self.seq_len


def _iter_source(path: Path) -> Iterator[bytes]:
    if path.is_dir():
        for child in sorted(p for p in path.iterdir() if p.is_file()):
            yield child.read_bytes()
        return
    if not path.is_file():
        raise InputError(f"dataset source {path} is not a readable file or directory")
    with path.open("r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON record: {exc}") from None
            if not isinstance(record, dict) or "text" not in record:
                raise ParseError(f"{path}:{lineno}: record has no 'text' field")
            yield str(record["text"]).encode("utf-8")


def iter_dataset(spec: DatasetSpec) -> Iterator[RawSample]:
    """Stream raw samples from all sources; duplicate content is yielded once."""
    seen: set[str] = set()
    for source in spec.sources:
        for data in _iter_source(source):
            sid = sample_id_for(data)
            if sid in seen:
                continue
            seen.add(sid)
            yield RawSample(sid, data)


def select_samples(
    spec: DatasetSpec, tokenizers: Sequence[TokenizerDef]
) -> list[RawSample]:
    """Samples long enough for every tokenizer, sorted by sample id.

    A sample qualifies when its token count reaches the spec threshold
    under *all* registered tokenizers. Since no token spans fewer than
    one byte, samples shorter than the threshold in bytes are dropped
    before tokenizing anything.
    """
    if not tokenizers:
        raise InputError("select_samples needs at least one tokenizer")
    threshold = spec.threshold
    kept = []
    for sample in iter_dataset(spec):
        if len(sample.data) < threshold:
            continue
        if all(len(encode(tok, sample.data)) >= threshold for tok in tokenizers):
            kept.append(sample)
    kept.sort(key=lambda s: s.sample_id)
    if spec.sample_limit is not None:
        kept = kept[: spec.sample_limit]
    if not kept:
        logger.warning(
            "dataset %s: no samples reach %d tokens under all %d tokenizers",
            spec.dataset_id,
            threshold,
            len(tokenizers),
        )
    return kept


def truncate(spans: Sequence[TokenSpan], seq_len: int) -> list[TokenSpan]:
    """First ``seq_len`` spans exactly; selection should have guaranteed them."""
    if len(spans) < seq_len:
        raise PipelineError(
            f"cannot truncate {len(spans)} spans to {seq_len}; "
            "sample selection should have excluded this sample"
        )
    return list(spans[:seq_len])


@dataclass(frozen=True)
class TokenNllRecord:
    """One model's per-token negative log2-likelihoods for one sample.

    The first token is never predicted, so ``nll_bits`` has one entry
    per token 2..L. ``vocab_size_used`` is the logits width after
    truncating ineffective entries; it must equal the tokenizer's vocab
    size for the join to be meaningful.
    """

    sample_id: str
    model_id: str
    token_ids: tuple[int, ...]
    nll_bits: tuple[float, ...]
    vocab_size_used: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "token_ids", tuple(int(t) for t in self.token_ids))
        object.__setattr__(self, "nll_bits", tuple(float(v) for v in self.nll_bits))
        if len(self.token_ids) < 2:
            raise DomainError(
                f"record {self.sample_id}: needs >= 2 tokens, got {len(self.token_ids)}"
            )
        if len(self.nll_bits) != len(self.token_ids) - 1:
            raise DomainError(
                f"record {self.sample_id}: expected {len(self.token_ids) - 1} "
                f"nll values for {len(self.token_ids)} tokens, got {len(self.nll_bits)}"
            )
        bad = next((v for v in self.nll_bits if not math.isfinite(v) or v < 0), None)
        if bad is not None:
            raise DomainError(
                f"record {self.sample_id}: nll values must be finite and >= 0, "
                f"found {bad!r}"
            )
        if self.vocab_size_used < 1:
            raise DomainError(f"record {self.sample_id}: vocab_size_used must be positive")

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "sample_id": self.sample_id,
                "model_id": self.model_id,
                "token_ids": list(self.token_ids),
                "nll_bits": list(self.nll_bits),
                "vocab_size_used": self.vocab_size_used,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str, location: str = "record") -> "TokenNllRecord":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{location}: invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise ParseError(f"{location}: expected a JSON object")
        missing = [
            k
            for k in ("sample_id", "model_id", "token_ids", "nll_bits", "vocab_size_used")
            if k not in obj
        ]
        if missing:
            raise ParseError(f"{location}: missing fields: {', '.join(missing)}")
        try:
            return cls(
                sample_id=str(obj["sample_id"]),
                model_id=str(obj["model_id"]),
                token_ids=tuple(obj["token_ids"]),
                nll_bits=tuple(obj["nll_bits"]),
                vocab_size_used=int(obj["vocab_size_used"]),
            )
        except (TypeError, ValueError, DomainError) as exc:
            raise ParseError(f"{location}: {exc}") from None


def read_records(path: str | Path) -> Iterator[TokenNllRecord]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            if line.strip():
                yield TokenNllRecord.from_json_line(line, f"{path}:{lineno}")


def write_records(path: str | Path, records: Iterable[TokenNllRecord]) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as fp:
        for record in records:
            fp.write(record.to_json_line() + "\n")
            count += 1
    return count


def join_measurement(
    spans: Sequence[TokenSpan],
    record: TokenNllRecord,
    flops: FlopsEstimate,
) -> SampleMeasurement:
    """Join byte spans with a likelihood record into one measurement.

    Token ids must agree exactly; the error names the first divergent
    position. Totals cover tokens 2..L only: text bits from spans 2..L,
    the record's nll values, and per-position attention costs
    ``linear + coeff * (i - 1)`` summed over i = 2..L.
    """
    if len(spans) != len(record.token_ids):
        raise IntegrityError(
            f"sample {record.sample_id}: span count {len(spans)} != record "
            f"token count {len(record.token_ids)}"
        )
    for position, (span, token_id) in enumerate(zip(spans, record.token_ids)):
        if span.token_id != token_id:
            raise IntegrityError(
                f"sample {record.sample_id}: token ids diverge at position "
                f"{position}: corpus has {span.token_id}, record has {token_id}"
            )
    seq_len = len(spans)
    predicted = seq_len - 1
    text_bits = 8 * sum(span.byte_len for span in spans[1:])
    nll_total = math.fsum(record.nll_bits)
    flops_total = (
        predicted * flops.flops_per_token_linear
        + flops.flops_per_token_attn_coeff * (seq_len * predicted // 2)
    )
    return SampleMeasurement(
        sample_id=record.sample_id,
        token_count=seq_len,
        text_bits=text_bits,
        nll_bits_total=nll_total,
        flops_total=flops_total,
    )


@dataclass(frozen=True)
class RunManifest:
    """Settings snapshot written next to every record file, so the engine
    can confirm it agrees with the adapter that produced the records."""

    dataset_id: str
    seq_len: int
    tokenizer_digest: str
    adapter_settings: Mapping[str, object] = field(default_factory=dict)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(
                {
                    "dataset_id": self.dataset_id,
                    "seq_len": self.seq_len,
                    "tokenizer_digest": self.tokenizer_digest,
                    "adapter_settings": dict(self.adapter_settings),
                },
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(
                dataset_id=str(obj["dataset_id"]),
                seq_len=int(obj["seq_len"]),
                tokenizer_digest=str(obj["tokenizer_digest"]),
                adapter_settings=dict(obj.get("adapter_settings", {})),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"manifest {path}: {exc}") from None


class PerSampleIc(NamedTuple):
    model_id: str
    sample_id: str
    ic: float


def evaluate_records(
    records: Iterable[TokenNllRecord],
    tok: TokenizerDef,
    flops: FlopsEstimate,
    dataset_id: str,
    bias_table: BiasTable | None = None,
    corpus: Mapping[str, bytes] | None = None,
    seq_len: int = 1024,
    workers: int = 1,
) -> tuple[list[IcResult], list[PerSampleIc]]:
    """Turn likelihood records into pooled results, one per model id.

    Without a corpus, byte spans are rebuilt from each record's token
    ids. With a corpus (sample_id -> raw bytes), each sample is
    re-tokenized and truncated to ``seq_len`` so the join verifies the
    record's ids against the text itself. Samples are measured
    independently (``workers`` threads) and reduced in sample-id order,
    so the output is identical for any worker count.
    """
    record_list = sorted(records, key=lambda r: (r.model_id, r.sample_id))
    if not record_list:
        raise InputError("no records to evaluate")
    bias_table = bias_table or BiasTable.builtin()

    def measure(record: TokenNllRecord) -> SampleMeasurement:
        if record.vocab_size_used != tok.vocab_size:
            raise IntegrityError(
                f"record {record.sample_id}: vocab_size_used "
                f"{record.vocab_size_used} != tokenizer vocab size {tok.vocab_size}; "
                "the adapter truncated logits against a different tokenizer"
            )
        if corpus is not None:
            try:
                data = corpus[record.sample_id]
            except KeyError:
                raise IntegrityError(
                    f"record {record.sample_id} has no corpus sample"
                ) from None
            spans = truncate(encode(tok, data), seq_len)
        else:
            spans = spans_for_ids(tok, record.token_ids)
        return join_measurement(spans, record, flops)

    if workers <= 1:
        measurements = [measure(r) for r in record_list]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            measurements = list(pool.map(measure, record_list))

    by_model: dict[str, list[SampleMeasurement]] = {}
    for record, measurement in zip(record_list, measurements):
        by_model.setdefault(record.model_id, []).append(measurement)

    results = [
        aggregate(ms, model_id, dataset_id, bias_table)
        for model_id, ms in sorted(by_model.items())
    ]
    bias = bias_table.bias_for(dataset_id)
    per_sample = [
        PerSampleIc(model_id, m.sample_id, sample_ic(m, bias))
        for model_id, ms in sorted(by_model.items())
        for m in sorted(ms, key=lambda m: m.sample_id)
    ]
    return results, per_sample
