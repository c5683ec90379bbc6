"""Information-capacity arithmetic and per-dataset aggregation.

The metric scores a language model by the text it compresses away per
unit of log-scale inference compute. For a sample whose tokens 2..L span
C bits of UTF-8 text, are predicted with a summed negative
log2-likelihood of N bits, and cost F floating-point operations in
total, the raw score is (C - N) / log2(F). Reported numbers use the
per-token form: every quantity is divided by the L-1 predicted tokens
first, and a per-dataset bias b is added to the numerator so that
same-family models of different sizes land on a near-constant value:

    ic = (mean_text_bits - mean_nll_bits + b) / log2(mean_flops)

All logarithms here are base 2: the numerator is in bits, and only a
base-2 denominator reproduces the published reference values from their
text-size/NLL/FLOPs columns. FLOPs enter as absolute operation counts
(e.g. 1.074e9), never giga-scaled. The first token of every sample is
excluded from all three totals because it has no preceding context.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, EmptyInputError, ParseError

logger = logging.getLogger(__name__)

__all__ = [
    "SampleMeasurement",
    "BiasTable",
    "IcResult",
    "ic_raw",
    "ic_per_token",
    "ic_biased",
    "sample_ic",
    "aggregate",
]


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")


def ic_raw(text_bits: float, nll_bits_total: float, flops_total: float) -> float:
    """Compression gain over log2 total compute, no averaging, no bias.

    ``(text_bits - nll_bits_total) / log2(flops_total)``. Requires
    ``flops_total > 1`` so the denominator is positive.
    """
    _require_finite(
        text_bits=text_bits, nll_bits_total=nll_bits_total, flops_total=flops_total
    )
    if flops_total <= 1:
        raise DomainError(f"flops_total must exceed 1, got {flops_total!r}")
    return (text_bits - nll_bits_total) / math.log2(flops_total)


def ic_biased(
    mean_text_bits: float,
    mean_nll_bits: float,
    mean_flops: float,
    bias: float,
) -> float:
    """Per-token information capacity with a per-dataset numerator bias.

    ``(mean_text_bits - mean_nll_bits + bias) / log2(mean_flops)`` with
    all inputs averaged over the predicted tokens of a sample or pool.
    """
    _require_finite(
        mean_text_bits=mean_text_bits,
        mean_nll_bits=mean_nll_bits,
        mean_flops=mean_flops,
        bias=bias,
    )
    if mean_flops <= 1:
        raise DomainError(f"mean_flops must exceed 1, got {mean_flops!r}")
    return (mean_text_bits - mean_nll_bits + bias) / math.log2(mean_flops)


def ic_per_token(mean_text_bits: float, mean_nll_bits: float, mean_flops: float) -> float:
    """Bias-free per-token information capacity (``ic_biased`` with b = 0)."""
    return ic_biased(mean_text_bits, mean_nll_bits, mean_flops, 0.0)


@dataclass(frozen=True)
class SampleMeasurement:
    """Per-sample totals over predicted tokens 2..L.

    ``text_bits`` is the UTF-8 byte size of the text those tokens span,
    times 8; ``nll_bits_total`` the summed negative log2-likelihood;
    ``flops_total`` the summed inference cost. ``token_count`` is L
    including the excluded first token, so L - 1 tokens contribute.
    """

    sample_id: str
    token_count: int
    text_bits: int
    nll_bits_total: float
    flops_total: float

    def __post_init__(self) -> None:
        if self.token_count < 2:
            raise DomainError(
                f"sample {self.sample_id}: token_count must be >= 2, "
                f"got {self.token_count}"
            )
        if self.text_bits <= 0 or self.text_bits % 8 != 0:
            raise DomainError(
                f"sample {self.sample_id}: text_bits must be a positive multiple "
                f"of 8, got {self.text_bits}"
            )
        if not math.isfinite(self.nll_bits_total) or self.nll_bits_total < 0:
            raise DomainError(
                f"sample {self.sample_id}: nll_bits_total must be finite and >= 0, "
                f"got {self.nll_bits_total}"
            )
        if not math.isfinite(self.flops_total) or self.flops_total <= 0:
            raise DomainError(
                f"sample {self.sample_id}: flops_total must be finite and > 0, "
                f"got {self.flops_total}"
            )

    @property
    def predicted_tokens(self) -> int:
        return self.token_count - 1


#: Bias values (bits per token) shipped with the engine, keyed by dataset id.
BUILTIN_BIASES: Mapping[str, float] = {
    "mixed": -24.0,
    "finepdfs-en": -27.0,
    "ch-fineweb-edu": -18.7,
    "fineweb-edu": -27.0,
    "nextcoder": -27.0,
}


@dataclass(frozen=True)
class BiasTable:
    """Dataset-id to numerator bias (bits/token). Unknown ids get ``default``."""

    entries: Mapping[str, float]
    default: float = 0.0

    @classmethod
    def builtin(cls) -> "BiasTable":
        return cls(entries=dict(BUILTIN_BIASES))

    @classmethod
    def from_text(cls, text: str) -> "BiasTable":
        """Parse ``dataset_id=bias`` lines. ``#`` starts a comment; the
        reserved key ``default`` sets the unknown-dataset bias."""
        entries: dict[str, float] = {}
        default = 0.0
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"bias table line {lineno}: expected key=value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            try:
                bias = float(value.strip())
            except ValueError:
                raise ParseError(
                    f"bias table line {lineno}: {value.strip()!r} is not a number"
                ) from None
            if not math.isfinite(bias):
                raise ParseError(f"bias table line {lineno}: bias must be finite")
            if key == "default":
                default = bias
            else:
                entries[key] = bias
        return cls(entries=entries, default=default)

    @classmethod
    def from_file(cls, path: str | Path) -> "BiasTable":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def bias_for(self, dataset_id: str) -> float:
        try:
            return self.entries[dataset_id]
        except KeyError:
            logger.warning(
                "no bias entry for dataset %r; using default %g",
                dataset_id,
                self.default,
            )
            return self.default


@dataclass(frozen=True)
class IcResult:
    """Aggregate for one model on one dataset.

    The three mean fields fully determine both scores: recomputing
    ``ic_biased(means..., bias)`` reproduces ``ic`` exactly, and ``ic``
    equals ``ic_unbiased`` whenever the bias is zero.
    """

    model_id: str
    dataset_id: str
    mean_text_bits_per_token: float
    mean_nll_bits_per_token: float
    mean_flops_per_token: float
    ic_unbiased: float
    ic: float
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "mean_text_bits_per_token": self.mean_text_bits_per_token,
            "mean_nll_bits_per_token": self.mean_nll_bits_per_token,
            "mean_flops_per_token": self.mean_flops_per_token,
            "ic_unbiased": self.ic_unbiased,
            "ic": self.ic,
            "sample_count": self.sample_count,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "IcResult":
        try:
            return cls(
                model_id=str(d["model_id"]),
                dataset_id=str(d["dataset_id"]),
                mean_text_bits_per_token=float(d["mean_text_bits_per_token"]),
                mean_nll_bits_per_token=float(d["mean_nll_bits_per_token"]),
                mean_flops_per_token=float(d["mean_flops_per_token"]),
                ic_unbiased=float(d["ic_unbiased"]),
                ic=float(d["ic"]),
                sample_count=int(d["sample_count"]),
            )
        except KeyError as exc:
            raise ParseError(f"result record missing field {exc.args[0]!r}") from None


def sample_ic(measurement: SampleMeasurement, bias: float = 0.0) -> float:
    """Information capacity of a single sample from its own means.

    Useful for distribution plots; the reported number per model and
    dataset comes from :func:`aggregate` instead, which pools sums
    before dividing.
    """
    n = measurement.predicted_tokens
    return ic_biased(
        measurement.text_bits / n,
        measurement.nll_bits_total / n,
        measurement.flops_total / n,
        bias,
    )


def aggregate(
    samples: Iterable[SampleMeasurement],
    model_id: str,
    dataset_id: str,
    bias_table: BiasTable | None = None,
) -> IcResult:
    """Pool samples into one :class:`IcResult` for a model/dataset pair.

    Sums are taken over all samples and divided once by the pooled
    predicted-token count, so long samples weigh proportionally more.
    Summation order is fixed by sorting on ``sample_id``, which together
    with exact integer sums and compensated float summation makes the
    result bit-identical under any input permutation.
    """
    ordered: Sequence[SampleMeasurement] = sorted(samples, key=lambda m: m.sample_id)
    if not ordered:
        raise EmptyInputError("aggregate() requires at least one sample")
    bias_table = bias_table or BiasTable.builtin()

    predicted = sum(m.predicted_tokens for m in ordered)
    text_bits = sum(m.text_bits for m in ordered)
    nll_total = math.fsum(m.nll_bits_total for m in ordered)
    flops_total = math.fsum(m.flops_total for m in ordered)

    mean_text = text_bits / predicted
    mean_nll = nll_total / predicted
    mean_flops = flops_total / predicted
    bias = bias_table.bias_for(dataset_id)
    return IcResult(
        model_id=model_id,
        dataset_id=dataset_id,
        mean_text_bits_per_token=mean_text,
        mean_nll_bits_per_token=mean_nll,
        mean_flops_per_token=mean_flops,
        ic_unbiased=ic_per_token(mean_text, mean_nll, mean_flops),
        ic=ic_biased(mean_text, mean_nll, mean_flops, bias),
        sample_count=len(ordered),
    )
