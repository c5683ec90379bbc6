"""Information capacity of language models.

An evaluation engine that scores language models by text-compression
gain per unit of log-scale inference compute. The package bundles the
metric arithmetic, a byte-level BPE tokenizer runtime with exact byte
accounting, a transformer FLOPs estimator, an arithmetic-coding entropy
codec with a reference adaptive model, and the corpus/record pipeline
that joins per-token likelihood records into reportable results.
"""

from . import codec, flops, metrics, pipeline, report, tokenizer
from .metrics import BiasTable, IcResult, SampleMeasurement, aggregate, ic_biased, ic_per_token, ic_raw

__version__ = "0.1.0"

__all__ = [
    "codec",
    "flops",
    "metrics",
    "pipeline",
    "report",
    "tokenizer",
    "BiasTable",
    "IcResult",
    "SampleMeasurement",
    "aggregate",
    "ic_biased",
    "ic_per_token",
    "ic_raw",
    "__version__",
]
