"""Wire-format schema for the records the evaluation engine ingests.

One JSON object per line, UTF-8:

    {"sample_id": str, "model_id": str, "token_ids": [int, ...],
     "nll_bits": [float >= 0, ...], "vocab_size_used": int >= 1}

with ``len(nll_bits) == len(token_ids) - 1`` (the first token is never
predicted). Validation here is the adapter's self-check before a record
file is allowed to land on disk.
"""

from __future__ import annotations

import json
import math

from .config import AdapterError

REQUIRED_FIELDS = ("sample_id", "model_id", "token_ids", "nll_bits", "vocab_size_used")


def validate_record(obj: dict, location: str = "record") -> None:
    if not isinstance(obj, dict):
        raise AdapterError(f"{location}: not a JSON object")
    missing = [f for f in REQUIRED_FIELDS if f not in obj]
    if missing:
        raise AdapterError(f"{location}: missing fields {missing}")
    if not isinstance(obj["sample_id"], str) or not isinstance(obj["model_id"], str):
        raise AdapterError(f"{location}: sample_id and model_id must be strings")
    token_ids = obj["token_ids"]
    nll_bits = obj["nll_bits"]
    if not isinstance(token_ids, list) or not all(
        isinstance(t, int) and not isinstance(t, bool) and t >= 0 for t in token_ids
    ):
        raise AdapterError(f"{location}: token_ids must be non-negative integers")
    if len(token_ids) < 2:
        raise AdapterError(f"{location}: need at least 2 tokens")
    if not isinstance(nll_bits, list) or len(nll_bits) != len(token_ids) - 1:
        raise AdapterError(
            f"{location}: nll_bits must have len(token_ids) - 1 entries"
        )
    for value in nll_bits:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise AdapterError(f"{location}: nll_bits entries must be numbers")
        if not math.isfinite(value) or value < 0:
            raise AdapterError(f"{location}: nll_bits must be finite and >= 0")
    width = obj["vocab_size_used"]
    if not isinstance(width, int) or isinstance(width, bool) or width < 1:
        raise AdapterError(f"{location}: vocab_size_used must be a positive integer")


def validate_record_line(line: str, location: str = "record") -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise AdapterError(f"{location}: invalid JSON: {exc}") from None
    validate_record(obj, location)
    return obj


def record_to_line(obj: dict) -> str:
    validate_record(obj)
    ordered = {field: obj[field] for field in REQUIRED_FIELDS}
    return json.dumps(ordered, separators=(",", ":"))
