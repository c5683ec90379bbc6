"""Leaderboards, series summaries, correlations, and plot-data emission.

Everything here is a deterministic projection of completed
:class:`~infocap.metrics.IcResult` values: identical inputs give
byte-identical output. Human-facing tables round for display
(information capacity to 4 decimals, NLL to 3, bits per token to 2);
machine-readable JSON lines and plot files carry full precision so
downstream tools can recompute every number exactly.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DomainError, EmptyInputError, ParseError
from .metrics import IcResult

__all__ = [
    "Leaderboard",
    "SeriesSummary",
    "rank",
    "summarize_series",
    "pearson",
    "emit_plot_data",
    "read_results",
    "write_results",
    "format_results",
    "format_leaderboard",
    "format_series",
]

SeriesFn = Callable[[str], str]


def _series_fn(series_map: Mapping[str, str] | SeriesFn | None) -> SeriesFn:
    if series_map is None:
        return lambda model_id: model_id
    if callable(series_map):
        return series_map
    return lambda model_id: series_map.get(model_id, model_id)


def read_results(path: str | Path) -> list[IcResult]:
    results = []
    with Path(path).open("r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            results.append(IcResult.from_dict(obj))
    return results


def write_results(path: str | Path, results: Iterable[IcResult]) -> None:
    with Path(path).open("w", encoding="utf-8") as fp:
        for result in results:
            fp.write(json.dumps(result.to_dict(), separators=(",", ":")) + "\n")


@dataclass(frozen=True)
class Leaderboard:
    """Results ordered per dataset by descending information capacity.

    ``ranks`` maps (dataset_id, model_id) to a 1-based rank; exact score
    ties fall back to model-id order and are marked in the rendered
    footnote."""

    rows: tuple[IcResult, ...]
    ranks: Mapping[tuple[str, str], int]

    def tied_pairs(self) -> list[tuple[str, str, str]]:
        out = []
        by_dataset: dict[str, list[IcResult]] = {}
        for row in self.rows:
            by_dataset.setdefault(row.dataset_id, []).append(row)
        for dataset_id, rows in sorted(by_dataset.items()):
            for a, b in zip(rows, rows[1:]):
                if a.ic == b.ic:
                    out.append((dataset_id, a.model_id, b.model_id))
        return out


def rank(results: Sequence[IcResult]) -> Leaderboard:
    """Rank models per dataset by descending capacity, ties by model id."""
    if not results:
        raise EmptyInputError("rank() requires at least one result")
    keys = {(r.dataset_id, r.model_id) for r in results}
    if len(keys) != len(results):
        raise DomainError("duplicate (dataset_id, model_id) pairs in results")
    by_dataset: dict[str, list[IcResult]] = {}
    for result in results:
        by_dataset.setdefault(result.dataset_id, []).append(result)
    rows: list[IcResult] = []
    ranks: dict[tuple[str, str], int] = {}
    for dataset_id, group in sorted(by_dataset.items()):
        group.sort(key=lambda r: (-r.ic, r.model_id))
        for position, result in enumerate(group, start=1):
            ranks[(dataset_id, result.model_id)] = position
        rows.extend(group)
    return Leaderboard(rows=tuple(rows), ranks=ranks)


@dataclass(frozen=True)
class SeriesSummary:
    series_id: str
    dataset_id: str
    ics: tuple[float, ...]
    mean_ic: float
    spread: float

    def __post_init__(self) -> None:
        if self.spread < 0:
            raise DomainError("spread must be >= 0")


def summarize_series(
    results: Sequence[IcResult],
    series_map: Mapping[str, str] | SeriesFn | None = None,
) -> list[SeriesSummary]:
    """Average capacity and max-min spread per model series and dataset.

    The spread is reported, not assumed small: whether sizes within a
    series really score alike is something readers should be able to
    check at a glance.
    """
    if not results:
        raise EmptyInputError("summarize_series() requires at least one result")
    series_of = _series_fn(series_map)
    grouped: dict[tuple[str, str], list[float]] = {}
    for result in results:
        key = (series_of(result.model_id), result.dataset_id)
        grouped.setdefault(key, []).append(result.ic)
    return [
        SeriesSummary(
            series_id=series_id,
            dataset_id=dataset_id,
            ics=tuple(ics),
            mean_ic=math.fsum(ics) / len(ics),
            spread=max(ics) - min(ics),
        )
        for (series_id, dataset_id), ics in sorted(grouped.items())
    ]


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Standard Pearson correlation coefficient in [-1, 1]."""
    if len(xs) != len(ys):
        raise DomainError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DomainError("pearson needs at least two points")
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    cov = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = math.fsum((x - mean_x) ** 2 for x in xs)
    var_y = math.fsum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise DomainError("correlation undefined: an input has zero variance")
    r = cov / math.sqrt(var_x * var_y)
    return max(-1.0, min(1.0, r))


PLOT_MODES = ("ic_vs_flops", "ic_vs_bits_per_token")


def emit_plot_data(
    results: Sequence[IcResult],
    mode: str = "ic_vs_flops",
    series_map: Mapping[str, str] | SeriesFn | None = None,
) -> str:
    """Comma-separated plot data, full precision, sorted by model then dataset.

    ``ic_vs_flops`` emits (model_id, series, dataset_id, log2_mean_flops,
    ic); ``ic_vs_bits_per_token`` additionally carries the mean text bits
    per token so tokenizer efficiency can sit on the x-axis.
    """
    if mode not in PLOT_MODES:
        raise DomainError(f"unknown plot mode {mode!r}; expected one of {PLOT_MODES}")
    if not results:
        raise EmptyInputError("emit_plot_data() requires at least one result")
    series_of = _series_fn(series_map)
    out = io.StringIO()
    columns = ["model_id", "series", "dataset_id", "log2_mean_flops"]
    if mode == "ic_vs_bits_per_token":
        columns.append("mean_text_bits_per_token")
    columns.append("ic")
    out.write(",".join(columns) + "\n")
    for result in sorted(results, key=lambda r: (r.model_id, r.dataset_id)):
        row = [
            result.model_id,
            series_of(result.model_id),
            result.dataset_id,
            repr(math.log2(result.mean_flops_per_token)),
        ]
        if mode == "ic_vs_bits_per_token":
            row.append(repr(result.mean_text_bits_per_token))
        row.append(repr(result.ic))
        out.write(",".join(row) + "\n")
    return out.getvalue()


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _result_cells(result: IcResult) -> list[str]:
    return [
        result.model_id,
        result.dataset_id,
        f"{result.mean_text_bits_per_token:.2f}",
        f"{result.mean_nll_bits_per_token:.3f}",
        f"{result.mean_flops_per_token:.4e}",
        f"{result.ic_unbiased:.4f}",
        f"{result.ic:.4f}",
        str(result.sample_count),
    ]


_RESULT_HEADERS = (
    "model",
    "dataset",
    "bits/token",
    "nll",
    "flops/token",
    "ic_unbiased",
    "ic",
    "samples",
)


def format_results(results: Sequence[IcResult], fmt: str = "table") -> str:
    """Render results as an aligned table, CSV, or full-precision JSON lines."""
    ordered = sorted(results, key=lambda r: (r.dataset_id, r.model_id))
    if fmt == "jsonl":
        return "".join(json.dumps(r.to_dict(), separators=(",", ":")) + "\n" for r in ordered)
    rows = [_result_cells(r) for r in ordered]
    if fmt == "csv":
        lines = [",".join(_RESULT_HEADERS)] + [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt == "table":
        return _table(_RESULT_HEADERS, rows)
    raise DomainError(f"unknown format {fmt!r}; expected table, csv, or jsonl")


def format_leaderboard(board: Leaderboard, fmt: str = "table") -> str:
    headers = ("dataset", "rank", "model", "ic")
    rows = [
        (
            row.dataset_id,
            str(board.ranks[(row.dataset_id, row.model_id)]),
            row.model_id,
            f"{row.ic:.4f}",
        )
        for row in board.rows
    ]
    if fmt == "jsonl":
        return "".join(
            json.dumps(
                {
                    "dataset_id": row.dataset_id,
                    "rank": board.ranks[(row.dataset_id, row.model_id)],
                    **row.to_dict(),
                },
                separators=(",", ":"),
            )
            + "\n"
            for row in board.rows
        )
    if fmt == "csv":
        return "\n".join([",".join(headers)] + [",".join(r) for r in rows]) + "\n"
    if fmt == "table":
        text = _table(headers, rows)
        ties = board.tied_pairs()
        if ties:
            notes = "; ".join(f"{a} == {b} on {d}" for d, a, b in ties)
            text += f"note: exact ties broken by model id: {notes}\n"
        return text
    raise DomainError(f"unknown format {fmt!r}; expected table, csv, or jsonl")


def format_series(summaries: Sequence[SeriesSummary], fmt: str = "table") -> str:
    headers = ("series", "dataset", "members", "mean_ic", "spread")
    rows = [
        (
            s.series_id,
            s.dataset_id,
            str(len(s.ics)),
            f"{s.mean_ic:.4f}",
            f"{s.spread:.4f}",
        )
        for s in summaries
    ]
    if fmt == "jsonl":
        return "".join(
            json.dumps(
                {
                    "series_id": s.series_id,
                    "dataset_id": s.dataset_id,
                    "ics": list(s.ics),
                    "mean_ic": s.mean_ic,
                    "spread": s.spread,
                },
                separators=(",", ":"),
            )
            + "\n"
            for s in summaries
        )
    if fmt == "csv":
        return "\n".join([",".join(headers)] + [",".join(r) for r in rows]) + "\n"
    if fmt == "table":
        return _table(headers, rows)
    raise DomainError(f"unknown format {fmt!r}; expected table, csv, or jsonl")
