"""Command-line entry points.

Subcommands: ``tokenize`` (tokenizer statistics over a corpus),
``flops`` (architecture config to FLOPs breakdown), ``pack``/``unpack``
(entropy-codec container), ``eval`` (likelihood records to capacity
results), and ``report`` (results to leaderboard, series summary,
correlation, or plot data).

Exit codes: 0 on success, 1 for any input problem (including usage
errors and undecodable files), 2 when independently produced inputs
fail an integrity check against each other.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__, codec, flops, metrics, pipeline, report, tokenizer
from .errors import DomainError, InfoCapError, InputError, IntegrityError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTEGRITY = 2


class _Parser(argparse.ArgumentParser):
    # Usage problems are input errors; argparse's default exit code of 2
    # is reserved for integrity failures here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _global_flags() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seq-len", type=int, default=1024, help="truncation length L (default 1024)")
    shared.add_argument("--bias-table", type=Path, default=None, help="key=value bias file; defaults to the built-in table")
    shared.add_argument("--dataset-id", default=None, help="dataset id for bias lookup and labeling")
    shared.add_argument(
        "--format",
        choices=("table", "csv", "jsonl"),
        default="table",
        help="output format (default table)",
    )
    shared.add_argument("-o", "--output", type=Path, default=None, help="write output to this file instead of stdout")
    return shared


def build_parser() -> argparse.ArgumentParser:
    shared = _global_flags()
    parser = _Parser(prog="infocap", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"infocap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tokenize", parents=[shared], help="tokenizer statistics over a corpus")
    p.add_argument("corpus", nargs="+", type=Path, help="JSONL file(s) with a 'text' field, or sample directories")
    p.add_argument("--tokenizer", type=Path, required=True, help="combined tokenizer definition (JSON)")
    p.add_argument("--ids", type=Path, default=None, help="also write per-sample token ids (JSONL) here")

    p = sub.add_parser("flops", parents=[shared], help="architecture config to FLOPs breakdown")
    p.add_argument("config", type=Path, help="model config (JSON, common published field names)")

    p = sub.add_parser("pack", parents=[shared], help="compress a file into a container")
    p.add_argument("input", type=Path)
    p.add_argument("packed", type=Path)
    p.add_argument("--model", default="adaptive-o2", choices=codec.registered_model_ids(), help="probability model (default adaptive-o2)")
    p.add_argument("--precision", type=int, default=48, help="coder register bits B (default 48)")
    p.add_argument("--freq-bits", type=int, default=20, help="frequency precision f (default 20)")

    p = sub.add_parser("unpack", parents=[shared], help="decompress a container")
    p.add_argument("packed", type=Path)
    p.add_argument("output", type=Path)

    p = sub.add_parser("eval", parents=[shared], help="likelihood records to capacity results")
    p.add_argument("--records", type=Path, required=True, help="newline-delimited TokenNllRecord file")
    p.add_argument("--tokenizer", type=Path, required=True)
    p.add_argument("--arch-config", type=Path, required=True, help="model config for the FLOPs estimate")
    p.add_argument("--corpus", type=Path, default=None, help="optional corpus; verifies record token ids against the text")
    p.add_argument("--workers", type=int, default=1, help="parallel sample workers (output is identical for any count)")
    p.add_argument("--per-sample", type=Path, default=None, help="also write per-sample capacities (CSV) here")

    p = sub.add_parser("report", parents=[shared], help="results to leaderboard/series/correlation/plot data")
    p.add_argument("results", nargs="+", type=Path, help="JSONL result files from eval")
    p.add_argument(
        "--view",
        choices=("leaderboard", "results", "series", "correlation", "plot"),
        default="leaderboard",
    )
    p.add_argument("--plot-mode", choices=report.PLOT_MODES, default="ic_vs_flops")
    p.add_argument("--series-map", type=Path, default=None, help="key=value file mapping model_id to series")
    return parser


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _load_bias_table(path: Path | None) -> metrics.BiasTable:
    return metrics.BiasTable.from_file(path) if path else metrics.BiasTable.builtin()


def _corpus_sources(paths, dataset_id, seq_len) -> pipeline.DatasetSpec:
    return pipeline.DatasetSpec(
        dataset_id=dataset_id or "corpus",
        sources=tuple(paths),
        seq_len=seq_len,
    )


def _cmd_tokenize(args) -> int:
    tok = tokenizer.load_tokenizer_file(args.tokenizer)
    spec = _corpus_sources(args.corpus, args.dataset_id, args.seq_len)
    samples = list(pipeline.iter_dataset(spec))
    if not samples:
        raise InputError("corpus contains no samples")
    samples.sort(key=lambda s: s.sample_id)

    total_tokens = 0
    total_bytes = 0
    skip_bytes = 0
    skip_tokens = 0
    ids_lines = []
    for sample in samples:
        spans = tokenizer.encode(tok, sample.data)
        total_tokens += len(spans)
        total_bytes += sum(s.byte_len for s in spans)
        if len(spans) >= 2:
            skip_bytes += sum(s.byte_len for s in spans[1:])
            skip_tokens += len(spans) - 1
        if args.ids is not None:
            ids_lines.append(
                json.dumps(
                    {"sample_id": sample.sample_id, "token_ids": [s.token_id for s in spans]},
                    separators=(",", ":"),
                )
            )
    if args.ids is not None:
        args.ids.write_text("\n".join(ids_lines) + "\n", encoding="utf-8")

    stats = {
        "samples": len(samples),
        "tokens": total_tokens,
        "text_bytes": total_bytes,
        "bits_per_token": 8.0 * total_bytes / total_tokens if total_tokens else 0.0,
        "bits_per_token_skip_first": 8.0 * skip_bytes / skip_tokens if skip_tokens else 0.0,
        "vocab_size": tok.vocab_size,
        "tokenizer_digest": tokenizer.tokenizer_digest(tok),
    }
    if args.format == "jsonl":
        _emit(json.dumps(stats, separators=(",", ":")) + "\n", args.output)
    elif args.format == "csv":
        keys = list(stats)
        _emit(
            ",".join(keys) + "\n" + ",".join(str(stats[k]) for k in keys) + "\n",
            args.output,
        )
    else:
        width = max(len(k) for k in stats)
        lines = []
        for key, value in stats.items():
            shown = f"{value:.2f}" if isinstance(value, float) else str(value)
            lines.append(f"{key.ljust(width)}  {shown}")
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_flops(args) -> int:
    arch = flops.load_descriptor_file(args.config)
    est = flops.estimate_flops(arch)
    mean = flops.mean_flops_per_token(est, args.seq_len)
    fields = dict(est.breakdown)
    fields["linear_per_token"] = est.flops_per_token_linear
    fields["attn_coeff_per_context_token"] = est.flops_per_token_attn_coeff
    fields[f"mean_per_token_L{args.seq_len}"] = mean
    fields["log2_mean_per_token"] = math.log2(mean)
    if args.format == "jsonl":
        _emit(json.dumps(fields, separators=(",", ":")) + "\n", args.output)
    elif args.format == "csv":
        keys = list(fields)
        _emit(
            ",".join(keys) + "\n" + ",".join(repr(fields[k]) for k in keys) + "\n",
            args.output,
        )
    else:
        width = max(len(k) for k in fields)
        lines = [
            f"{key.ljust(width)}  {value:,.2f}" if isinstance(value, float) else f"{key.ljust(width)}  {value:,}"
            for key, value in fields.items()
        ]
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_pack(args) -> int:
    cfg = codec.CoderConfig(precision_bits=args.precision, freq_bits=args.freq_bits)
    container = codec.pack_file(args.input, args.packed, model=args.model, cfg=cfg)
    raw = args.input.stat().st_size
    packed = args.packed.stat().st_size
    ratio = packed / raw if raw else float("nan")
    sys.stderr.write(
        f"{args.input} -> {args.packed}: {raw} -> {packed} bytes "
        f"({ratio:.3f}) model={container.model_id}\n"
    )
    return EXIT_OK


def _cmd_unpack(args) -> int:
    size = codec.unpack_file(args.packed, args.output)
    sys.stderr.write(f"{args.packed} -> {args.output}: {size} bytes\n")
    return EXIT_OK


def _cmd_eval(args) -> int:
    tok = tokenizer.load_tokenizer_file(args.tokenizer)
    est = flops.estimate_flops(flops.load_descriptor_file(args.arch_config))
    bias_table = _load_bias_table(args.bias_table)
    dataset_id = args.dataset_id or "corpus"
    records = list(pipeline.read_records(args.records))

    corpus = None
    if args.corpus is not None:
        spec = _corpus_sources([args.corpus], dataset_id, args.seq_len)
        corpus = {s.sample_id: s.data for s in pipeline.iter_dataset(spec)}

    results, per_sample = pipeline.evaluate_records(
        records,
        tok,
        est,
        dataset_id=dataset_id,
        bias_table=bias_table,
        corpus=corpus,
        seq_len=args.seq_len,
        workers=args.workers,
    )
    if args.per_sample is not None:
        lines = ["model_id,sample_id,ic"]
        lines += [f"{p.model_id},{p.sample_id},{p.ic!r}" for p in per_sample]
        args.per_sample.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit(report.format_results(results, args.format), args.output)
    return EXIT_OK


def _read_series_map(path: Path | None):
    if path is None:
        return None
    mapping = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"series map {path}:{lineno}: expected model_id=series")
        key, _, value = line.partition("=")
        mapping[key.strip()] = value.strip()
    return mapping


def _cmd_report(args) -> int:
    results = []
    for path in args.results:
        results.extend(report.read_results(path))
    if not results:
        raise InputError("no results to report")
    series_map = _read_series_map(args.series_map)

    if args.view == "results":
        _emit(report.format_results(results, args.format), args.output)
    elif args.view == "leaderboard":
        _emit(report.format_leaderboard(report.rank(results), args.format), args.output)
    elif args.view == "series":
        _emit(
            report.format_series(report.summarize_series(results, series_map), args.format),
            args.output,
        )
    elif args.view == "plot":
        _emit(report.emit_plot_data(results, args.plot_mode, series_map), args.output)
    else:  # correlation: capacity vs text bits per token, per dataset
        by_dataset: dict[str, list] = {}
        for result in results:
            by_dataset.setdefault(result.dataset_id, []).append(result)
        lines = ["dataset_id,n,pearson_r"]
        for dataset_id, group in sorted(by_dataset.items()):
            if len(group) < 2:
                continue
            r = report.pearson(
                [g.mean_text_bits_per_token for g in group], [g.ic for g in group]
            )
            lines.append(f"{dataset_id},{len(group)},{r!r}")
        if len(lines) == 1:
            raise DomainError("correlation needs at least two results on one dataset")
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


_COMMANDS = {
    "tokenize": _cmd_tokenize,
    "flops": _cmd_flops,
    "pack": _cmd_pack,
    "unpack": _cmd_unpack,
    "eval": _cmd_eval,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except IntegrityError as exc:
        sys.stderr.write(f"integrity error: {exc}\n")
        return EXIT_INTEGRITY
    except InfoCapError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
