import json
import math
import subprocess
import sys

import pytest

from infocap.cli import main
from infocap.codec import AdaptiveContextModel, CoderConfig
from infocap.pipeline import TokenNllRecord, sample_id_for, truncate, write_records
from infocap.tokenizer import dump_tokenizer, encode
from .conftest import write_jsonl_corpus

TOY_CONFIG = {
    "hidden_size": 64,
    "num_hidden_layers": 2,
    "num_attention_heads": 4,
    "num_key_value_heads": 4,
    "head_dim": 16,
    "intermediate_size": 256,
    "vocab_size": 1000,
}


@pytest.fixture
def workspace(tmp_path, byte_tok):
    """Corpus, tokenizer, arch config, bias table, and records on disk."""
    seq_len = 16
    texts = [f"The quick brown fox number {i:02d} jumps over the lazy dog." for i in range(6)]
    corpus = write_jsonl_corpus(tmp_path / "corpus.jsonl", texts)
    tok_path = tmp_path / "tokenizer.json"
    tok_path.write_text(dump_tokenizer(byte_tok), encoding="utf-8")
    arch_path = tmp_path / "arch.json"
    arch_path.write_text(json.dumps(TOY_CONFIG), encoding="utf-8")
    bias_path = tmp_path / "bias.conf"
    bias_path.write_text("toy=-3\n", encoding="utf-8")

    cfg = CoderConfig()
    records = []
    for text in texts:
        data = text.encode()
        spans = truncate(encode(byte_tok, data), seq_len)
        symbols = [s.token_id for s in spans]
        model = AdaptiveContextModel(2, 256, cfg.freq_cap)
        nll = []
        for i, symbol in enumerate(symbols):
            cum = model.cumulative_freqs()
            total = int(cum[-1])
            width = int(cum[symbol + 1]) - int(cum[symbol])
            if i > 0:
                nll.append(math.log2(total) - math.log2(width))
            model.observe(symbol)
        records.append(
            TokenNllRecord(
                sample_id=sample_id_for(data),
                model_id="toy-model",
                token_ids=tuple(symbols),
                nll_bits=tuple(nll),
                vocab_size_used=256,
            )
        )
    records_path = tmp_path / "records.jsonl"
    write_records(records_path, records)
    return {
        "dir": tmp_path,
        "corpus": corpus,
        "tokenizer": tok_path,
        "arch": arch_path,
        "bias": bias_path,
        "records": records_path,
        "seq_len": seq_len,
    }


def run(args):
    return main([str(a) for a in args])


class TestTokenize:
    def test_stats_table(self, workspace, capsys):
        code = run(["tokenize", workspace["corpus"], "--tokenizer", workspace["tokenizer"]])
        out = capsys.readouterr().out
        assert code == 0
        assert "samples" in out and "bits_per_token" in out

    def test_stats_jsonl_and_ids(self, workspace, capsys):
        ids_path = workspace["dir"] / "ids.jsonl"
        code = run(
            [
                "tokenize",
                workspace["corpus"],
                "--tokenizer",
                workspace["tokenizer"],
                "--format",
                "jsonl",
                "--ids",
                ids_path,
            ]
        )
        assert code == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["samples"] == 6
        assert stats["bits_per_token"] == 8.0
        assert stats["vocab_size"] == 256
        assert len(stats["tokenizer_digest"]) == 16
        lines = [json.loads(l) for l in ids_path.read_text().splitlines()]
        assert len(lines) == 6
        assert all(isinstance(l["token_ids"], list) for l in lines)

    def test_missing_corpus_is_input_error(self, workspace, capsys):
        code = run(
            ["tokenize", workspace["dir"] / "nope.jsonl", "--tokenizer", workspace["tokenizer"]]
        )
        assert code == 1


class TestFlops:
    def test_breakdown_values(self, workspace, capsys):
        code = run(
            ["flops", workspace["arch"], "--seq-len", 1024, "--format", "jsonl"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["linear_per_token"] == 390144
        assert out["attn_coeff_per_context_token"] == 512
        assert out["mean_per_token_L1024"] == 652288.0

    def test_table_output(self, workspace, capsys):
        assert run(["flops", workspace["arch"]]) == 0
        assert "lm_head" in capsys.readouterr().out

    def test_bad_config_is_input_error(self, workspace, capsys):
        bad = workspace["dir"] / "bad.json"
        bad.write_text('{"hidden_size": 64}', encoding="utf-8")
        assert run(["flops", bad]) == 1
        assert "missing" in capsys.readouterr().err


class TestPackUnpack:
    def test_round_trip(self, workspace, capsys):
        src = workspace["dir"] / "plain.txt"
        src.write_bytes(b"pack me up and bring me back, byte for byte." * 40)
        packed = workspace["dir"] / "plain.icac"
        out = workspace["dir"] / "restored.txt"
        assert run(["pack", src, packed]) == 0
        assert run(["unpack", packed, out]) == 0
        assert out.read_bytes() == src.read_bytes()
        assert packed.stat().st_size < src.stat().st_size

    def test_uniform_model_option(self, workspace):
        src = workspace["dir"] / "u.txt"
        src.write_bytes(b"0123456789" * 10)
        packed = workspace["dir"] / "u.icac"
        out = workspace["dir"] / "u.out"
        assert run(["pack", src, packed, "--model", "uniform-256"]) == 0
        assert run(["unpack", packed, out]) == 0
        assert out.read_bytes() == src.read_bytes()

    def test_unpack_garbage_is_input_error(self, workspace):
        garbage = workspace["dir"] / "garbage.icac"
        garbage.write_bytes(b"not a container at all")
        assert run(["unpack", garbage, workspace["dir"] / "x"]) == 1


class TestEval:
    def test_records_only(self, workspace, capsys):
        code = run(
            [
                "eval",
                "--records",
                workspace["records"],
                "--tokenizer",
                workspace["tokenizer"],
                "--arch-config",
                workspace["arch"],
                "--bias-table",
                workspace["bias"],
                "--dataset-id",
                "toy",
                "--format",
                "jsonl",
            ]
        )
        assert code == 0
        row = json.loads(capsys.readouterr().out)
        assert row["model_id"] == "toy-model"
        assert row["sample_count"] == 6
        assert row["mean_text_bits_per_token"] == 8.0

    def test_corpus_verification_and_per_sample(self, workspace, capsys):
        per_sample = workspace["dir"] / "per_sample.csv"
        code = run(
            [
                "eval",
                "--records",
                workspace["records"],
                "--tokenizer",
                workspace["tokenizer"],
                "--arch-config",
                workspace["arch"],
                "--dataset-id",
                "toy",
                "--corpus",
                workspace["corpus"],
                "--seq-len",
                workspace["seq_len"],
                "--per-sample",
                per_sample,
            ]
        )
        assert code == 0
        lines = per_sample.read_text().splitlines()
        assert lines[0] == "model_id,sample_id,ic"
        assert len(lines) == 7

    def test_tampered_records_exit_2(self, workspace, capsys):
        tampered = workspace["dir"] / "tampered.jsonl"
        lines = workspace["records"].read_text().splitlines()
        obj = json.loads(lines[0])
        obj["token_ids"] = [obj["token_ids"][0], (obj["token_ids"][1] + 1) % 256] + obj["token_ids"][2:]
        lines[0] = json.dumps(obj)
        tampered.write_text("\n".join(lines) + "\n", encoding="utf-8")
        code = run(
            [
                "eval",
                "--records",
                tampered,
                "--tokenizer",
                workspace["tokenizer"],
                "--arch-config",
                workspace["arch"],
                "--dataset-id",
                "toy",
                "--corpus",
                workspace["corpus"],
                "--seq-len",
                workspace["seq_len"],
            ]
        )
        assert code == 2
        assert "integrity" in capsys.readouterr().err

    def test_output_file(self, workspace):
        out = workspace["dir"] / "results.jsonl"
        code = run(
            [
                "eval",
                "--records",
                workspace["records"],
                "--tokenizer",
                workspace["tokenizer"],
                "--arch-config",
                workspace["arch"],
                "--dataset-id",
                "toy",
                "--format",
                "jsonl",
                "-o",
                out,
            ]
        )
        assert code == 0
        assert out.exists()


class TestReport:
    @pytest.fixture
    def results_file(self, workspace):
        out = workspace["dir"] / "results.jsonl"
        run(
            [
                "eval",
                "--records",
                workspace["records"],
                "--tokenizer",
                workspace["tokenizer"],
                "--arch-config",
                workspace["arch"],
                "--dataset-id",
                "toy",
                "--format",
                "jsonl",
                "-o",
                out,
            ]
        )
        return out

    def test_leaderboard(self, results_file, capsys):
        assert run(["report", results_file]) == 0
        out = capsys.readouterr().out
        assert "rank" in out and "toy-model" in out

    def test_plot_data(self, results_file, capsys):
        assert run(["report", results_file, "--view", "plot", "--plot-mode", "ic_vs_bits_per_token"]) == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert "mean_text_bits_per_token" in header

    def test_series_with_map(self, results_file, workspace, capsys):
        smap = workspace["dir"] / "series.conf"
        smap.write_text("toy-model=toy-family\n", encoding="utf-8")
        assert run(["report", results_file, "--view", "series", "--series-map", smap]) == 0
        assert "toy-family" in capsys.readouterr().out

    def test_correlation_needs_two(self, results_file, capsys):
        assert run(["report", results_file, "--view", "correlation"]) == 1


class TestUsageErrors:
    def test_unknown_flag_exits_1(self, capsys):
        assert main(["eval", "--frobnicate"]) == 1

    def test_missing_required_exits_1(self, capsys):
        assert main(["eval"]) == 1

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "infocap", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "infocap" in proc.stdout
