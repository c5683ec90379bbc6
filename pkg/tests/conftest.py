import json
from pathlib import Path

import pytest

from infocap.flops import ArchitectureDescriptor, estimate_flops
from infocap.tokenizer import BYTE_TO_CHAR, TokenizerDef

BYTE_VOCAB = {BYTE_TO_CHAR[b]: b for b in range(256)}


@pytest.fixture(scope="session")
def byte_tok() -> TokenizerDef:
    """Pure byte tokenizer: 256-entry vocab, no merges, id == byte value."""
    return TokenizerDef(vocab=dict(BYTE_VOCAB), merges=())


@pytest.fixture(scope="session")
def th_tok() -> TokenizerDef:
    """Byte vocab plus a single ("t", "h") merge producing token id 256."""
    vocab = dict(BYTE_VOCAB)
    vocab["th"] = 256
    return TokenizerDef(vocab=vocab, merges=(("t", "h"),))


@pytest.fixture(scope="session")
def toy_arch() -> ArchitectureDescriptor:
    """Small dense transformer with hand-countable FLOPs."""
    return ArchitectureDescriptor(
        hidden_size=64,
        num_layers=2,
        num_q_heads=4,
        num_kv_heads=4,
        head_dim=16,
        ffn_hidden=256,
        ffn_matrices=3,
        vocab_size=1000,
        tied_embeddings=False,
    )


@pytest.fixture(scope="session")
def toy_est(toy_arch):
    return estimate_flops(toy_arch)


def write_jsonl_corpus(path: Path, texts) -> Path:
    path.write_text(
        "\n".join(json.dumps({"text": t}) for t in texts) + "\n", encoding="utf-8"
    )
    return path
