import json

import pytest

from logprob_adapter import AdapterConfig, ByteBpe, TinyCausalLM
from logprob_adapter.bpe import _byte_to_char

SEQ_LEN = 32

SENTENCES = [
    "the thin thing in the thicket was thinking about the weather again",
    "an answer can be another question wearing a longer coat than before",
    "in the morning the intern things over the information once more",
    "thermal baths soothe the throng of thirsty theorists on thursdays",
    "any analysis of an anthem demands an antenna for nuance and rhythm",
    "the theory went that thin threads thread the needle of the theorem",
    "intricate internals invite inspection by anyone with an instrument",
    "another thing the author thought about was the thankless thesaurus",
    "the anthill near the anvil annoyed the anxious anteater immensely",
    "thinking in tokens instead of in characters changes the arithmetic",
]


def build_vocab_and_merges():
    table = _byte_to_char()
    vocab = {table[b]: b for b in range(256)}
    merges = [["t", "h"], ["th", "e"], ["i", "n"], ["a", "n"]]
    for left, right in merges:
        vocab[left + right] = len(vocab)
    return vocab, merges


@pytest.fixture(scope="session")
def tok_file(tmp_path_factory):
    vocab, merges = build_vocab_and_merges()
    path = tmp_path_factory.mktemp("tok") / "tokenizer.json"
    path.write_text(
        json.dumps(
            {
                "vocab": vocab,
                "merges": merges,
                "byte_level": True,
                "special_tokens": [],
            },
            ensure_ascii=False,
        ),
        encoding="utf-8",
    )
    return path


@pytest.fixture(scope="session")
def tok(tok_file):
    return ByteBpe.from_file(tok_file)


@pytest.fixture(scope="session")
def model(tok):
    return TinyCausalLM(vocab_size=tok.vocab_size, seed=0)


@pytest.fixture(scope="session")
def cfg(tok):
    return AdapterConfig(
        model_id="tiny-causal-0",
        seq_len=SEQ_LEN,
        vocab_truncate=tok.vocab_size,
        batch_size=4,
    )


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    path.write_text(
        "\n".join(json.dumps({"text": t}) for t in SENTENCES) + "\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture(scope="session")
def sentences():
    return list(SENTENCES)
