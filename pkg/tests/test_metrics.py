import math
import random

import pytest
from hypothesis import given, strategies as st

from infocap.errors import DomainError, EmptyInputError, ParseError
from infocap.metrics import (
    BUILTIN_BIASES,
    BiasTable,
    IcResult,
    SampleMeasurement,
    aggregate,
    ic_biased,
    ic_per_token,
    ic_raw,
    sample_ic,
)


class TestIcRaw:
    def test_perfect_predictor(self):
        assert ic_raw(32, 0, 2**32) == 1.0

    def test_zero_gain(self):
        assert ic_raw(32, 32, 2**32) == 0.0

    def test_hand_arithmetic(self):
        assert ic_raw(100, 30, 1024) == 7.0

    @pytest.mark.parametrize("flops", [1, 0.5, 0, -3])
    def test_flops_at_most_one_rejected(self, flops):
        with pytest.raises(DomainError):
            ic_raw(10, 5, flops)

    @pytest.mark.parametrize(
        "args",
        [
            (float("nan"), 0, 100),
            (10, float("inf"), 100),
            (10, 0, float("nan")),
        ],
    )
    def test_non_finite_rejected(self, args):
        with pytest.raises(DomainError):
            ic_raw(*args)


class TestIcPerToken:
    def test_reference_row(self):
        assert ic_per_token(33.80, 3.590, 1.074e9) == pytest.approx(1.0070, abs=1e-3)

    def test_zero_gain(self):
        assert ic_per_token(8.0, 8.0, 2**10) == 0.0

    def test_matches_raw_for_single_token(self):
        assert ic_per_token(32, 0, 2**32) == ic_raw(32, 0, 2**32) == 1.0


class TestIcBiased:
    @pytest.mark.parametrize(
        "ts,nll,flops,expected",
        [
            (33.80, 3.590, 1.074e9, 0.2070),
            (32.94, 2.612, 63.999e9, 0.1763),
            (33.78, 3.526, 1.133e9, 0.2079),
        ],
    )
    def test_published_rows(self, ts, nll, flops, expected):
        assert ic_biased(ts, nll, flops, -24) == pytest.approx(expected, abs=1e-3)

    def test_bias_cancels_gain(self):
        assert ic_biased(10, 4, 2**20, -6) == 0.0

    def test_non_finite_bias_rejected(self):
        with pytest.raises(DomainError):
            ic_biased(10, 4, 2**20, float("inf"))


@given(
    text=st.floats(1.0, 64.0),
    nll=st.floats(0.0, 32.0),
    flops=st.floats(2.0, 1e15),
)
def test_bias_zero_identity(text, nll, flops):
    assert ic_biased(text, nll, flops, 0.0) == ic_per_token(text, nll, flops)


@given(
    text=st.floats(1.0, 64.0),
    nll=st.floats(0.0, 32.0),
    delta=st.floats(0.01, 10.0),
    flops=st.floats(2.0, 1e15),
    bias=st.floats(-30.0, 10.0),
)
def test_strictly_decreasing_in_nll(text, nll, delta, flops, bias):
    assert ic_biased(text, nll + delta, flops, bias) < ic_biased(text, nll, flops, bias)


@given(
    text=st.floats(1.0, 64.0),
    nll=st.floats(0.0, 32.0),
    flops=st.floats(2.0, 1e12),
    bias=st.floats(-30.0, 10.0),
)
def test_doubling_flops_scale_factor(text, nll, flops, bias):
    log_f = math.log2(flops)
    lhs = ic_biased(text, nll, 2 * flops, bias)
    rhs = ic_biased(text, nll, flops, bias) * (log_f / (log_f + 1.0))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-15)


def _sample(sample_id="s", token_count=3, text_bits=16, nll=4.0, flops=2.0 * 2**32):
    return SampleMeasurement(
        sample_id=sample_id,
        token_count=token_count,
        text_bits=text_bits,
        nll_bits_total=nll,
        flops_total=flops,
    )


class TestSampleMeasurement:
    def test_valid(self):
        m = _sample()
        assert m.predicted_tokens == 2

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"token_count": 1},
            {"text_bits": 0},
            {"text_bits": 12},  # not a byte multiple
            {"text_bits": -8},
            {"nll": -0.5},
            {"nll": float("nan")},
            {"flops": 0.0},
            {"flops": float("inf")},
        ],
    )
    def test_invariants_enforced(self, kwargs):
        with pytest.raises(DomainError):
            _sample(**kwargs)


class TestAggregate:
    def test_single_sample_hand_values(self):
        result = aggregate([_sample()], "m", "unknown-ds", BiasTable({}, default=0.0))
        assert result.mean_text_bits_per_token == 8.0
        assert result.mean_nll_bits_per_token == 2.0
        assert result.mean_flops_per_token == float(2**32)
        assert result.ic_unbiased == 6.0 / 32.0 == 0.1875
        assert result.ic == result.ic_unbiased
        assert result.sample_count == 1

    def test_duplicate_sample_idempotent_means(self):
        one = aggregate([_sample()], "m", "d", BiasTable({}))
        two = aggregate([_sample(), _sample("s2")], "m", "d", BiasTable({}))
        assert two.mean_text_bits_per_token == one.mean_text_bits_per_token
        assert two.mean_nll_bits_per_token == one.mean_nll_bits_per_token
        assert two.ic == one.ic
        assert two.sample_count == 2

    def test_permutation_invariance_bit_exact(self):
        rng = random.Random(7)
        samples = [
            _sample(
                sample_id=f"s{i:03d}",
                token_count=rng.randint(2, 50),
                text_bits=8 * rng.randint(1, 400),
                nll=rng.uniform(0, 120),
                flops=rng.uniform(10, 1e9),
            )
            for i in range(40)
        ]
        base = aggregate(samples, "m", "d", BiasTable({}))
        for _ in range(10):
            rng.shuffle(samples)
            assert aggregate(samples, "m", "d", BiasTable({})) == base

    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            aggregate([], "m", "d", BiasTable({}))

    def test_ic_recomputes_from_stored_means(self):
        bt = BiasTable({"d": -5.0})
        result = aggregate([_sample(), _sample("t", 5, 80, 9.0, 1e7)], "m", "d", bt)
        recomputed = ic_biased(
            result.mean_text_bits_per_token,
            result.mean_nll_bits_per_token,
            result.mean_flops_per_token,
            -5.0,
        )
        assert recomputed == result.ic
        assert result.ic_unbiased == ic_per_token(
            result.mean_text_bits_per_token,
            result.mean_nll_bits_per_token,
            result.mean_flops_per_token,
        )

    def test_unknown_dataset_warns_and_uses_default(self, caplog):
        with caplog.at_level("WARNING"):
            result = aggregate([_sample()], "m", "never-seen", BiasTable.builtin())
        assert "never-seen" in caplog.text
        assert result.ic == result.ic_unbiased


class TestBiasTable:
    def test_builtin_seed_values(self):
        table = BiasTable.builtin()
        assert table.entries["mixed"] == -24
        assert table.entries["finepdfs-en"] == -27
        assert table.entries["ch-fineweb-edu"] == -18.7
        assert table.entries["fineweb-edu"] == -27
        assert table.entries["nextcoder"] == -27
        assert table.entries == dict(BUILTIN_BIASES)

    def test_from_text(self):
        table = BiasTable.from_text(
            "# comment\nmixed = -24\n\nmy-set=-11.5  # trailing\ndefault = -1\n"
        )
        assert table.entries == {"mixed": -24.0, "my-set": -11.5}
        assert table.default == -1.0
        assert table.bias_for("elsewhere") == -1.0

    @pytest.mark.parametrize("text", ["mixed -24", "mixed=abc", "x=inf"])
    def test_bad_lines_rejected(self, text):
        with pytest.raises(ParseError):
            BiasTable.from_text(text)

    def test_from_file(self, tmp_path):
        p = tmp_path / "bias.conf"
        p.write_text("code=-27\n")
        assert BiasTable.from_file(p).bias_for("code") == -27.0


def test_sample_ic_matches_pooled_for_one_sample():
    m = _sample(token_count=9, text_bits=8 * 30, nll=12.0, flops=8e6)
    pooled = aggregate([m], "m", "d", BiasTable({"d": -2.0}))
    assert sample_ic(m, -2.0) == pooled.ic


def test_icresult_dict_round_trip():
    bt = BiasTable({"d": -3.0})
    result = aggregate([_sample()], "m", "d", bt)
    assert IcResult.from_dict(result.to_dict()) == result
    with pytest.raises(ParseError):
        IcResult.from_dict({"model_id": "m"})
