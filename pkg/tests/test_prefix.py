import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symforge.expr import Int, Sym, X, add, mul, sin
from symforge.prefix import (
    MalformedSequenceError,
    Vocabulary,
    build_vocabulary,
    decode,
    encode,
    is_decodable,
    text_to_tokens,
    tokens_to_text,
)

from conftest import random_expressions


class TestEncode:
    def test_single_leaf(self):
        assert encode(X) == ("x",)

    def test_nested_constant_expression(self):
        e = add(7, mul(3, add(5, 2)))
        assert encode(e) == (
            "add", "INT+", "7", "mul", "INT+", "3", "add", "INT+", "5", "INT+", "2",
        )

    def test_negative_integer(self):
        assert encode(Int(-42)) == ("INT-", "4", "2")

    def test_zero(self):
        assert encode(Int(0)) == ("INT+", "0")

    def test_multi_digit(self):
        assert encode(Int(2026)) == ("INT+", "2", "0", "2", "6")

    def test_token_count_accounting(self):
        from symforge.expr import metrics

        for e in random_expressions(100, seed=5):
            internal, _, leaves = metrics(e)
            extra = sum(
                len(str(abs(n.value)))  # digits
                for n in _leaves_of(e)
                if isinstance(n, Int)
            )
            signs = sum(1 for n in _leaves_of(e) if isinstance(n, Int))
            symbol_leaves = leaves - signs
            assert len(encode(e)) == internal + symbol_leaves + signs + extra


def _leaves_of(e):
    from symforge.expr import subtrees, App

    return [n for n in subtrees(e) if not isinstance(n, App)]


class TestDecode:
    def test_simple(self):
        assert decode(("sin", "x")) == sin(X)

    def test_missing_operand(self):
        with pytest.raises(MalformedSequenceError) as exc_info:
            decode(("add", "x"))
        assert exc_info.value.position == 2

    def test_trailing_tokens(self):
        with pytest.raises(MalformedSequenceError, match="trailing"):
            decode(("x", "x"))

    def test_dangling_sign(self):
        with pytest.raises(MalformedSequenceError, match="no digits"):
            decode(("add", "x", "INT+"))

    def test_unknown_token(self):
        with pytest.raises(MalformedSequenceError, match="unknown token"):
            decode(("add", "x", "frob"))

    def test_bare_digit(self):
        with pytest.raises(MalformedSequenceError, match="digit without"):
            decode(("add", "x", "7"))

    def test_leading_zero_rejected(self):
        with pytest.raises(MalformedSequenceError, match="leading zero"):
            decode(("INT+", "0", "7"))

    def test_negative_zero_rejected(self):
        with pytest.raises(MalformedSequenceError):
            decode(("INT-", "0"))

    def test_empty(self):
        with pytest.raises(MalformedSequenceError):
            decode(())


class TestRoundTrip:
    def test_sampler_expressions(self):
        for e in random_expressions(2000, seed=21):
            assert decode(encode(e)) == e

    def test_all_profiles(self):
        for profile in ("uniform", "poly", "trig", "log"):
            for e in random_expressions(200, seed=8, profile=profile):
                assert decode(encode(e)) == e

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, seed):
        from symforge.sampling import preset_profile, sample_expression

        e = sample_expression(preset_profile("uniform").with_ops_range(0, 6), random.Random(seed))
        assert decode(encode(e)) == e

    @given(
        tokens=st.lists(
            st.sampled_from(
                ["add", "mul", "sin", "x", "y", "pi", "INT+", "INT-", "0", "1", "7"]
            ),
            min_size=1,
            max_size=12,
        )
    )
    @settings(max_examples=500, deadline=None)
    def test_decodable_iff_reencoding_reproduces(self, tokens):
        tokens = tuple(tokens)
        if is_decodable(tokens):
            assert encode(decode(tokens)) == tokens
        else:
            with pytest.raises(MalformedSequenceError):
                decode(tokens)


class TestVocabulary:
    def test_reserved_ids(self):
        vocab = build_vocabulary()
        assert vocab.id("PAD") == 0
        assert vocab.id("BOS") == 1
        assert vocab.id("EOS") == 2
        assert vocab.id("UNK") == 3

    def test_size(self):
        # 4 reserved + 15 operators + 9 leaf symbols + 2 signs + 10 digits
        assert len(build_vocabulary()) == 40

    def test_bijection(self):
        vocab = build_vocabulary()
        ids = [vocab.id(t) for t in vocab.tokens]
        assert sorted(ids) == list(range(len(vocab)))
        for t in vocab.tokens:
            assert vocab.token(vocab.id(t)) == t

    def test_unknown_maps_to_unk(self):
        vocab = build_vocabulary()
        assert vocab.id("frobnicate") == 3

    def test_stable_across_builds(self):
        assert build_vocabulary().tokens == build_vocabulary().tokens

    def test_save_load_round_trip(self, tmp_path):
        vocab = build_vocabulary()
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        assert Vocabulary.load(path).tokens == vocab.tokens
        lines = path.read_text().splitlines()
        assert lines[0] == "PAD"
        assert len(lines) == 40

    def test_duplicate_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(("a", "a"))


class TestTextForm:
    def test_space_joined(self):
        tokens = encode(add(X, Int(-3)))
        text = tokens_to_text(tokens)
        assert text == "add x INT- 3"
        assert text_to_tokens(text) == tokens
