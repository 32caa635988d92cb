import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciphercast.models import KeyedRng, SchemeParams
from ciphercast.permute_codec import (
    CodebookSizeError,
    TypeClassTooLarge,
    apply_permutation,
    decode,
    encode,
    enumerate_type_class,
    gen_permutation_codebook,
    invert_permutation,
    type_class_size,
    type_of,
    uniformity_test,
)

blocks = st.lists(st.integers(0, 1), min_size=1, max_size=24).map(
    lambda bits: np.array(bits, dtype=np.int8)
)


@given(blocks, st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_scramble_descramble_roundtrip(block, seed):
    perm = np.random.default_rng(seed).permutation(block.size)
    scrambled = apply_permutation(perm, block)
    restored = apply_permutation(invert_permutation(perm), scrambled)
    assert np.array_equal(restored, block)


@given(blocks, st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_scrambling_preserves_empirical_type(block, seed):
    perm = np.random.default_rng(seed).permutation(block.size)
    assert type_of(apply_permutation(perm, block)) == type_of(block)


def test_apply_permutation_convention():
    # output position t holds the input at perm[t]
    block = np.array([10, 20, 30], dtype=np.int8)
    perm = np.array([2, 0, 1])
    assert apply_permutation(perm, block).tolist() == [30, 10, 20]


def test_type_class_size_small_example():
    block = np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)
    size = type_class_size(type_of(block))
    assert size.exact == 20
    assert size.lower <= 20 <= size.upper
    assert size.upper == 2**6  # 2^{n h(1/2)}
    assert math.isclose(size.log2_upper, 6.0)


@pytest.mark.parametrize("n", range(2, 11))
def test_type_class_size_matches_enumeration(n):
    for ones in range(n + 1):
        block = np.array([1] * ones + [0] * (n - ones), dtype=np.int8)
        seq_type = type_of(block)
        members = enumerate_type_class(seq_type)
        assert len(members) == type_class_size(seq_type).exact


def test_type_class_sandwich_ternary():
    block = np.array([0, 0, 1, 1, 2, 2, 2], dtype=np.int8)
    size = type_class_size(type_of(block))
    assert size.lower <= size.exact <= size.upper
    # exact multinomial: 7! / (2! 2! 3!)
    assert size.exact == math.factorial(7) // (2 * 2 * 6)


def test_codebook_roundtrip_and_key_range():
    rng = KeyedRng(9)
    book = gen_permutation_codebook(6, 0.5, rng)
    assert len(book.perms) == 8
    block = np.array([0, 1, 1, 0, 1, 0], dtype=np.int8)
    for key in range(8):
        out = apply_permutation(book.entry(key), block)
        back = apply_permutation(book.inverse(key), out)
        assert np.array_equal(back, block)
    with pytest.raises(KeyError):
        book.entry(8)


def test_codebook_refuses_oversize_key_space():
    with pytest.raises(CodebookSizeError):
        gen_permutation_codebook(100, 1.0, KeyedRng(0), max_entries=1 << 10)


def test_encode_decode_noiseless_roundtrip():
    params = SchemeParams.binary(12, 0.5, 0.0)
    rng = KeyedRng(11)
    book = gen_permutation_codebook(12, 0.5, rng.derive(0))
    block = (rng.derive(1).generator().random(12) < 0.5).astype(np.int8)
    for key in (0, 5, 63):
        x = encode(block, key, book, params, rng.derive(2, key))
        restored = decode(x, key, book, params)
        assert np.array_equal(restored, block)


def test_encode_applies_independent_flips():
    # with crossover 1/2 the encoder output is a fresh coin flip per symbol
    params = SchemeParams.binary(20_000, 0.0, 0.5)
    book = gen_permutation_codebook(20_000, 0.0, KeyedRng(12))
    block = np.zeros(20_000, dtype=np.int8)
    x = encode(block, 0, book, params, KeyedRng(13))
    assert abs(x.mean() - 0.5) < 0.02


def test_uniformity_test_accepts_uniform_scrambler():
    block = np.array([0, 0, 1, 1, 1], dtype=np.int8)
    report = uniformity_test(block, samples=50_000, rng=KeyedRng(14))
    assert report.class_size == 10
    assert report.dof == 9
    assert report.p_value > 1e-3


def test_uniformity_test_rejects_biased_scrambler():
    block = np.array([0, 0, 1, 1, 1], dtype=np.int8)

    def lazy(gen, count, n):
        perms = np.argsort(gen.random((count, n)), axis=1)
        perms[gen.random(count) < 0.3] = np.arange(n)
        return perms

    report = uniformity_test(block, samples=50_000, rng=KeyedRng(15), permute=lazy)
    assert report.p_value < 1e-6


def test_uniformity_test_refuses_huge_classes():
    block = np.arange(64, dtype=np.int8) % 17
    with pytest.raises(TypeClassTooLarge):
        uniformity_test(block, samples=10, rng=KeyedRng(16))
