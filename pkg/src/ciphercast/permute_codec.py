"""Keyed permutation scrambling of source blocks.

The shared key indexes a codebook of uniformly random permutations.  The
sender scrambles the block, transmits it symbol-by-symbol (binary case:
through an independent flip channel), and legitimate receivers decode
symbol-wise and unscramble.  A scrambled block is uniform over its type
class, which is what starves list attackers that do not know the key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .models import KeyedRng, SchemeParams, key_count

__all__ = [
    "CodebookSizeError",
    "TypeClassTooLarge",
    "PermutationCodebook",
    "SequenceType",
    "TypeClassSize",
    "UniformityReport",
    "MAX_CODEBOOK_ENTRIES",
    "gen_permutation_codebook",
    "apply_permutation",
    "invert_permutation",
    "encode",
    "decode",
    "type_of",
    "type_class_size",
    "enumerate_type_class",
    "uniformity_test",
]

MAX_CODEBOOK_ENTRIES = 1 << 20


class CodebookSizeError(RuntimeError):
    """Key space too large to materialise as an explicit codebook."""


class TypeClassTooLarge(RuntimeError):
    """Type class too large to enumerate for an exact uniformity test."""


@dataclass(frozen=True)
class PermutationCodebook:
    """Explicit key-indexed permutations with precomputed inverses.

    ``perms[k]`` maps positions: output position ``t`` of the scrambled block
    holds input symbol ``perms[k][t]``.
    """

    perms: np.ndarray
    inverses: np.ndarray

    def __post_init__(self):
        if self.perms.shape != self.inverses.shape or self.perms.ndim != 2:
            raise ValueError("perms and inverses must be matching 2-D arrays")

    @property
    def num_keys(self) -> int:
        return self.perms.shape[0]

    @property
    def n(self) -> int:
        return self.perms.shape[1]

    def entry(self, key: int) -> np.ndarray:
        if not 0 <= key < self.num_keys:
            raise KeyError(f"key {key} out of range [0, {self.num_keys})")
        return self.perms[key]

    def inverse(self, key: int) -> np.ndarray:
        if not 0 <= key < self.num_keys:
            raise KeyError(f"key {key} out of range [0, {self.num_keys})")
        return self.inverses[key]


def gen_permutation_codebook(
    n: int,
    key_rate: float,
    rng: KeyedRng,
    max_entries: int = MAX_CODEBOOK_ENTRIES,
) -> PermutationCodebook:
    """Sample ``2**ceil(n*key_rate)`` independent uniform permutations.

    Refuses (``CodebookSizeError``) rather than silently truncating when the
    key space exceeds ``max_entries``; callers that only ever touch one key
    per block should draw that key's permutation directly instead.
    """
    num = key_count(n, key_rate)
    if num > max_entries:
        raise CodebookSizeError(
            f"2^{num.bit_length() - 1} keys exceed the materialisation cap "
            f"of {max_entries} entries"
        )
    gen = rng.generator()
    perms = np.stack([gen.permutation(n) for _ in range(num)])
    return PermutationCodebook(perms=perms, inverses=np.argsort(perms, axis=1))


def apply_permutation(perm: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Scramble: output position ``t`` receives ``block[perm[t]]``."""
    block = np.asarray(block)
    perm = np.asarray(perm)
    if block.shape[-1] != perm.shape[0]:
        raise ValueError(f"length mismatch: block {block.shape[-1]}, perm {perm.shape[0]}")
    return block[..., perm]


def invert_permutation(perm: np.ndarray) -> np.ndarray:
    return np.argsort(np.asarray(perm))


def encode(
    block: np.ndarray,
    key: int,
    codebook: PermutationCodebook,
    params: SchemeParams,
    rng: KeyedRng,
) -> np.ndarray:
    """Scramble with the keyed permutation, then apply the per-symbol map.

    Binary blocks get independent Bernoulli(``params.crossover``) flips (the
    scheme's test channel); scalar Gaussian blocks are scaled by
    ``params.alpha``.
    """
    scrambled = apply_permutation(codebook.entry(key), block)
    if params.crossover is not None:
        flips = rng.generator().random(scrambled.shape) < params.crossover
        return np.bitwise_xor(scrambled.astype(np.int8), flips.astype(np.int8))
    if params.power is not None and params.alpha is not None:
        return params.alpha * scrambled
    raise ValueError("params carry neither a binary crossover nor a scalar gain")


def decode(
    received: np.ndarray,
    key: int,
    codebook: PermutationCodebook,
    params: SchemeParams,
    receiver: int = 1,
) -> np.ndarray:
    """Symbol-wise estimate followed by unscrambling.

    Binary receivers use the identity symbol estimate (optimal for crossover
    below one half); Gaussian receivers scale by their ``beta`` coefficient.
    ``receiver`` 0 denotes the eavesdropper's coefficient.
    """
    received = np.asarray(received)
    if params.crossover is not None:
        est = received
    elif params.betas is not None:
        est = params.betas[receiver] * received
    else:
        raise ValueError("params carry neither a binary crossover nor estimator betas")
    return est[..., codebook.inverse(key)]


# ---------------------------------------------------------------------------
# Types and type classes


@dataclass(frozen=True)
class SequenceType:
    """Empirical type: sorted (symbol, count) pairs of a block."""

    counts: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return sum(c for _, c in self.counts)

    @property
    def alphabet(self) -> tuple:
        return tuple(a for a, _ in self.counts)

    def entropy_bits(self) -> float:
        n = self.n
        return -sum(
            (c / n) * math.log2(c / n) for _, c in self.counts if c > 0
        )


@dataclass(frozen=True)
class TypeClassSize:
    """Exact multinomial count with sandwich bounds (linear and log2)."""

    exact: int
    lower: float
    upper: float
    log2_lower: float
    log2_upper: float


def type_of(block) -> SequenceType:
    arr = np.asarray(block)
    symbols, counts = np.unique(arr, return_counts=True)
    return SequenceType(tuple((s.item(), int(c)) for s, c in zip(symbols, counts)))


def type_class_size(seq_type: SequenceType) -> TypeClassSize:
    """Number of blocks sharing the type, with entropy sandwich bounds.

    The exact count is the multinomial coefficient (big integer).  Bounds:
    ``(n+1)^(-A) * 2^(n H)  <=  exact  <=  2^(n H)`` where ``A`` is the
    alphabet size and ``H`` the type's entropy in bits.  Linear-scale bounds
    overflow to ``inf`` for long blocks; the log2 fields stay finite.
    """
    n = seq_type.n
    if n == 0:
        raise ValueError("empty type")
    exact = math.factorial(n)
    for _, c in seq_type.counts:
        exact //= math.factorial(c)
    h = seq_type.entropy_bits()
    a = len(seq_type.counts)
    log2_upper = n * h
    log2_lower = n * h - a * math.log2(n + 1)
    try:
        upper = 2.0 ** log2_upper
    except OverflowError:
        upper = math.inf
    try:
        lower = 2.0 ** log2_lower
    except OverflowError:
        lower = math.inf
    return TypeClassSize(
        exact=exact, lower=lower, upper=upper, log2_lower=log2_lower, log2_upper=log2_upper
    )


def enumerate_type_class(seq_type: SequenceType, limit: int = 10**6) -> np.ndarray:
    """All blocks of the given type, lexicographically ordered, as rows."""
    size = type_class_size(seq_type).exact
    if size > limit:
        raise TypeClassTooLarge(f"type class has {size} members, cap is {limit}")
    n = seq_type.n
    rows = np.empty((size, n), dtype=np.int64)
    symbols = [s for s, _ in seq_type.counts]
    counts = [c for _, c in seq_type.counts]

    def fill(prefix: list, remaining: list, row_offset: int) -> int:
        if len(prefix) == n:
            rows[row_offset] = prefix
            return row_offset + 1
        for idx, sym in enumerate(symbols):
            if remaining[idx] == 0:
                continue
            remaining[idx] -= 1
            prefix.append(sym)
            row_offset = fill(prefix, remaining, row_offset)
            prefix.pop()
            remaining[idx] += 1
        return row_offset

    fill([], counts, 0)
    return rows


@dataclass(frozen=True)
class UniformityReport:
    statistic: float
    p_value: float
    dof: int
    class_size: int
    samples: int


def uniformity_test(
    block,
    samples: int,
    rng: KeyedRng,
    max_class: int = 10**6,
    permute=None,
) -> UniformityReport:
    """Chi-square test that keyed scrambles of ``block`` cover its type class uniformly.

    Draws ``samples`` independent uniform permutations, scrambles ``block``
    with each, bins the results over the fully enumerated type class, and
    returns the goodness-of-fit report.  ``permute`` may override the
    permutation sampler (e.g. with a deliberately biased one for negative
    controls); it receives ``(generator, count, n)`` and returns an
    ``(count, n)`` index array.
    """
    arr = np.asarray(block)
    n = arr.shape[0]
    seq_type = type_of(arr)
    members = enumerate_type_class(seq_type, limit=max_class)
    size = members.shape[0]

    # Integer-encode blocks so binning is a vectorised searchsorted.
    _, inverse = np.unique(arr, return_inverse=True)
    base = int(inverse.max()) + 2
    if base**n > 2**62:
        raise TypeClassTooLarge("alphabet/length too large for vectorised binning")
    weights = base ** np.arange(n, dtype=np.int64)
    _, member_inverse = np.unique(members, return_inverse=True)
    member_codes = member_inverse.reshape(members.shape) @ weights
    order = np.argsort(member_codes)
    sorted_codes = member_codes[order]

    gen = rng.generator()
    counts = np.zeros(size, dtype=np.int64)
    chunk = 1 << 15
    remaining = samples
    while remaining > 0:
        take = min(chunk, remaining)
        if permute is None:
            perms = np.argsort(gen.random((take, n)), axis=1)
        else:
            perms = permute(gen, take, n)
        scrambled = inverse[perms]
        codes = scrambled @ weights
        idx = np.searchsorted(sorted_codes, codes)
        counts += np.bincount(order[idx], minlength=size)
        remaining -= take

    statistic, p_value = stats.chisquare(counts)
    return UniformityReport(
        statistic=float(statistic),
        p_value=float(p_value),
        dof=size - 1,
        class_size=size,
        samples=samples,
    )
