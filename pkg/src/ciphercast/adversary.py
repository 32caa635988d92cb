"""Eavesdropper list attacks against the keyed uncoded schemes.

A list attacker observes the eavesdropper output and produces up to
``2**floor(n * list_rate)`` reconstruction candidates, succeeding when any
lands within its distortion budget of the true block.  This module provides:

* an exact optimal list builder for tiny binary instances (ground truth for
  everything else),
* a greedy builder with the usual (1 - 1/e) coverage guarantee,
* two scalable random-coding attacks — exhaustive key search followed by
  quantisation of the keyed estimate, and a source-only attack that ignores
  the observation — evaluated by exact per-trial coverage probabilities
  (success indicators are sampled from them, never approximated away),
* the spherical-cap covering geometry used by the Gaussian variants.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .models import BroadcastChannel, KeyedRng, SchemeParams, SourceModel
from .ortho_codec import sample_orthogonal
from .rd_analysis import binary_convolve, binary_entropy, log2_plus
from .regions import _half_log2_ratio_plus

__all__ = [
    "InstanceTooLarge",
    "AttackResult",
    "HenchmanCode",
    "BinaryScrambleInstance",
    "ExhaustiveResult",
    "CapRatio",
    "CoveringEstimate",
    "wilson_interval",
    "list_size",
    "exhaustive_henchman",
    "greedy_code",
    "greedy_henchman",
    "code_success_exact",
    "simulate_henchman_code",
    "keysearch_attack",
    "ignorez_attack",
    "spherical_cap_ratio",
    "log2_spherical_cap_ratio",
    "covering_count_estimate",
]

_WILSON_Z = 1.959963984540054  # two-sided 95%


class InstanceTooLarge(RuntimeError):
    """Exact optimisation refused; the message carries the size diagnostic."""


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} out of range for {trials} trials")
    z2 = _WILSON_Z**2
    phat = successes / trials
    denom = 1.0 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    half = (
        _WILSON_Z
        * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials**2))
        / denom
    )
    # the score interval pins at the simplex edges for degenerate counts;
    # keep those exact instead of leaving float dust
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == trials else min(1.0, centre + half)
    return (low, high)


def list_size(n: int, list_rate: float) -> int:
    """2**floor(n * list_rate), guarded against float fuzz, at least 1."""
    if list_rate < 0:
        raise ValueError(f"list rate must be nonnegative, got {list_rate}")
    return 1 << max(0, math.floor(n * list_rate + 1e-9))


@dataclass(frozen=True)
class AttackResult:
    """Monte Carlo attack outcome with a Wilson 95% confidence interval."""

    strategy: str
    list_rate: float
    d0: float
    n: int
    success: float
    ci_low: float
    ci_high: float
    trials: int
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_bits(
        cls, strategy: str, list_rate: float, d0: float, n: int, bits, **extra
    ) -> "AttackResult":
        bits = np.asarray(bits, dtype=bool)
        lo, hi = wilson_interval(int(bits.sum()), bits.size)
        return cls(
            strategy=strategy,
            list_rate=list_rate,
            d0=d0,
            n=n,
            success=float(bits.mean()),
            ci_low=lo,
            ci_high=hi,
            trials=bits.size,
            extra=dict(extra),
        )


@dataclass(frozen=True)
class HenchmanCode:
    """Observation-indexed reconstruction lists under a shared size budget."""

    n: int
    list_rate: float
    lists: dict

    def __post_init__(self):
        cap = list_size(self.n, self.list_rate)
        for z, entries in self.lists.items():
            if len(entries) > cap:
                raise ValueError(
                    f"list for observation {z} has {len(entries)} entries, cap is {cap}"
                )

    @property
    def max_size(self) -> int:
        return list_size(self.n, self.list_rate)


# ---------------------------------------------------------------------------
# Exact small-block machinery


@dataclass(frozen=True)
class BinaryScrambleInstance:
    """Fully enumerable binary scheme instance seen by the eavesdropper.

    ``flip`` is the end-to-end crossover between the scrambled block and the
    observation (test channel cascaded with the eavesdropper's channel);
    ``perms`` the keyed permutation codebook, one row per equiprobable key.
    """

    n: int
    source_q: float
    flip: float
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not 1 <= self.n <= 20:
            raise ValueError(f"enumeration instance needs 1 <= n <= 20, got {self.n}")
        if not 0.0 <= self.source_q <= 1.0 or not 0.0 <= self.flip <= 0.5:
            raise ValueError("source_q must be in [0,1] and flip in [0,1/2]")
        if not self.perms:
            raise ValueError("need at least one key permutation")
        for perm in self.perms:
            if sorted(perm) != list(range(self.n)):
                raise ValueError(f"not a permutation of range({self.n}): {perm}")

    @classmethod
    def with_full_key(cls, n: int, source_q: float = 0.5, flip: float = 0.1):
        perms = tuple(itertools.permutations(range(n)))
        return cls(n=n, source_q=source_q, flip=flip, perms=perms)

    @classmethod
    def from_models(
        cls,
        source: SourceModel,
        channel: BroadcastChannel,
        params: SchemeParams,
        perms,
    ):
        if source.kind != "bernoulli" or channel.kind != "bsc":
            raise ValueError("enumeration instances are binary only")
        flip = binary_convolve(params.crossover, channel.crossovers[0])
        return cls(
            n=params.n,
            source_q=source.q,
            flip=flip,
            perms=tuple(tuple(int(v) for v in p) for p in perms),
        )


def _bit_table(n: int) -> np.ndarray:
    codes = np.arange(1 << n)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.int8)


def _instance_tables(instance: BinaryScrambleInstance):
    """Joint law over (source block, observation) and the popcount table."""
    n = instance.n
    size = 1 << n
    bits = _bit_table(n)
    pop = bits.sum(axis=1).astype(np.int64)
    weights = 1 << np.arange(n)

    p_s = np.prod(
        np.where(bits == 1, instance.source_q, 1.0 - instance.source_q), axis=1
    )
    flip = instance.flip
    cond = np.zeros((size, size))
    like = np.array([flip**d * (1.0 - flip) ** (n - d) for d in range(n + 1)])
    for perm in instance.perms:
        permuted_codes = bits[:, list(perm)] @ weights
        xor = permuted_codes[:, None] ^ np.arange(size)[None, :]
        cond += like[pop[xor]]
    cond /= len(instance.perms)
    joint = p_s[:, None] * cond  # indexed [source, observation]
    return bits, pop, joint


def _cover_matrix(pop: np.ndarray, n: int, d0: float) -> np.ndarray:
    """cover[c, s] = True when candidate code c is within the budget of s."""
    size = pop.size
    radius = math.floor(n * d0 + 1e-9)
    xor = np.arange(size)[:, None] ^ np.arange(size)[None, :]
    return pop[xor] <= radius


@dataclass(frozen=True)
class ExhaustiveResult:
    """Exact optimal list attack on an enumerable instance."""

    success: float
    code: HenchmanCode
    per_observation: dict


def _candidate_representatives(cover: np.ndarray) -> np.ndarray:
    """Deduplicate candidates by coverage set, keeping the smallest code."""
    _, first = np.unique(cover, axis=0, return_index=True)
    return np.sort(first)


def _best_list_exact(
    cover: np.ndarray, weight: np.ndarray, budget: int, combo_budget: int
) -> tuple[float, tuple[int, ...]]:
    reps = _candidate_representatives(cover)
    useful = reps[cover[reps] @ weight > 0.0]
    if useful.size == 0:
        return 0.0, (0,)
    take = min(budget, useful.size)
    total = math.comb(useful.size, take)
    if total > combo_budget:
        raise InstanceTooLarge(
            f"exact list search needs {total} candidate combinations "
            f"({useful.size} choose {take}), budget is {combo_budget}"
        )
    size = weight.size
    if size <= 20:
        # Subset-sum table over source masks: O(1) coverage per combination.
        mask_of = []
        for r in useful:
            m = 0
            for idx in np.flatnonzero(cover[r]):
                m |= 1 << int(idx)
            mask_of.append(m)
        wsum = np.zeros(1 << size)
        for m in range(1, 1 << size):
            low = m & (-m)
            wsum[m] = wsum[m ^ low] + weight[low.bit_length() - 1]
        best_val = -1.0
        best_combo: tuple[int, ...] = ()
        for combo in itertools.combinations(range(useful.size), take):
            u = 0
            for c in combo:
                u |= mask_of[c]
            val = wsum[u]
            if val > best_val:
                best_val = val
                best_combo = combo
        return float(best_val), tuple(int(useful[c]) for c in best_combo)
    best_val = -1.0
    best_combo = ()
    rows = cover[useful]
    for combo in itertools.combinations(range(useful.size), take):
        val = float(weight[np.bitwise_or.reduce(rows[list(combo)], axis=0)].sum())
        if val > best_val:
            best_val = val
            best_combo = combo
    return float(best_val), tuple(int(useful[c]) for c in best_combo)


def exhaustive_henchman(
    instance: BinaryScrambleInstance,
    d0: float,
    list_rate: float,
    combo_budget: int = 5_000_000,
) -> ExhaustiveResult:
    """Exactly optimal list attack by exhaustive subset search.

    For every observation the posterior-weighted ball-union coverage is
    maximised over all candidate lists (deduplicated by coverage set; ties
    resolved lexicographically by reconstruction code).  Probabilities are
    exact up to float summation, so this is the ground truth for Monte Carlo
    and greedy comparisons.  Instances whose combination count exceeds
    ``combo_budget`` are refused with the count in the diagnostic.
    """
    bits, pop, joint = _instance_tables(instance)
    cover = _cover_matrix(pop, instance.n, d0)
    budget = list_size(instance.n, list_rate)
    lists = {}
    per_obs = {}
    total = 0.0
    for z in range(joint.shape[1]):
        weight = joint[:, z]
        val, combo = _best_list_exact(cover, weight, budget, combo_budget)
        lists[z] = combo
        per_obs[z] = val
        total += val
    code = HenchmanCode(n=instance.n, list_rate=list_rate, lists=lists)
    return ExhaustiveResult(success=float(total), code=code, per_observation=per_obs)


def greedy_code(
    instance: BinaryScrambleInstance, d0: float, list_rate: float
) -> HenchmanCode:
    """Greedy max-coverage lists (ties to the smaller code).

    Standard submodular guarantee: at least (1 - 1/e) of the optimal
    coverage, and never more than it.
    """
    bits, pop, joint = _instance_tables(instance)
    cover = _cover_matrix(pop, instance.n, d0)
    budget = list_size(instance.n, list_rate)
    lists = {}
    for z in range(joint.shape[1]):
        weight = joint[:, z].copy()
        chosen = []
        for _ in range(budget):
            gains = cover @ weight
            best = int(np.argmax(gains))  # argmax returns the first (smallest) index
            if gains[best] <= 0.0:
                break
            chosen.append(best)
            weight[cover[best]] = 0.0
        lists[z] = tuple(chosen) if chosen else (0,)
    return HenchmanCode(n=instance.n, list_rate=list_rate, lists=lists)


def code_success_exact(
    instance: BinaryScrambleInstance, code: HenchmanCode, d0: float
) -> float:
    """Exact success probability of a fixed list code on an instance."""
    bits, pop, joint = _instance_tables(instance)
    cover = _cover_matrix(pop, instance.n, d0)
    total = 0.0
    for z in range(joint.shape[1]):
        entries = list(code.lists.get(z, ()))
        if not entries:
            continue
        covered = np.bitwise_or.reduce(cover[entries], axis=0)
        total += float(joint[covered, z].sum())
    return total


def simulate_henchman_code(
    instance: BinaryScrambleInstance,
    code: HenchmanCode,
    d0: float,
    trials: int,
    rng: KeyedRng,
    strategy: str = "henchman-mc",
) -> AttackResult:
    """Monte Carlo success of a fixed list code against fresh scheme draws."""
    bits, pop, joint = _instance_tables(instance)
    cover = _cover_matrix(pop, instance.n, d0)
    n = instance.n
    size = 1 << n
    covered = np.zeros((size, size), dtype=bool)  # [observation, source]
    for z, entries in code.lists.items():
        if entries:
            covered[z] = np.bitwise_or.reduce(cover[list(entries)], axis=0)

    gen = rng.generator()
    p_s = np.prod(
        np.where(bits == 1, instance.source_q, 1.0 - instance.source_q), axis=1
    )
    cum = np.cumsum(p_s)
    cum[-1] = 1.0
    s_idx = np.searchsorted(cum, gen.random(trials))
    perms = np.asarray(instance.perms)
    k_idx = gen.integers(0, perms.shape[0], size=trials)
    flips = (gen.random((trials, n)) < instance.flip).astype(np.int8)
    scrambled = bits[s_idx[:, None], perms[k_idx]]
    weights = 1 << np.arange(n)
    z_codes = ((scrambled ^ flips) @ weights).astype(np.int64)
    hits = covered[z_codes, s_idx]
    return AttackResult.from_bits(strategy, code.list_rate, d0, n, hits)


def greedy_henchman(
    instance: BinaryScrambleInstance,
    d0: float,
    list_rate: float,
    trials: int,
    rng: KeyedRng,
) -> AttackResult:
    """Monte Carlo success of the greedy list code."""
    code = greedy_code(instance, d0, list_rate)
    result = simulate_henchman_code(instance, code, d0, trials, rng, strategy="greedy")
    result.extra["exact_success"] = code_success_exact(instance, code, d0)
    return result


# ---------------------------------------------------------------------------
# Spherical-cap covering geometry


@dataclass(frozen=True)
class CapRatio:
    """Normalised surface measure of a spherical cap, exact and asymptotic."""

    exact: float
    asymptotic: float


def spherical_cap_ratio(n: int, theta: float) -> CapRatio:
    """Fraction of the unit (n-1)-sphere within angle ``theta`` of a point.

    Exact value via the regularised incomplete beta function; the companion
    asymptotic is sin^(n-1)(theta) / (sqrt(2 pi n) cos(theta)), which
    diverges at the equator where the exact value is one half.
    """
    if n < 2:
        raise ValueError(f"need dimension n >= 2, got {n}")
    if not 0.0 < theta <= math.pi / 2:
        raise ValueError(f"theta must be in (0, pi/2], got {theta}")
    s2 = math.sin(theta) ** 2
    exact = 0.5 * float(special.betainc((n - 1) / 2.0, 0.5, s2))
    cos = math.cos(theta)
    if cos <= 0.0:
        asymptotic = math.inf
    else:
        asymptotic = math.sin(theta) ** (n - 1) / (math.sqrt(2.0 * math.pi * n) * cos)
    return CapRatio(exact=exact, asymptotic=asymptotic)


def log2_spherical_cap_ratio(n: int, theta: float) -> float:
    """log2 of the exact cap ratio, stable far below float underflow."""
    ratio = spherical_cap_ratio(n, theta).exact
    if ratio > 1e-280:
        return math.log2(ratio)
    import mpmath

    with mpmath.workdps(60):
        val = mpmath.betainc(
            (n - 1) / 2.0, 0.5, 0, math.sin(theta) ** 2, regularized=True
        ) / 2
        return float(mpmath.log(val, 2))


def _log_cap_measure(n: int, cos_threshold: float) -> float:
    """Natural log of P[<u, c> >= cos_threshold * |u||c|] for a uniform
    sphere direction c; handles thresholds past the equator."""
    if cos_threshold <= -1.0:
        return 0.0
    if cos_threshold >= 1.0:
        return -math.inf
    if cos_threshold >= 0.0:
        theta = math.acos(cos_threshold)
        return log2_spherical_cap_ratio(n, max(theta, 1e-12)) * math.log(2.0)
    upper = spherical_cap_ratio(n, math.acos(-cos_threshold)).exact
    return math.log1p(-upper)


def _success_log_terms(ln_p: float, quant_bits: int) -> float:
    """P[at least one of 2**quant_bits iid coverage events fires]."""
    if ln_p == 0.0:
        return 1.0
    if ln_p == -math.inf:
        return 0.0
    ln_count_p = quant_bits * math.log(2.0) + ln_p
    if ln_count_p > 3.0:  # count * p > 20: failure probability < 2e-9
        return 1.0
    if ln_count_p < -60.0:
        return math.exp(ln_count_p)
    p = math.exp(ln_p)
    if quant_bits <= 60:
        return -math.expm1((1 << quant_bits) * math.log1p(-p))
    # Astronomical count with moderate count*p forces p to be tiny, so the
    # Poisson limit is exact to within p.
    return -math.expm1(-math.exp(ln_count_p))


def _binary_cover_log_prob(weight: int, n: int, radius: int, q_rec: float) -> float:
    """Natural log probability that one iid Bernoulli(q_rec) codeword offset
    lands within ``radius`` flips of a reference offset of the given weight.

    scipy's binom.logcdf underflows to -inf deep in the lower tail, so the
    tail sums are accumulated in log space by hand; only terms with total
    distance at most ``radius`` matter.
    """
    if radius >= n:
        return 0.0
    j = np.arange(min(weight, radius) + 1)
    m = np.arange(radius + 1)
    with np.errstate(divide="ignore"):
        log_ones = stats.binom.logpmf(j, weight, 1.0 - q_rec)
        log_zeros = stats.binom.logpmf(m, n - weight, q_rec)
    log_zeros_tail = np.logaddexp.accumulate(log_zeros)
    terms = log_ones + log_zeros_tail[radius - j]
    finite = terms[np.isfinite(terms)]
    if finite.size == 0:
        return -math.inf
    return float(special.logsumexp(finite))


def _reconstruction_marginal(q: float, d: float) -> float:
    """Optimal test-channel reproduction marginal for a Bernoulli(q) source
    (q <= 1/2) at distortion d; collapses to the constant block beyond it."""
    if d >= min(q, 0.5):
        return 0.0
    return (q - d) / (1.0 - 2.0 * d)


def _quant_bits(n: int, rate: float) -> int:
    return max(0, math.floor(n * rate + 1e-9))


def _resolve_budget(
    n: int,
    key_bits: int,
    required: float,
    list_rate: float | None,
    margin: float | None,
) -> tuple[int, float]:
    """Quantiser bit budget and the recorded list rate.

    Either an explicit total list rate (the keyed share is deducted) or a
    margin above the information-theoretic requirement.  Margins must be
    strictly positive — a non-positive margin funds no codebook at all and
    silently measures the wrong thing.
    """
    if (list_rate is None) == (margin is None):
        raise ValueError("provide exactly one of list_rate / margin")
    if list_rate is not None:
        if list_rate < 0:
            raise ValueError(f"list rate must be nonnegative, got {list_rate}")
        total_bits = math.floor(n * list_rate + 1e-9)
        return max(0, total_bits - key_bits), float(list_rate)
    if margin <= 0:
        raise ValueError(f"margin must be strictly positive, got {margin}")
    bits = _quant_bits(n, required + margin)
    return bits, (key_bits + bits) / n


def keysearch_attack(
    source: SourceModel,
    channel: BroadcastChannel,
    params: SchemeParams,
    d0: float,
    trials: int,
    rng: KeyedRng,
    list_rate: float | None = None,
    margin: float | None = None,
) -> AttackResult:
    """List attack that spends key-rate bits enumerating every key and the
    rest on a random quantisation codebook around the keyed estimate.

    Each trial runs the honest pipeline (fresh key draw, scrambling, channel
    noise), conditions on the realised residual between the true block and
    the best keyed estimate, computes the *exact* probability that a fresh
    random codebook of the budgeted size covers it, and samples the success
    indicator from that probability.  This keeps the estimator unbiased for
    the random-coding ensemble without materialising astronomically large
    codebooks.
    """
    if d0 < 0:
        raise ValueError(f"distortion budget must be nonnegative, got {d0}")
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    n = params.n
    key_bits = params.key_bits
    gen = rng.generator()
    coin = rng.derive(1).generator()

    if source.kind == "bernoulli" and channel.kind == "bsc":
        if abs(source.q - 0.5) > 1e-12:
            raise ValueError("binary keysearch assumes an unbiased source")
        flip = binary_convolve(params.crossover, channel.crossovers[0])
        required = max(0.0, binary_entropy(flip) - binary_entropy(min(d0, 1.0)))
        quant_bits, recorded_rate = _resolve_budget(
            n, key_bits, required, list_rate, margin
        )
        q_rec = _reconstruction_marginal(flip, min(d0, 0.5))
        radius = math.floor(n * d0 + 1e-9)
        probs = np.empty(trials)
        cover_cache: dict[int, float] = {}
        for t in range(trials):
            s = (gen.random(n) < source.q).astype(np.int8)
            perm = gen.permutation(n)
            x = np.bitwise_xor(s[perm], (gen.random(n) < params.crossover).astype(np.int8))
            z = np.bitwise_xor(x, (gen.random(n) < channel.crossovers[0]).astype(np.int8))
            weight = int(np.bitwise_xor(z[np.argsort(perm)], s).sum())
            if weight not in cover_cache:
                cover_cache[weight] = _binary_cover_log_prob(weight, n, radius, q_rec)
            probs[t] = _success_log_terms(cover_cache[weight], quant_bits)
        bits = coin.random(trials) < probs
        return AttackResult.from_bits(
            "keysearch", recorded_rate, d0, n, bits,
            quant_bits=quant_bits, key_bits=key_bits, required_rate=required,
        )

    if source.kind == "gaussian" and channel.kind == "awgn":
        lam = source.variance
        n0 = channel.noise[0]
        spent = params.power
        residual_var = lam * n0 / (spent + n0) if spent + n0 > 0 else lam
        required = _half_log2_ratio_plus(residual_var, d0)
        if math.isinf(required):
            raise ValueError("zero-distortion targets cannot be funded by any list")
        quant_bits, recorded_rate = _resolve_budget(
            n, key_bits, required, list_rate, margin
        )
        codeword_sq = n * max(residual_var - d0, 0.0)
        probs = np.empty(trials)
        for t in range(trials):
            s = gen.normal(0.0, math.sqrt(lam), n)
            q_mat = sample_orthogonal(gen, 1, n)[0]
            x = params.alpha * (q_mat @ s)
            z = x + gen.normal(0.0, math.sqrt(n0), n) if n0 > 0 else x
            centre = params.betas[0] * (q_mat.T @ z)
            resid = s - centre
            r2 = float(resid @ resid)
            probs[t] = _success_log_terms(
                _sphere_cover_log_prob(n, r2, codeword_sq, n * d0), quant_bits
            )
        bits = coin.random(trials) < probs
        return AttackResult.from_bits(
            "keysearch", recorded_rate, d0, n, bits,
            quant_bits=quant_bits, key_bits=key_bits, required_rate=required,
        )

    raise ValueError("keysearch supports binary/bsc and gaussian/awgn settings")


def _sphere_cover_log_prob(n: int, r2: float, codeword_sq: float, budget_sq: float) -> float:
    """Natural log probability that one uniform codeword on the sphere of
    squared radius ``codeword_sq`` lands within squared distance
    ``budget_sq`` of a reference point with squared norm ``r2``."""
    if codeword_sq == 0.0:
        return 0.0 if r2 <= budget_sq else -math.inf
    if r2 == 0.0:
        return 0.0 if codeword_sq <= budget_sq else -math.inf
    cos_threshold = (r2 + codeword_sq - budget_sq) / (
        2.0 * math.sqrt(r2) * math.sqrt(codeword_sq)
    )
    return _log_cap_measure(n, cos_threshold)


def ignorez_attack(
    source: SourceModel,
    n: int,
    d0: float,
    trials: int,
    rng: KeyedRng,
    list_rate: float | None = None,
    margin: float | None = None,
) -> AttackResult:
    """Observation-blind list attack: pure random source quantisation.

    Succeeds at list rates above the source's rate-distortion function no
    matter what the scheme does, which makes it the universal baseline the
    keyless cap component answers to.  Evaluation is exact-per-trial exactly
    as in :func:`keysearch_attack`.
    """
    if d0 < 0:
        raise ValueError(f"distortion budget must be nonnegative, got {d0}")
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    gen = rng.generator()
    coin = rng.derive(1).generator()

    if source.kind == "bernoulli":
        if source.q > 0.5:
            raise ValueError("use the complement source with q <= 1/2")
        required = max(
            0.0, binary_entropy(source.q) - binary_entropy(min(d0, 1.0))
        )
        quant_bits, recorded_rate = _resolve_budget(n, 0, required, list_rate, margin)
        q_rec = _reconstruction_marginal(source.q, min(d0, 0.5))
        radius = math.floor(n * d0 + 1e-9)
        probs = np.empty(trials)
        cover_cache: dict[int, float] = {}
        for t in range(trials):
            weight = int((gen.random(n) < source.q).sum())
            if weight not in cover_cache:
                cover_cache[weight] = _binary_cover_log_prob(weight, n, radius, q_rec)
            probs[t] = _success_log_terms(cover_cache[weight], quant_bits)
        bits = coin.random(trials) < probs
        return AttackResult.from_bits(
            "ignorez", recorded_rate, d0, n, bits,
            quant_bits=quant_bits, required_rate=required,
        )

    if source.kind == "gaussian":
        lam = source.variance
        required = _half_log2_ratio_plus(lam, d0)
        if math.isinf(required):
            raise ValueError("zero-distortion targets cannot be funded by any list")
        quant_bits, recorded_rate = _resolve_budget(n, 0, required, list_rate, margin)
        codeword_sq = n * max(lam - d0, 0.0)
        r2 = gen.chisquare(n, size=trials) * lam
        probs = np.array(
            [
                _success_log_terms(
                    _sphere_cover_log_prob(n, float(v), codeword_sq, n * d0), quant_bits
                )
                for v in r2
            ]
        )
        bits = coin.random(trials) < probs
        return AttackResult.from_bits(
            "ignorez", recorded_rate, d0, n, bits,
            quant_bits=quant_bits, required_rate=required,
        )

    raise ValueError("ignorez supports bernoulli and gaussian sources")


@dataclass(frozen=True)
class CoveringEstimate:
    """log2 covering-count exponents (per letter) behind the Gaussian caps."""

    keyed_exponent: float
    keyless_exponent: float


def covering_count_estimate(
    lam: float, spent_power: float, n0: float, d0: float, key_rate: float
) -> CoveringEstimate:
    """Ball-counting exponents for covering the keyed estimate's sphere.

    The keyed exponent counts key copies times balls per residual sphere;
    the keyless exponent counts balls on the source sphere.  Both coincide
    with the corresponding achievable cap components; a zero-distortion
    budget returns inf for both.
    """
    if lam <= 0:
        raise ValueError(f"source variance must be positive, got {lam}")
    if d0 < 0:
        raise ValueError(f"distortion must be nonnegative, got {d0}")
    if d0 == 0.0:
        return CoveringEstimate(keyed_exponent=math.inf, keyless_exponent=math.inf)
    keyed = key_rate + _half_log2_ratio_plus(lam * n0, d0 * (spent_power + n0))
    keyless = _half_log2_ratio_plus(lam, d0)
    return CoveringEstimate(keyed_exponent=keyed, keyless_exponent=keyless)
