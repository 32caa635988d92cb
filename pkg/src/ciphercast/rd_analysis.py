"""Rate-distortion computations: closed forms, iterative solvers, tilted
information, and typicality predicates.

All rates are in bits.  The iterative solver follows the classic alternating
minimisation in its parametric form: an inner fixed-slope iteration plus an
outer bisection on the slope to hit a target distortion, with a tangent
correction so the reported rate matches the target to well below the solver
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "DiscreteDistribution",
    "RdCurvePoint",
    "ConditionalRdPoint",
    "DistortionInfeasible",
    "ConvergenceError",
    "binary_entropy",
    "binary_entropy_inverse",
    "binary_convolve",
    "log2_plus",
    "hamming_matrix",
    "blahut_arimoto_rd",
    "conditional_rd",
    "gaussian_rd",
    "gaussian_conditional_rd",
    "dtilted_information",
    "conditional_dtilted",
    "ConditionalDtilted",
    "strong_typical",
    "weak_typical",
    "unified_typical",
    "gaussian_weak_typical",
    "gaussian_joint_typical",
    "CountableDistribution",
    "TailFunctionalReport",
    "tail_functionals",
    "admissibility_report",
    "rd_curve_csv",
]

_LN2 = math.log(2.0)


class DistortionInfeasible(ValueError):
    """Target distortion below the minimum achievable for the source."""

    def __init__(self, target: float, d_min: float):
        self.target = target
        self.d_min = d_min
        super().__init__(
            f"target distortion {target} is below the achievable minimum {d_min}"
        )


class ConvergenceError(RuntimeError):
    """Iterative solver failed to converge within its iteration budget."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over a finite alphabet, validated on construction."""

    probs: tuple[float, ...]
    symbols: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a nonempty vector")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1 within 1e-12")
        if self.symbols and len(self.symbols) != p.size:
            raise ValueError("symbols and probs length mismatch")

    @classmethod
    def from_probs(cls, probs, symbols=()) -> "DiscreteDistribution":
        return cls(tuple(float(x) for x in probs), tuple(symbols))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def entropy_bits(self) -> float:
        p = self.vector
        nz = p[p > 0]
        return float(-(nz * np.log2(nz)).sum())


@dataclass(frozen=True)
class RdCurvePoint:
    """One point of a rate-distortion curve: distortion, rate (bits), and the
    local tangent slope ``dR/dD`` in bits per unit distortion (non-positive,
    since the curve decreases)."""

    distortion: float
    rate_bits: float
    slope: float


@dataclass(frozen=True)
class ConditionalRdPoint:
    """Conditional curve point plus the per-observation allocation that
    achieves it (distortions ``b_star`` and rates ``rates_z``, both indexed
    like the observation alphabet)."""

    distortion: float
    rate_bits: float
    slope: float
    b_star: tuple[float, ...]
    rates_z: tuple[float, ...]


# ---------------------------------------------------------------------------
# Closed forms


def binary_entropy(p: float) -> float:
    """H(p) in bits; 0 at the endpoints."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def binary_entropy_inverse(h: float) -> float:
    """Inverse of ``binary_entropy`` on [0, 1/2], by bisection."""
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"entropy out of range: {h}")
    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binary_convolve(a: float, b: float) -> float:
    """Crossover of two cascaded binary symmetric maps: a*b = a(1-b) + (1-a)b."""
    if not 0.0 <= a <= 1.0 or not 0.0 <= b <= 1.0:
        raise ValueError(f"probabilities out of range: {a}, {b}")
    return a * (1.0 - b) + (1.0 - a) * b


def log2_plus(x: float) -> float:
    """max(0, log2 x), with log2_plus(0) = 0 and log2_plus(inf) = inf."""
    if x < 0:
        raise ValueError(f"log2_plus needs a nonnegative argument, got {x}")
    if x <= 1.0:
        return 0.0
    return math.log2(x)


def gaussian_rd(variance: float, d: float) -> float:
    """Quadratic rate-distortion function of an N(0, variance) source."""
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if d < 0:
        raise ValueError(f"distortion must be nonnegative, got {d}")
    if d == 0.0:
        return math.inf
    return 0.5 * log2_plus(variance / d)


def gaussian_conditional_rd(variance: float, spent_power: float, noise: float, d: float) -> float:
    """Rate-distortion function of the source given the eavesdropper's view
    of its scaled transmission through additive noise of variance ``noise``.

    The conditional law is Gaussian with the MMSE residual variance
    ``variance * noise / (spent_power + noise)``, so this is just the
    quadratic formula at that variance.
    """
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if spent_power < 0 or noise < 0:
        raise ValueError("power and noise must be nonnegative")
    if spent_power + noise == 0.0:
        residual = variance
    else:
        residual = variance * noise / (spent_power + noise)
    if d == 0.0:
        return math.inf if residual > 0 else 0.0
    return 0.5 * log2_plus(residual / d)


def hamming_matrix(size: int) -> np.ndarray:
    """Distortion matrix d(s, t) = 1[s != t] over a ``size``-letter alphabet."""
    return 1.0 - np.eye(size)


# ---------------------------------------------------------------------------
# Iterative solver


def _fixed_slope_step(
    p: np.ndarray,
    dmat: np.ndarray,
    beta: float,
    q0: np.ndarray,
    inner_tol: float,
    max_iters: int,
):
    """Alternating minimisation at fixed slope parameter ``beta`` (nats per
    unit distortion).  Returns (rate_bits, distortion, q, kernel)."""
    shifted = dmat - dmat.min(axis=1, keepdims=True)
    a = np.exp(-beta * shifted)
    q = q0.copy()
    prev_rate = math.inf
    rate = math.inf
    w = None
    for _ in range(max_iters):
        w = a * q[None, :]
        row_sums = w.sum(axis=1, keepdims=True)
        w /= row_sums
        q_new = p @ w
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(w > 0, w / q_new[None, :], 1.0)
            rate = float((p[:, None] * w * np.log2(np.where(w > 0, ratio, 1.0))).sum())
        q = q_new
        if abs(rate - prev_rate) < inner_tol:
            break
        prev_rate = rate
    else:
        raise ConvergenceError(
            f"fixed-slope iteration did not converge in {max_iters} steps (beta={beta})"
        )
    dist = float((p[:, None] * w * dmat).sum())
    return max(0.0, rate), dist, q, w


def _distortion_extremes(p: np.ndarray, dmat: np.ndarray) -> tuple[float, float]:
    d_min = float((p * dmat.min(axis=1)).sum())
    d_max = float((p @ dmat).min())
    return d_min, d_max


def blahut_arimoto_rd(
    source: DiscreteDistribution,
    dmat,
    d: float,
    *,
    tol_bits: float = 1e-4,
    inner_tol: float = 1e-9,
    max_iters: int = 10**4,
) -> RdCurvePoint:
    """Rate-distortion point of a finite source at target distortion ``d``.

    Accuracy target is 1e-4 bits against closed forms.  Raises
    :class:`DistortionInfeasible` (carrying the achievable minimum) when
    ``d`` lies below every test channel's reach, and returns a zero-rate
    point once ``d`` covers the best constant reconstruction.
    """
    p = source.vector
    dmat = np.asarray(dmat, dtype=float)
    if dmat.shape[0] != p.size:
        raise ValueError("distortion matrix rows must match the source alphabet")
    d_min, d_max = _distortion_extremes(p, dmat)
    if d < d_min - 1e-15:
        raise DistortionInfeasible(d, d_min)
    if d >= d_max:
        return RdCurvePoint(distortion=d, rate_bits=0.0, slope=0.0)

    q = np.full(dmat.shape[1], 1.0 / dmat.shape[1])

    def solve(beta: float):
        nonlocal q
        rate, dist, q, _ = _fixed_slope_step(p, dmat, beta, q, inner_tol, max_iters)
        return rate, dist

    lo, hi = 0.0, 1.0
    rate_hi, dist_hi = solve(hi)
    grow = 0
    while dist_hi > d and grow < 200:
        hi *= 2.0
        rate_hi, dist_hi = solve(hi)
        grow += 1
    if dist_hi > d:
        raise ConvergenceError(f"could not bracket slope for target distortion {d}")

    rate, dist, beta = rate_hi, dist_hi, hi
    for _ in range(100):
        if abs(dist - d) <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        rate, dist = solve(mid)
        beta = mid
        if dist > d:
            lo = mid
        else:
            hi = mid

    slope_bits = beta / _LN2
    corrected = max(0.0, rate - slope_bits * (d - dist))
    return RdCurvePoint(distortion=d, rate_bits=corrected, slope=-slope_bits)


def conditional_rd(
    joint,
    dmat,
    d: float,
    *,
    tol_bits: float = 1e-4,
    inner_tol: float = 1e-9,
    max_iters: int = 10**4,
) -> ConditionalRdPoint:
    """Rate-distortion function of a source given a correlated observation.

    ``joint[s, z]`` is the joint pmf.  The optimal scheme splits the
    distortion budget across observations by running every conditional
    source at a common slope; the outer bisection tunes that slope until the
    average distortion meets ``d``.
    """
    joint = np.asarray(joint, dtype=float)
    dmat = np.asarray(dmat, dtype=float)
    if joint.ndim != 2 or joint.shape[0] != dmat.shape[0]:
        raise ValueError("joint must be (source x observation) matching the distortion rows")
    total = float(joint.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"joint pmf sums to {total}, not 1")
    p_z = joint.sum(axis=0)
    active = np.flatnonzero(p_z > 0)
    conditionals = [joint[:, z] / p_z[z] for z in active]

    d_min = sum(
        p_z[z] * float((cond * dmat.min(axis=1)).sum())
        for z, cond in zip(active, conditionals)
    )
    d_max = sum(
        p_z[z] * float((cond @ dmat).min()) for z, cond in zip(active, conditionals)
    )
    if d < d_min - 1e-15:
        raise DistortionInfeasible(d, d_min)

    b_star = np.zeros(p_z.size)
    rates_z = np.zeros(p_z.size)
    if d >= d_max:
        for z, cond in zip(active, conditionals):
            b_star[z] = float((cond @ dmat).min())
        return ConditionalRdPoint(
            distortion=d,
            rate_bits=0.0,
            slope=0.0,
            b_star=tuple(b_star),
            rates_z=tuple(rates_z),
        )

    def solve(beta: float):
        rates = np.zeros(len(active))
        dists = np.zeros(len(active))
        for i, cond in enumerate(conditionals):
            # Cold start every evaluation: a warm start poisons the bisection
            # once some beta lands in the zero-rate regime, because the
            # multiplicative update cannot leave a degenerate reproduction pmf.
            q0 = np.full(dmat.shape[1], 1.0 / dmat.shape[1])
            r, dd, _, _ = _fixed_slope_step(cond, dmat, beta, q0, inner_tol, max_iters)
            rates[i] = r
            dists[i] = dd
        weights = p_z[active]
        return float(weights @ rates), float(weights @ dists), rates, dists

    lo, hi = 0.0, 1.0
    rate_hi, dist_hi, rates_hi, dists_hi = solve(hi)
    grow = 0
    while dist_hi > d and grow < 200:
        hi *= 2.0
        rate_hi, dist_hi, rates_hi, dists_hi = solve(hi)
        grow += 1
    if dist_hi > d:
        raise ConvergenceError(f"could not bracket slope for target distortion {d}")

    rate, dist, rates, dists, beta = rate_hi, dist_hi, rates_hi, dists_hi, hi
    for _ in range(100):
        if abs(dist - d) <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        rate, dist, rates, dists = solve(mid)
        beta = mid
        if dist > d:
            lo = mid
        else:
            hi = mid

    slope_bits = beta / _LN2
    corrected = max(0.0, rate - slope_bits * (d - dist))
    # Spread the residual budget evenly so the allocation averages to d.
    b_star[active] = dists + (d - dist)
    rates_z[active] = rates
    return ConditionalRdPoint(
        distortion=d,
        rate_bits=corrected,
        slope=-slope_bits,
        b_star=tuple(b_star),
        rates_z=tuple(rates_z),
    )


# ---------------------------------------------------------------------------
# Tilted information


def _tilted_values(p_cond: np.ndarray, dmat: np.ndarray, q: np.ndarray, beta: float, level: float) -> np.ndarray:
    """Per-symbol tilted information (bits) at distortion ``level`` given the
    reproduction marginal ``q`` and slope ``beta`` (nats)."""
    with np.errstate(divide="ignore"):
        log_q = np.where(q > 0, np.log(np.maximum(q, 1e-300)), -math.inf)
    exponents = log_q[None, :] + beta * (level - dmat)
    return -logsumexp(exponents, axis=1) / _LN2


def dtilted_information(
    source: DiscreteDistribution, dmat, d: float, **solver_kwargs
) -> np.ndarray:
    """Per-symbol distortion-tilted information at target ``d`` (bits).

    Averages back to the rate-distortion function; a zero-rate target gives
    identically zero values.  Infeasible targets raise
    :class:`DistortionInfeasible`.
    """
    p = source.vector
    dmat = np.asarray(dmat, dtype=float)
    d_min, d_max = _distortion_extremes(p, dmat)
    if d < d_min - 1e-15:
        raise DistortionInfeasible(d, d_min)
    if d >= d_max:
        return np.zeros(p.size)
    point = blahut_arimoto_rd(source, dmat, d, **solver_kwargs)
    beta = -point.slope * _LN2
    q = np.full(dmat.shape[1], 1.0 / dmat.shape[1])
    _, _, q, _ = _fixed_slope_step(p, dmat, beta, q, 1e-12, 10**5)
    return _tilted_values(p, dmat, q, beta, d)


@dataclass(frozen=True)
class ConditionalDtilted:
    """Conditional tilted information table plus the allocation behind it.

    ``table[s, z]`` is the tilted information of source letter ``s`` at the
    per-observation distortion level ``b_star[z]``; averaging the table over
    the joint law recovers the conditional rate-distortion function.
    """

    table: np.ndarray
    b_star: tuple[float, ...]
    rate_bits: float
    slope: float


def conditional_dtilted(joint, dmat, d: float, **solver_kwargs) -> ConditionalDtilted:
    joint = np.asarray(joint, dtype=float)
    dmat = np.asarray(dmat, dtype=float)
    point = conditional_rd(joint, dmat, d, **solver_kwargs)
    beta = -point.slope * _LN2
    p_z = joint.sum(axis=0)
    table = np.zeros_like(joint)
    for z in np.flatnonzero(p_z > 0):
        cond = joint[:, z] / p_z[z]
        if beta == 0.0:
            continue
        q = np.full(dmat.shape[1], 1.0 / dmat.shape[1])
        _, _, q, _ = _fixed_slope_step(cond, dmat, beta, q, 1e-12, 10**5)
        table[:, z] = _tilted_values(cond, dmat, q, beta, point.b_star[z])
    return ConditionalDtilted(
        table=table, b_star=point.b_star, rate_bits=point.rate_bits, slope=point.slope
    )


# ---------------------------------------------------------------------------
# Typicality predicates


def strong_typical(block, dist: DiscreteDistribution, delta: float) -> bool:
    """Total-variation-style typicality: sum of |empirical - true| over the
    alphabet (plus any stray symbols) at most ``delta``."""
    arr = np.asarray(block)
    n = arr.shape[0]
    if n == 0:
        raise ValueError("empty block")
    symbols = dist.symbols if dist.symbols else tuple(range(len(dist.probs)))
    lookup = {s: p for s, p in zip(symbols, dist.probs)}
    values, counts = np.unique(arr, return_counts=True)
    gap = 0.0
    seen = set()
    for v, c in zip(values, counts):
        key = v.item()
        seen.add(key)
        gap += abs(c / n - lookup.get(key, 0.0))
    for s, p in lookup.items():
        if s not in seen:
            gap += p
    return gap <= delta


def weak_typical(block, dist: DiscreteDistribution, delta: float) -> bool:
    """Entropy-typicality: empirical negative log-likelihood rate within
    ``delta`` bits of the source entropy.  Zero-probability symbols make the
    block atypical outright."""
    arr = np.asarray(block)
    n = arr.shape[0]
    if n == 0:
        raise ValueError("empty block")
    symbols = dist.symbols if dist.symbols else tuple(range(len(dist.probs)))
    lookup = {s: p for s, p in zip(symbols, dist.probs)}
    total = 0.0
    for v in arr:
        p = lookup.get(v.item(), 0.0)
        if p <= 0.0:
            return False
        total -= math.log2(p)
    return abs(total / n - dist.entropy_bits()) <= delta


def unified_typical(block, dist: DiscreteDistribution, delta: float) -> bool:
    """Intersection of the strong set at ``delta / log2(n)`` and the weak set
    at ``delta``; needs block length at least 2."""
    arr = np.asarray(block)
    n = arr.shape[0]
    if n < 2:
        raise ValueError("unified typicality needs block length >= 2")
    return strong_typical(arr, dist, delta / math.log2(n)) and weak_typical(arr, dist, delta)


def gaussian_weak_typical(x, variance: float, delta: float) -> bool:
    """Energy-typicality: ||x||^2 within a (1 ± delta) band of n * variance."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    return abs(float(x @ x) / (n * variance) - 1.0) <= delta


def gaussian_joint_typical(
    x, z, variance_x: float, noise_variance: float, delta: float
) -> bool:
    """Joint energy-typicality of an input block and its noisy observation.

    Checks the marginal bands for ``x`` and ``z`` and the cross condition
    that input energy plus residual energy match their variances jointly.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {z.shape}")
    if noise_variance <= 0:
        raise ValueError(f"noise variance must be positive, got {noise_variance}")
    n = x.shape[-1]
    u = z - x
    ex = float(x @ x) / (n * variance_x)
    ez = float(z @ z) / (n * (variance_x + noise_variance))
    eu = float(u @ u) / (n * noise_variance)
    return (
        abs(ex - 1.0) <= delta
        and abs(ez - 1.0) <= delta
        and abs(ex + eu - 2.0) <= delta
    )


# ---------------------------------------------------------------------------
# Tail functionals for countable alphabets


@dataclass(frozen=True)
class CountableDistribution:
    """Countable-alphabet pmf in nonincreasing rank order.

    ``pmf(i)`` is the probability of the rank-``i`` symbol; ``tail_mass(k)``
    is a certified upper bound on the total mass of ranks ``>= k`` (exact for
    the built-in families).  The enumeration cap keeps functional evaluation
    from spinning on pathologically flat inputs.
    """

    pmf: Callable[[int], float]
    tail_mass: Callable[[int], float]
    support: int | None = None
    max_enumeration: int = 10**6

    @classmethod
    def finite(cls, probs) -> "CountableDistribution":
        ordered = tuple(sorted((float(p) for p in probs), reverse=True))
        if any(p < 0 for p in ordered):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(ordered) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        suffix = np.concatenate([np.cumsum(ordered[::-1])[::-1], [0.0]])

        def pmf(i: int) -> float:
            return ordered[i] if i < len(ordered) else 0.0

        def tail(k: int) -> float:
            return float(suffix[min(k, len(ordered))])

        return cls(pmf=pmf, tail_mass=tail, support=len(ordered))

    @classmethod
    def geometric(cls, ratio: float) -> "CountableDistribution":
        if not 0.0 < ratio < 1.0:
            raise ValueError(f"ratio must be in (0, 1), got {ratio}")
        return cls(
            pmf=lambda i: (1.0 - ratio) * ratio**i,
            tail_mass=lambda k: ratio**k,
        )

    @classmethod
    def power_law(cls, exponent: float) -> "CountableDistribution":
        """pmf proportional to (rank + 1) ** -exponent, exponent > 1."""
        if exponent <= 1.0:
            raise ValueError(f"exponent must exceed 1, got {exponent}")
        from scipy.special import zeta

        norm = float(zeta(exponent, 1))

        def tail(k: int) -> float:
            if k <= 0:
                return 1.0
            # integral bound on the zeta tail
            return (k ** (1.0 - exponent) / (exponent - 1.0)) / norm

        return cls(pmf=lambda i: (i + 1.0) ** (-exponent) / norm, tail_mass=tail)


@dataclass(frozen=True)
class TailFunctionalReport:
    alpha: float
    count_above: int
    mass_below: float
    beta: float
    min_count: int


def _count_above(dist: CountableDistribution, alpha: float) -> int:
    if alpha <= 0:
        raise ValueError(f"threshold must be positive, got {alpha}")
    i = 0
    cap = dist.support if dist.support is not None else dist.max_enumeration
    while i < cap and dist.pmf(i) >= alpha:
        i += 1
    if i >= dist.max_enumeration:
        raise RuntimeError(f"enumeration cap hit counting symbols above {alpha}")
    return i


def tail_functionals(dist: CountableDistribution, alpha: float, beta: float) -> TailFunctionalReport:
    """Head count, tail mass, and the smallest head covering all but ``beta``.

    ``count_above`` is the number of symbols with probability at least
    ``alpha``; ``mass_below`` the total probability of the rest; and
    ``min_count`` the fewest highest-probability symbols whose complement
    carries mass at most ``beta`` (using the certified tail bound, so exact
    for finite and geometric families, conservative otherwise).
    """
    count = _count_above(dist, alpha)
    mass_below = float(dist.tail_mass(count))
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    k = 0
    cap = dist.support if dist.support is not None else dist.max_enumeration
    while dist.tail_mass(k) > beta:
        k += 1
        if k > cap:
            raise RuntimeError(f"enumeration cap hit searching for tail mass {beta}")
    return TailFunctionalReport(
        alpha=alpha, count_above=count, mass_below=mass_below, beta=beta, min_count=k
    )


@dataclass(frozen=True)
class AdmissibilityReport:
    """Heuristic block-length sweep of the three tail-decay ratios.

    ``admissible`` means every ratio sequence decays over the sweep; this is
    a finite-grid heuristic (flagged as such), not a proof.
    """

    admissible: bool
    heuristic: bool
    ratios: dict


def admissibility_report(
    dist: CountableDistribution,
    deltas: Sequence[float] = (1.0, 0.1),
    exponents: Sequence[int] = tuple(range(4, 21, 2)),
) -> AdmissibilityReport:
    grid = [2**e for e in exponents]
    head = []
    mass = []
    covers = {delta: [] for delta in deltas}
    for n in grid:
        log_n = math.log2(n)
        count = _count_above(dist, 1.0 / n)
        head.append(count * log_n / n)
        mass.append(float(dist.tail_mass(count)) * log_n)
        for delta in deltas:
            try:
                rep = tail_functionals(dist, 1.0 / n, delta / log_n)
            except RuntimeError:
                # tail so heavy the cover count exceeds the enumeration cap;
                # that alone rules the distribution out here
                covers[delta].append(math.inf)
                continue
            covers[delta].append(rep.min_count * log_n**2 / n)

    def decays(seq) -> bool:
        if not all(math.isfinite(v) for v in seq):
            return False
        peak = max(seq)
        if peak == 0.0:
            return True
        return seq[-1] <= 0.5 * peak

    ratios = {"head": tuple(head), "mass": tuple(mass)}
    verdict = decays(head) and decays(mass)
    for delta, seq in covers.items():
        ratios[f"cover[{delta}]"] = tuple(seq)
        verdict = verdict and decays(seq)
    return AdmissibilityReport(admissible=verdict, heuristic=True, ratios=ratios)


def rd_curve_csv(points: Sequence[RdCurvePoint]) -> str:
    """Serialise curve points to CSV at full round-trip precision."""
    lines = ["distortion,rate_bits,slope"]
    for pt in points:
        lines.append(f"{pt.distortion!r},{pt.rate_bits!r},{pt.slope!r}")
    return "\n".join(lines) + "\n"
