"""Secrecy rate-region calculators for the keyed uncoded schemes.

Each evaluator judges a candidate operating point — key rate, list rate, and
per-output distortions — against either the achievable (inner) region of a
concrete scheme or the converse (outer) region of the setting, and reports
which constraints bind.  Optimality checkers test the matching conditions
under which the two caps provably coincide.  List-rate caps can be ``inf``
(zero-distortion demands); evaluators return the sentinel rather than raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .models import BroadcastChannel
from .rd_analysis import binary_convolve, binary_entropy, log2_plus

__all__ = [
    "RegionPoint",
    "RegionVerdict",
    "OptimalityReport",
    "SignChangeCap",
    "RegionCurve",
    "DegenerateScheme",
    "solve_crossover",
    "binary_inner",
    "binary_outer",
    "binary_optimality",
    "gaussian_inner",
    "gaussian_outer",
    "gaussian_optimality",
    "sign_change_upper",
    "water_level",
    "vector_gaussian_inner",
    "sweep_region",
    "fig2_surface",
    "fig5_curves",
    "binary_optimality_curve",
]

_TIGHT = 1e-9
_MEMBER_SLACK = 1e-12


class DegenerateScheme(ValueError):
    """Scheme parameters outside the regime where the bound is defined."""


@dataclass(frozen=True)
class RegionPoint:
    """Candidate operating point: key rate, list rate, and distortions
    (eavesdropper's target d0, receiver targets d1, d2)."""

    key_rate: float
    list_rate: float
    d0: float
    d1: float
    d2: float

    def __post_init__(self):
        for name in ("key_rate", "list_rate", "d0", "d1", "d2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class RegionVerdict:
    """Membership call for one region evaluation.

    Exactly one of ``inner_member`` / ``outer_member`` is set (the other is
    None) depending on which region was evaluated.  ``binding`` names the
    constraints that are tight (within 1e-9) for a member, or violated for a
    non-member.  ``cap`` is the list-rate ceiling at the point's distortions.
    """

    inner_member: bool | None
    outer_member: bool | None
    binding: tuple[str, ...]
    cap: float
    details: dict = field(default_factory=dict)

    @property
    def member(self) -> bool:
        return bool(self.inner_member if self.inner_member is not None else self.outer_member)


@dataclass(frozen=True)
class OptimalityReport:
    """Outcome of a matching-condition check at one operating point."""

    optimal: bool
    branch: int | None
    receiver: int | None
    inner_cap: float
    outer_cap: float
    caps_coincide: bool
    scheme_knob: float | None
    domain_ok: bool


def _verdict(constraints: Mapping[str, tuple[float, float, bool]], cap: float, inner: bool, details: dict) -> RegionVerdict:
    """constraints: name -> (value, bound, is_upper). Upper: value <= bound."""
    violated = []
    tight = []
    ok = True
    for name, (value, bound, is_upper) in constraints.items():
        slack = (bound - value) if is_upper else (value - bound)
        if slack < -_MEMBER_SLACK:
            ok = False
            violated.append(name)
        elif abs(slack) <= _TIGHT:
            tight.append(name)
    binding = tuple(violated if not ok else tight)
    return RegionVerdict(
        inner_member=ok if inner else None,
        outer_member=None if inner else ok,
        binding=binding,
        cap=cap,
        details=details,
    )


# ---------------------------------------------------------------------------
# Binary (doubly symmetric) setting


def solve_crossover(p: float, d: float) -> float | None:
    """Test-channel crossover t with t * p = d (cascade), or None if d < p.

    Values of d beyond 1/2 saturate at the maximum crossover 1/2.
    """
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"channel crossover must be in [0, 1/2], got {p}")
    if d < p:
        return None
    if p == 0.5:
        return 0.5
    return min(0.5, (d - p) / (1.0 - 2.0 * p))


def binary_inner(point: RegionPoint, crossover: float, channel: BroadcastChannel) -> RegionVerdict:
    """Achievable region of the keyed scrambling scheme with the given
    test-channel crossover on a binary symmetric broadcast channel.

    Receiver distortions are floored by the cascade of the test channel with
    each receiver's crossover; the list rate is capped by the smaller of the
    keyed term (key rate plus the eavesdropper's entropy surplus at its
    distortion target) and the keyless source-coding term.
    """
    if channel.kind != "bsc":
        raise ValueError("binary region needs a bsc channel")
    if not 0.0 <= crossover <= 0.5:
        raise ValueError(f"crossover must be in [0, 1/2], got {crossover}")
    p0, p1, p2 = channel.crossovers
    floor1 = binary_convolve(crossover, p1)
    floor2 = binary_convolve(crossover, p2)
    eaves = binary_convolve(crossover, p0)
    keyed = point.key_rate + max(
        0.0, binary_entropy(eaves) - binary_entropy(min(point.d0, 0.5))
    )
    keyless = max(0.0, 1.0 - binary_entropy(min(point.d0, 0.5)))
    cap = min(keyed, keyless)
    details = {
        "cap_keyed": keyed,
        "cap_keyless": keyless,
        "d1_floor": floor1,
        "d2_floor": floor2,
        "eaves_crossover": eaves,
    }
    constraints = {
        "d1": (point.d1, floor1, False),
        "d2": (point.d2, floor2, False),
        "list_rate": (point.list_rate, cap, True),
    }
    return _verdict(constraints, cap, inner=True, details=details)


def binary_outer(point: RegionPoint, channel: BroadcastChannel) -> RegionVerdict:
    """Converse region for binary symmetric broadcast: no scheme whatsoever
    beats these floors and caps."""
    if channel.kind != "bsc":
        raise ValueError("binary region needs a bsc channel")
    p0, p1, p2 = channel.crossovers
    h0 = binary_entropy(p0)

    def receiver_rate(p_i: float, d_i: float) -> float:
        return (
            point.key_rate
            + max(0.0, h0 - binary_entropy(p_i))
            + max(0.0, binary_entropy(min(d_i, 0.5)) - binary_entropy(min(point.d0, 0.5)))
        )

    r1 = receiver_rate(p1, point.d1)
    r2 = receiver_rate(p2, point.d2)
    keyless = max(0.0, 1.0 - binary_entropy(min(point.d0, 0.5)))
    cap = min(r1, r2, keyless)
    details = {"r1": r1, "r2": r2, "cap_keyless": keyless}
    constraints = {
        "d1": (point.d1, p1, False),
        "d2": (point.d2, p2, False),
        "list_rate": (point.list_rate, cap, True),
    }
    return _verdict(constraints, cap, inner=False, details=details)


def binary_optimality(point: RegionPoint, channel: BroadcastChannel) -> OptimalityReport:
    """Check the binary matching conditions at an operating point.

    Fires when, for some receiver i, either (a) the eavesdropper's channel is
    at least as clean and distortions are ordered p0 <= p_i <= d_i <= d0, or
    (b) the eavesdropper's channel is noisier and receiver i sits exactly at
    its floor with p0 >= p_i = d_i >= d0.  The verdict additionally requires
    the point to lie in the regions' natural domain (receiver distortions at
    or above their converse floors, all distortions at most 1/2); outside it
    the cap comparison is vacuous.  When it fires, the achievable cap with
    the matched test channel equals the converse cap.
    """
    if channel.kind != "bsc":
        raise ValueError("binary region needs a bsc channel")
    p0 = channel.crossovers[0]
    domain_ok = (
        point.d0 <= 0.5 + _TIGHT
        and point.d1 <= 0.5 + _TIGHT
        and point.d2 <= 0.5 + _TIGHT
        and point.d1 >= channel.crossovers[1] - _TIGHT
        and point.d2 >= channel.crossovers[2] - _TIGHT
    )
    branch = receiver = None
    for i, (p_i, d_i) in enumerate(
        [(channel.crossovers[1], point.d1), (channel.crossovers[2], point.d2)], start=1
    ):
        if p0 <= p_i <= d_i <= point.d0:
            branch, receiver = 1, i
            break
        if p0 >= p_i and abs(p_i - d_i) <= _TIGHT and d_i >= point.d0:
            branch, receiver = 2, i
            break

    crossover = None
    inner_cap = math.inf
    outer_cap = binary_outer(point, channel).cap
    if branch is not None:
        p_i = channel.crossovers[receiver]
        d_i = (point.d1, point.d2)[receiver - 1]
        crossover = solve_crossover(p_i, d_i)
        if crossover is None:
            crossover = 0.0
        inner_cap = binary_inner(point, crossover, channel).cap
    coincide = (
        branch is not None
        and (
            (math.isinf(inner_cap) and math.isinf(outer_cap))
            or abs(inner_cap - outer_cap) <= _TIGHT
        )
    )
    return OptimalityReport(
        optimal=branch is not None and domain_ok,
        branch=branch,
        receiver=receiver,
        inner_cap=inner_cap,
        outer_cap=outer_cap,
        caps_coincide=coincide,
        scheme_knob=crossover,
        domain_ok=domain_ok,
    )


# ---------------------------------------------------------------------------
# Scalar Gaussian setting


def _half_log2_ratio_plus(num: float, den: float) -> float:
    """(1/2) log2+ of a ratio with zero-safe conventions: a zero numerator
    kills the term, a zero denominator under a positive numerator is inf."""
    if num < 0 or den < 0:
        raise ValueError("ratio parts must be nonnegative")
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return math.inf
    return 0.5 * log2_plus(num / den)


def _mmse_floor(lam: float, power: float, noise: float) -> float:
    if power + noise == 0.0:
        return 0.0
    return lam * noise / (power + noise)


def gaussian_inner(
    point: RegionPoint, spent_power: float, lam: float, channel: BroadcastChannel
) -> RegionVerdict:
    """Achievable region of the keyed rotation scheme at spent power P'.

    Distortion floors are the per-receiver linear-estimation residuals; the
    list-rate cap is the smaller of key rate plus the eavesdropper's residual
    surplus and the keyless quadratic source-coding term.  A noiseless
    eavesdropper zeroes the keyed surplus; a zero-distortion demand drives
    the cap to inf.
    """
    if channel.kind != "awgn":
        raise ValueError("scalar gaussian region needs an awgn channel")
    if spent_power < 0 or spent_power > channel.power + 1e-9:
        raise ValueError(f"spent power must be in [0, {channel.power}], got {spent_power}")
    if lam <= 0:
        raise ValueError(f"source variance must be positive, got {lam}")
    n0, n1, n2 = channel.noise
    floor1 = _mmse_floor(lam, spent_power, n1)
    floor2 = _mmse_floor(lam, spent_power, n2)
    keyed = point.key_rate + _half_log2_ratio_plus(lam * n0, point.d0 * (spent_power + n0))
    keyless = _half_log2_ratio_plus(lam, point.d0)
    cap = min(keyed, keyless)
    details = {
        "cap_keyed": keyed,
        "cap_keyless": keyless,
        "d1_floor": floor1,
        "d2_floor": floor2,
        "eaves_floor": _mmse_floor(lam, spent_power, n0),
    }
    constraints = {
        "d1": (point.d1, floor1, False),
        "d2": (point.d2, floor2, False),
        "list_rate": (point.list_rate, cap, True),
    }
    return _verdict(constraints, cap, inner=True, details=details)


def gaussian_outer(point: RegionPoint, lam: float, channel: BroadcastChannel) -> RegionVerdict:
    """Converse region for the Gaussian broadcast setting at full power."""
    if channel.kind != "awgn":
        raise ValueError("scalar gaussian region needs an awgn channel")
    if lam <= 0:
        raise ValueError(f"source variance must be positive, got {lam}")
    n0, n1, n2 = channel.noise
    p = channel.power

    def receiver_rate(n_i: float, d_i: float) -> float:
        # (1 + P/N_i) / (1 + P/N_0), written zero-safe as N_0 (N_i + P) / (N_i (N_0 + P))
        ratio_num = n0 * (n_i + p)
        ratio_den = n_i * (n0 + p)
        channel_term = _half_log2_ratio_plus(ratio_num, ratio_den)
        distortion_term = _half_log2_ratio_plus(d_i, point.d0)
        return point.key_rate + channel_term + distortion_term

    r1 = receiver_rate(n1, point.d1)
    r2 = receiver_rate(n2, point.d2)
    keyless = _half_log2_ratio_plus(lam, point.d0)
    cap = min(r1, r2, keyless)
    floor1 = _mmse_floor(lam, p, n1)
    floor2 = _mmse_floor(lam, p, n2)
    details = {"r1": r1, "r2": r2, "cap_keyless": keyless}
    constraints = {
        "d1": (point.d1, floor1, False),
        "d2": (point.d2, floor2, False),
        "list_rate": (point.list_rate, cap, True),
    }
    return _verdict(constraints, cap, inner=False, details=details)


def gaussian_optimality(
    point: RegionPoint, lam: float, channel: BroadcastChannel
) -> OptimalityReport:
    """Check the Gaussian matching conditions (scheme spends full power).

    Fires when, for some receiver i, either (a) the eavesdropper's noise is
    no larger and d0 >= d_i, or (b) the eavesdropper's noise is no smaller
    and receiver i sits exactly at its full-power floor with d0 <= d_i.  The
    domain requirement is both receivers at or above their floors.
    """
    if channel.kind != "awgn":
        raise ValueError("scalar gaussian region needs an awgn channel")
    n0, n1, n2 = channel.noise
    p = channel.power
    floor1 = _mmse_floor(lam, p, n1)
    floor2 = _mmse_floor(lam, p, n2)
    domain_ok = point.d1 >= floor1 - _TIGHT and point.d2 >= floor2 - _TIGHT

    branch = receiver = None
    for i, (n_i, d_i, floor_i) in enumerate(
        [(n1, point.d1, floor1), (n2, point.d2, floor2)], start=1
    ):
        if n0 <= n_i and point.d0 >= d_i:
            branch, receiver = 1, i
            break
        if n0 >= n_i and abs(d_i - floor_i) <= _TIGHT and point.d0 <= d_i:
            branch, receiver = 2, i
            break

    inner_cap = math.inf
    outer_cap = gaussian_outer(point, lam, channel).cap
    if branch is not None:
        inner_cap = gaussian_inner(point, p, lam, channel).cap
    coincide = branch is not None and (
        (math.isinf(inner_cap) and math.isinf(outer_cap))
        or abs(inner_cap - outer_cap) <= _TIGHT
    )
    return OptimalityReport(
        optimal=branch is not None and domain_ok,
        branch=branch,
        receiver=receiver,
        inner_cap=inner_cap,
        outer_cap=outer_cap,
        caps_coincide=coincide,
        scheme_knob=p,
        domain_ok=domain_ok,
    )


# ---------------------------------------------------------------------------
# Single-letter sign-change scheme


@dataclass(frozen=True)
class SignChangeCap:
    """List-rate ceiling of the one-bit-key sign flip scheme.

    ``keyed_bound`` is the scheme-specific component (timesharing branch
    above the junction distortion, key-plus-noise branch below);
    ``keyless`` the source-coding term; ``cap`` their minimum.
    """

    cap: float
    keyed_bound: float
    keyless: float
    junction: float
    branch: str


def sign_change_upper(lam: float, spent_power: float, n0: float, d0: float) -> SignChangeCap:
    if lam <= 0:
        raise ValueError(f"source variance must be positive, got {lam}")
    if d0 < 0:
        raise ValueError(f"distortion must be nonnegative, got {d0}")
    if n0 < 0:
        raise ValueError(f"noise must be nonnegative, got {n0}")
    if spent_power <= 0:
        raise DegenerateScheme(
            "sign-change bound needs positive spent power (the sign carries no "
            "information otherwise)"
        )
    junction = lam * n0 / (spent_power + n0)
    if d0 == 0.0:
        keyed = math.inf if n0 > 0 else 1.0
        branch = "key_plus_noise" if n0 > 0 else "timeshare"
    elif d0 > junction:
        # timesharing between sending and staying silent
        keyed = max(0.0, (lam - d0) * (spent_power + n0) / (lam * spent_power))
        branch = "timeshare"
    else:
        keyed = 1.0 + 0.5 * math.log2(lam * n0 / (d0 * (spent_power + n0)))
        branch = "key_plus_noise"
    keyless = _half_log2_ratio_plus(lam, d0)
    return SignChangeCap(
        cap=min(keyed, keyless),
        keyed_bound=keyed,
        keyless=keyless,
        junction=junction,
        branch=branch,
    )


# ---------------------------------------------------------------------------
# Vector Gaussian setting


def water_level(caps: Sequence[float], target: float) -> float:
    """Level w with sum_j min(w, caps_j) = target, solved exactly.

    Bisection locates the active linear segment, then one closed-form step
    lands on it; a saturated budget (target >= sum of caps) returns the top
    cap.  Used for both the reverse water-filling levels.
    """
    caps_arr = np.asarray(caps, dtype=float)
    if caps_arr.size == 0:
        raise ValueError("need at least one cap")
    if np.any(caps_arr < 0):
        raise ValueError("caps must be nonnegative")
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    total = float(caps_arr.sum())
    if target >= total:
        return float(caps_arr.max())

    lo, hi = 0.0, float(caps_arr.max())
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if float(np.minimum(caps_arr, mid).sum()) < target:
            lo = mid
        else:
            hi = mid
    rough = 0.5 * (lo + hi)

    ordered = np.sort(caps_arr)
    prefix = np.concatenate([[0.0], np.cumsum(ordered)])
    m = ordered.size
    k = int(np.searchsorted(ordered, rough, side="right"))
    for cand in (k, max(0, k - 1), min(m - 1, k + 1)):
        remaining = m - cand
        if remaining <= 0:
            continue
        level = (target - prefix[cand]) / remaining
        below = ordered[cand - 1] if cand > 0 else 0.0
        above = ordered[cand] if cand < m else math.inf
        if below - 1e-12 <= level <= above + 1e-12:
            return float(level)
    return float(rough)


def vector_gaussian_inner(
    point: RegionPoint,
    spent_powers: Sequence[float],
    lams: Sequence[float],
    channel: BroadcastChannel,
) -> RegionVerdict:
    """Achievable region of per-bank keyed rotations on parallel channels.

    Both cap components are reverse water-filling sums: the keyless term
    levels across the bank variances, the keyed term across the
    eavesdropper's per-bank linear-estimation residuals.
    """
    if channel.kind != "vector_awgn":
        raise ValueError("vector gaussian region needs a vector_awgn channel")
    lams_arr = np.asarray(lams, dtype=float)
    powers = np.asarray(spent_powers, dtype=float)
    if lams_arr.size != powers.size or lams_arr.size != channel.banks:
        raise ValueError("bank count mismatch between variances, powers, and channel")
    if np.any(lams_arr <= 0):
        raise ValueError("bank variances must be positive")
    if np.any(powers < 0):
        raise ValueError("spent powers must be nonnegative")
    if float(powers.sum()) > channel.power + 1e-9:
        raise ValueError(f"spent power {powers.sum()} exceeds budget {channel.power}")
    if point.d0 <= 0:
        raise ValueError("zero eavesdropper distortion gives an unbounded cap; use d0 > 0")

    noise = np.asarray(channel.noise, dtype=float)
    floors = [
        float(
            sum(
                _mmse_floor(lam, pw, nv)
                for lam, pw, nv in zip(lams_arr, powers, noise[i])
            )
        )
        for i in range(3)
    ]

    mu = water_level(lams_arr, min(point.d0, float(lams_arr.sum())))
    r_source = float(sum(_half_log2_ratio_plus(lam, mu) for lam in lams_arr))
    residuals = np.array(
        [_mmse_floor(lam, pw, nv) for lam, pw, nv in zip(lams_arr, powers, noise[0])]
    )
    total_resid = float(residuals.sum())
    if total_resid > 0 and point.d0 < total_resid:
        theta = water_level(residuals[residuals > 0], point.d0)
    else:
        theta = float(residuals.max()) if residuals.size else 0.0
    r_conditional = float(
        sum(_half_log2_ratio_plus(res, theta) for res in residuals if res > 0)
    )
    keyed = point.key_rate + r_conditional
    cap = min(keyed, r_source)
    details = {
        "cap_keyed": keyed,
        "cap_keyless": r_source,
        "mu": mu,
        "theta": theta,
        "d1_floor": floors[1],
        "d2_floor": floors[2],
        "eaves_floor": floors[0],
    }
    constraints = {
        "d1": (point.d1, floors[1], False),
        "d2": (point.d2, floors[2], False),
        "list_rate": (point.list_rate, cap, True),
    }
    return _verdict(constraints, cap, inner=True, details=details)


# ---------------------------------------------------------------------------
# Sweeps and figure presets


@dataclass(frozen=True)
class RegionCurve:
    """Tabulated region sweep with a stable column order."""

    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(repr(v) for v in row))
        return "\n".join(lines) + "\n"


def sweep_region(
    evaluate: Callable[[Mapping[str, float]], Mapping[str, float]],
    grid: Iterable[Mapping[str, float]],
) -> RegionCurve:
    """Evaluate a region functional over a parameter grid.

    ``evaluate`` maps one grid point (a mapping of named parameters) to an
    ordered mapping of output columns; column order is taken from the first
    row.
    """
    rows = []
    columns: tuple[str, ...] | None = None
    for params in grid:
        out = evaluate(params)
        if columns is None:
            columns = tuple(out.keys())
        rows.append(tuple(float(out[c]) for c in columns))
    if columns is None:
        raise ValueError("empty grid")
    return RegionCurve(columns=columns, rows=tuple(rows))


def fig2_surface(
    lam: float = 1.0,
    spent_power: float = 1.0,
    n0: float = 1.0,
    key_rates: Sequence[float] | None = None,
    d0_grid: Sequence[float] | None = None,
) -> RegionCurve:
    """List-rate cap surface of the scalar Gaussian keyed rotation scheme
    over (key rate, eavesdropper distortion)."""
    if key_rates is None:
        key_rates = np.linspace(0.0, 2.0, 21)
    if d0_grid is None:
        d0_grid = np.linspace(0.05, 1.0, 39)
    channel = BroadcastChannel.awgn(n0, 0.0, 0.0, power=spent_power)

    def evaluate(params):
        point = RegionPoint(
            key_rate=params["key_rate"], list_rate=0.0, d0=params["d0"], d1=lam, d2=lam
        )
        verdict = gaussian_inner(point, spent_power, lam, channel)
        return {
            "key_rate": params["key_rate"],
            "d0": params["d0"],
            "cap": verdict.cap,
            "cap_keyed": verdict.details["cap_keyed"],
            "cap_keyless": verdict.details["cap_keyless"],
        }

    grid = (
        {"key_rate": float(rk), "d0": float(d0)} for rk in key_rates for d0 in d0_grid
    )
    return sweep_region(evaluate, grid)


def fig5_curves(
    lam: float = 1.0,
    spent_power: float = 1.0,
    n0: float = 0.0,
    d0_grid: Sequence[float] | None = None,
) -> RegionCurve:
    """One-bit-key comparison: block rotation scheme versus single-letter
    sign flips, including the scheme-specific (keyed) components."""
    if d0_grid is None:
        d0_grid = np.linspace(0.01, 1.0, 100)
    channel = BroadcastChannel.awgn(n0, 0.0, 0.0, power=spent_power)

    def evaluate(params):
        d0 = params["d0"]
        point = RegionPoint(key_rate=1.0, list_rate=0.0, d0=d0, d1=lam, d2=lam)
        proposed = gaussian_inner(point, spent_power, lam, channel)
        sign = sign_change_upper(lam, spent_power, n0, d0)
        return {
            "d0": d0,
            "proposed_cap": proposed.cap,
            "sign_cap": sign.cap,
            "proposed_keyed": proposed.details["cap_keyed"],
            "sign_keyed": sign.keyed_bound,
            "keyless": sign.keyless,
        }

    return sweep_region(evaluate, ({"d0": float(d)} for d in d0_grid))


def binary_optimality_curve(
    key_rate: float = 0.3,
    steps: int = 40,
) -> RegionCurve:
    """Matching-condition showcase on two binary channels, one per branch.

    Branch 1 (clean eavesdropper): receiver distortions swept up to the
    eavesdropper target.  Branch 2 (noisy eavesdropper): receivers pinned to
    their floors, eavesdropper target swept below.
    """
    rows = []
    chan1 = BroadcastChannel.bsc(0.05, 0.1, 0.15)
    for d1 in np.linspace(0.1, 0.45, steps):
        point = RegionPoint(key_rate=key_rate, list_rate=0.0, d0=0.45, d1=float(d1), d2=0.45)
        rep = binary_optimality(point, chan1)
        rows.append(
            {
                "branch": 1.0,
                "d0": point.d0,
                "d1": point.d1,
                "d2": point.d2,
                "inner_cap": rep.inner_cap,
                "outer_cap": rep.outer_cap,
                "optimal": float(rep.optimal),
            }
        )
    chan2 = BroadcastChannel.bsc(0.2, 0.1, 0.15)
    for d0 in np.linspace(0.01, 0.1, steps):
        point = RegionPoint(key_rate=key_rate, list_rate=0.0, d0=float(d0), d1=0.1, d2=0.15)
        rep = binary_optimality(point, chan2)
        rows.append(
            {
                "branch": 2.0,
                "d0": point.d0,
                "d1": point.d1,
                "d2": point.d2,
                "inner_cap": rep.inner_cap,
                "outer_cap": rep.outer_cap,
                "optimal": float(rep.optimal),
            }
        )
    columns = ("branch", "d0", "d1", "d2", "inner_cap", "outer_cap", "optimal")
    return RegionCurve(
        columns=columns, rows=tuple(tuple(r[c] for c in columns) for r in rows)
    )
