"""Experiment orchestration: seeded simulations, attack sweeps, diagnostic
self-checks, and figure/region artifact emission.

Every random draw descends from ``(master seed, scenario id, phase, n,
trial)`` through :class:`~ciphercast.models.KeyedRng`, so reruns of the same
spec are byte-identical and per-n chunks can be recomputed independently (the
CLI uses that for checkpoint/resume).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from . import adversary, ortho_codec, permute_codec, regions
from .models import (
    BroadcastChannel,
    ConfigError,
    KeyedRng,
    SchemeParams,
    SourceModel,
    distortion,
    empirical_power,
    key_count,
    sample_source_block,
    transmit,
    _parse_channel,
    _parse_source,
)
from .rd_analysis import (
    DiscreteDistribution,
    binary_convolve,
    binary_entropy,
    blahut_arimoto_rd,
    conditional_dtilted,
    conditional_rd,
    dtilted_information,
    hamming_matrix,
)

__all__ = [
    "SCHEMA_VERSION",
    "AttackSpec",
    "ExperimentSpec",
    "TrialRecord",
    "PerNSummary",
    "LemmaCheck",
    "parse_experiment",
    "run_simulation_for_n",
    "run_simulation",
    "run_attacks",
    "verify_lemmas",
    "emit_region",
    "summary_to_dict",
    "summary_rows_csv",
    "attack_rows_csv",
    "to_json",
]

SCHEMA_VERSION = "1"

_PHASE_SIM = 0
_PHASE_CODEBOOK = 1
_PHASE_ATTACK = 2

# Materialisation limits; beyond them the per-trial transform is drawn
# directly from its (identical) marginal law.
_MAX_PERM_ENTRIES = 1 << 16
_MAX_ORTHO_BYTES = 1 << 26


def _scenario_tag(scenario_id: str) -> int:
    digest = hashlib.sha256(scenario_id.encode()).digest()
    return int.from_bytes(digest[:4], "big")


@dataclass(frozen=True)
class AttackSpec:
    """One attack configuration: strategy plus its rate/budget knobs."""

    strategy: str
    d0: float
    list_rate: float | None = None
    margin: float | None = None
    trials: int = 200

    def __post_init__(self):
        if self.strategy not in ("keysearch", "ignorez", "exhaustive", "greedy"):
            raise ValueError(f"unknown attack strategy {self.strategy!r}")
        if self.d0 < 0:
            raise ValueError(f"d0 must be nonnegative, got {self.d0}")


@dataclass(frozen=True)
class ExperimentSpec:
    """Parsed experiment: models, scheme family, block lengths, and seeds."""

    scenario_id: str
    source: SourceModel
    channel: BroadcastChannel
    scheme_family: str
    key_rate: float
    master_seed: int
    n_list: tuple[int, ...]
    trials: int
    crossover: float | None = None
    spent_power: float | None = None
    spent_powers: tuple[float, ...] | None = None
    attacks: tuple[AttackSpec, ...] = ()
    distortion_targets: tuple[float, float] | None = None
    excess_slack: float = 0.05

    def stream(self, *tags: int) -> KeyedRng:
        return KeyedRng(self.master_seed, stream=_scenario_tag(self.scenario_id)).derive(
            *tags
        )

    def params_for(self, n: int) -> SchemeParams:
        if self.scheme_family == "permutation":
            return SchemeParams.binary(n, self.key_rate, self.crossover or 0.0)
        if self.scheme_family == "orthogonal":
            if self.source.kind == "vector_gaussian":
                return SchemeParams.vector(
                    n, self.key_rate, self.spent_powers, self.source, self.channel
                )
            return SchemeParams.gaussian(
                n, self.key_rate, self.spent_power, self.source, self.channel
            )
        if self.scheme_family == "sign_change":
            return SchemeParams.gaussian(
                n, 1.0 / n, self.spent_power, self.source, self.channel
            )
        raise ValueError(f"unknown scheme family {self.scheme_family!r}")

    def theoretical_floors(self) -> tuple[float, float]:
        """Per-receiver distortion floors of the configured scheme."""
        if self.scheme_family == "permutation":
            return (
                binary_convolve(self.crossover or 0.0, self.channel.crossovers[1]),
                binary_convolve(self.crossover or 0.0, self.channel.crossovers[2]),
            )
        if self.source.kind == "vector_gaussian":
            floors = []
            for i in (1, 2):
                floors.append(
                    sum(
                        lam * nv / (pw + nv) if pw + nv > 0 else 0.0
                        for lam, pw, nv in zip(
                            self.source.variances, self.spent_powers, self.channel.noise[i]
                        )
                    )
                )
            return (floors[0], floors[1])
        lam = self.source.variance
        pw = self.spent_power
        return tuple(
            lam * self.channel.noise[i] / (pw + self.channel.noise[i])
            if pw + self.channel.noise[i] > 0
            else 0.0
            for i in (1, 2)
        )


def parse_experiment(obj: Mapping) -> ExperimentSpec:
    """Parse and validate a raw experiment configuration object.

    Accepts the same source/channel/scheme blocks as the single-run config,
    plus ``n`` or ``n_list``, ``trials``, ``scenario_id``, and an optional
    ``attacks`` array.  Raises :class:`~ciphercast.models.ConfigError` with
    the offending field path.
    """
    if not isinstance(obj, Mapping):
        raise ConfigError("", "top-level config must be an object")
    source = _parse_source(obj.get("source") if "source" in obj else _missing("source"))
    channel = _parse_channel(obj.get("channel") if "channel" in obj else _missing("channel"))

    if "n_list" in obj:
        raw_ns = obj["n_list"]
        if not isinstance(raw_ns, (list, tuple)) or not raw_ns:
            raise ConfigError("n_list", "expected a nonempty list of block lengths")
    elif "n" in obj:
        raw_ns = [obj["n"]]
    else:
        raise ConfigError("n", "missing required field (or provide n_list)")
    n_list = []
    for i, v in enumerate(raw_ns):
        if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
            raise ConfigError(f"n_list[{i}]", f"expected a positive integer, got {v!r}")
        n_list.append(v)

    if "key_rate" in obj:
        key_rate = obj["key_rate"]
    elif "R_K" in obj:
        key_rate = obj["R_K"]
    else:
        raise ConfigError("key_rate", "missing required field")
    if isinstance(key_rate, bool) or not isinstance(key_rate, (int, float)) or key_rate < 0:
        raise ConfigError("key_rate", f"expected a nonnegative number, got {key_rate!r}")

    seed = obj.get("seed")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed", f"expected a 64-bit unsigned integer, got {seed!r}")

    trials = obj.get("trials", 100)
    if isinstance(trials, bool) or not isinstance(trials, int) or trials <= 0:
        raise ConfigError("trials", f"expected a positive integer, got {trials!r}")

    scenario_id = obj.get("scenario_id", "default")
    if not isinstance(scenario_id, str) or not scenario_id:
        raise ConfigError("scenario_id", "expected a nonempty string")

    raw_scheme = obj.get("scheme")
    if not isinstance(raw_scheme, Mapping):
        raise ConfigError("scheme", "expected an object")
    family = raw_scheme.get("family")
    crossover = spent_power = None
    spent_powers = None
    if family == "permutation":
        if source.kind != "bernoulli" or channel.kind != "bsc":
            raise ConfigError("scheme.family", "permutation needs a binary setting")
        crossover = raw_scheme.get("crossover", 0.0)
        if (
            isinstance(crossover, bool)
            or not isinstance(crossover, (int, float))
            or not 0.0 <= crossover <= 0.5
        ):
            raise ConfigError("scheme.crossover", f"expected a number in [0, 1/2], got {crossover!r}")
    elif family in ("orthogonal", "sign_change"):
        if source.kind == "vector_gaussian":
            if family == "sign_change":
                raise ConfigError("scheme.family", "sign_change is scalar only")
            raw_powers = raw_scheme.get("powers")
            if not isinstance(raw_powers, (list, tuple)) or not raw_powers:
                raise ConfigError("scheme.powers", "expected a nonempty list")
            spent_powers = tuple(float(p) for p in raw_powers)
        else:
            if source.kind != "gaussian" or channel.kind != "awgn":
                raise ConfigError("scheme.family", f"{family} needs a gaussian setting")
            spent_power = raw_scheme.get("power", channel.power)
            if (
                isinstance(spent_power, bool)
                or not isinstance(spent_power, (int, float))
                or spent_power < 0
            ):
                raise ConfigError("scheme.power", f"expected a nonnegative number, got {spent_power!r}")
    else:
        raise ConfigError("scheme.family", f"unknown scheme family {family!r}")

    attacks = []
    raw_attacks = obj.get("attacks", [])
    if not isinstance(raw_attacks, (list, tuple)):
        raise ConfigError("attacks", "expected a list")
    for i, raw in enumerate(raw_attacks):
        if not isinstance(raw, Mapping):
            raise ConfigError(f"attacks[{i}]", "expected an object")
        try:
            attacks.append(
                AttackSpec(
                    strategy=raw.get("strategy", ""),
                    d0=float(raw.get("d0", -1.0)),
                    list_rate=(
                        float(raw["list_rate"]) if "list_rate" in raw else None
                    ),
                    margin=float(raw["margin"]) if "margin" in raw else None,
                    trials=int(raw.get("trials", trials)),
                )
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"attacks[{i}]", str(exc)) from exc

    targets = None
    if "distortion_targets" in obj:
        raw_t = obj["distortion_targets"]
        if not isinstance(raw_t, (list, tuple)) or len(raw_t) != 2:
            raise ConfigError("distortion_targets", "expected [d1, d2]")
        targets = (float(raw_t[0]), float(raw_t[1]))

    slack = obj.get("excess_slack", 0.05)
    if isinstance(slack, bool) or not isinstance(slack, (int, float)) or slack <= 0:
        raise ConfigError("excess_slack", f"expected a positive number, got {slack!r}")

    spec = ExperimentSpec(
        scenario_id=scenario_id,
        source=source,
        channel=channel,
        scheme_family=family,
        key_rate=float(key_rate),
        master_seed=seed,
        n_list=tuple(n_list),
        trials=trials,
        crossover=crossover,
        spent_power=spent_power,
        spent_powers=spent_powers,
        attacks=tuple(attacks),
        distortion_targets=targets,
        excess_slack=float(slack),
    )
    # Exercise parameter construction early so bad combinations surface as
    # config errors instead of deep in a run.
    try:
        spec.params_for(spec.n_list[0])
    except ValueError as exc:
        raise ConfigError("scheme", str(exc)) from exc
    return spec


def _missing(name: str):
    raise ConfigError(name, "missing required field")


# ---------------------------------------------------------------------------
# Simulation


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    d1: float
    d2: float
    power: float


@dataclass(frozen=True)
class PerNSummary:
    """Distortion/power statistics for one block length."""

    schema_version: str
    scenario_id: str
    n: int
    trials: int
    mean_d1: float
    mean_d2: float
    mean_power: float
    target_d1: float
    target_d2: float
    excess_d1: float
    excess_d1_ci: tuple[float, float]
    excess_d2: float
    excess_d2_ci: tuple[float, float]
    power_violation: float
    power_violation_ci: tuple[float, float]
    records: tuple[TrialRecord, ...] = field(repr=False, default=())


class _TransformSource:
    """Keyed transform provider: materialised codebook when small, fresh
    marginal draws otherwise (the two are identically distributed)."""

    def __init__(self, spec: ExperimentSpec, n: int):
        self.spec = spec
        self.n = n
        self.keys = key_count(n, spec.key_rate)
        self.codebook = None
        if spec.scheme_family == "permutation":
            if self.keys <= _MAX_PERM_ENTRIES:
                self.codebook = permute_codec.gen_permutation_codebook(
                    n, spec.key_rate, spec.stream(_PHASE_CODEBOOK, n)
                )
        elif spec.scheme_family == "orthogonal":
            banks = spec.source.banks
            if banks * self.keys * n * n * 8 <= _MAX_ORTHO_BYTES:
                self.codebook = ortho_codec.gen_orthogonal_codebook(
                    n,
                    spec.key_rate,
                    spec.stream(_PHASE_CODEBOOK, n),
                    banks=banks,
                    max_bytes=_MAX_ORTHO_BYTES,
                )

    def permutation(self, gen: np.random.Generator) -> np.ndarray:
        if self.codebook is not None:
            key = int(gen.integers(0, self.keys))
            return self.codebook.entry(key)
        return gen.permutation(self.n)

    def rotations(self, gen: np.random.Generator, banks: int) -> list:
        if self.codebook is not None:
            key = int(gen.integers(0, self.keys))
            return [self.codebook.entry(key, b) for b in range(banks)]
        return [ortho_codec.sample_orthogonal(gen, 1, self.n)[0] for _ in range(banks)]


def _run_trial(spec: ExperimentSpec, n: int, params: SchemeParams, transforms, t: int):
    rng = spec.stream(_PHASE_SIM, n, t)
    source_rng = rng.derive(0)
    key_gen = rng.derive(1).generator()
    noise_rng = rng.derive(2)
    channel_rng = rng.derive(3)

    s = sample_source_block(spec.source, n, source_rng)

    if spec.scheme_family == "permutation":
        perm = transforms.permutation(key_gen)
        scrambled = s[perm]
        flips = (noise_rng.generator().random(n) < (spec.crossover or 0.0)).astype(np.int8)
        x = np.bitwise_xor(scrambled, flips)
        y1, y2, _ = transmit(spec.channel, x, channel_rng)
        inv = np.argsort(perm)
        est1, est2 = y1[inv], y2[inv]
    elif spec.scheme_family == "sign_change":
        sign = 1.0 if int(key_gen.integers(0, 2)) else -1.0
        x = params.alpha * sign * s
        y1, y2, _ = transmit(spec.channel, x, channel_rng)
        est1 = params.betas[1] * sign * y1
        est2 = params.betas[2] * sign * y2
    elif spec.source.kind == "vector_gaussian":
        mats = transforms.rotations(key_gen, spec.source.banks)
        x = np.stack(
            [params.alphas[j] * (mats[j] @ s[j]) for j in range(spec.source.banks)]
        )
        y1, y2, _ = transmit(spec.channel, x, channel_rng)
        est1 = np.stack(
            [
                params.beta_banks[1][j] * (mats[j].T @ y1[j])
                for j in range(spec.source.banks)
            ]
        )
        est2 = np.stack(
            [
                params.beta_banks[2][j] * (mats[j].T @ y2[j])
                for j in range(spec.source.banks)
            ]
        )
    else:
        mat = transforms.rotations(key_gen, 1)[0]
        x = params.alpha * (mat @ s)
        y1, y2, _ = transmit(spec.channel, x, channel_rng)
        est1 = params.betas[1] * (mat.T @ y1)
        est2 = params.betas[2] * (mat.T @ y2)

    return TrialRecord(
        trial=t,
        d1=distortion(spec.source, s, est1),
        d2=distortion(spec.source, s, est2),
        power=empirical_power(x),
    )


def run_simulation_for_n(spec: ExperimentSpec, n: int) -> PerNSummary:
    """Simulate the configured scheme end to end at one block length."""
    params = spec.params_for(n)
    transforms = _TransformSource(spec, n)
    records = tuple(
        _run_trial(spec, n, params, transforms, t) for t in range(spec.trials)
    )
    floors = spec.theoretical_floors()
    targets = spec.distortion_targets or floors
    slack = spec.excess_slack
    d1s = np.array([r.d1 for r in records])
    d2s = np.array([r.d2 for r in records])
    powers = np.array([r.power for r in records])

    def freq_ci(flags: np.ndarray):
        k = int(flags.sum())
        return k / flags.size, adversary.wilson_interval(k, flags.size)

    ex1, ci1 = freq_ci(d1s > targets[0] + slack)
    ex2, ci2 = freq_ci(d2s > targets[1] + slack)
    if spec.channel.kind == "bsc":
        viol, ci_v = 0.0, (0.0, 0.0)
    else:
        viol, ci_v = freq_ci(powers > spec.channel.power + slack)
    return PerNSummary(
        schema_version=SCHEMA_VERSION,
        scenario_id=spec.scenario_id,
        n=n,
        trials=spec.trials,
        mean_d1=float(d1s.mean()),
        mean_d2=float(d2s.mean()),
        mean_power=float(powers.mean()),
        target_d1=float(targets[0]),
        target_d2=float(targets[1]),
        excess_d1=ex1,
        excess_d1_ci=ci1,
        excess_d2=ex2,
        excess_d2_ci=ci2,
        power_violation=viol,
        power_violation_ci=ci_v,
        records=records,
    )


def run_simulation(spec: ExperimentSpec) -> tuple[PerNSummary, ...]:
    return tuple(run_simulation_for_n(spec, n) for n in spec.n_list)


def summary_to_dict(summary: PerNSummary, include_records: bool = False) -> dict:
    out = {
        "schema_version": summary.schema_version,
        "scenario_id": summary.scenario_id,
        "n": summary.n,
        "trials": summary.trials,
        "mean_d1": summary.mean_d1,
        "mean_d2": summary.mean_d2,
        "mean_power": summary.mean_power,
        "target_d1": summary.target_d1,
        "target_d2": summary.target_d2,
        "excess_d1": summary.excess_d1,
        "excess_d1_ci": list(summary.excess_d1_ci),
        "excess_d2": summary.excess_d2,
        "excess_d2_ci": list(summary.excess_d2_ci),
        "power_violation": summary.power_violation,
        "power_violation_ci": list(summary.power_violation_ci),
    }
    if include_records:
        out["records"] = [
            {"trial": r.trial, "d1": r.d1, "d2": r.d2, "power": r.power}
            for r in summary.records
        ]
    return out


_SUMMARY_COLUMNS = (
    "n",
    "trials",
    "mean_d1",
    "mean_d2",
    "mean_power",
    "target_d1",
    "target_d2",
    "excess_d1",
    "excess_d1_lo",
    "excess_d1_hi",
    "excess_d2",
    "excess_d2_lo",
    "excess_d2_hi",
    "power_violation",
    "power_violation_lo",
    "power_violation_hi",
)


def summary_rows_csv(summaries: Sequence[Mapping]) -> str:
    """Fixed-column CSV over per-n summary dicts (CI pairs flattened)."""
    lines = [",".join(_SUMMARY_COLUMNS)]
    for s in summaries:
        flat = dict(s)
        for key in ("excess_d1", "excess_d2", "power_violation"):
            lo, hi = flat.pop(f"{key}_ci")
            flat[f"{key}_lo"], flat[f"{key}_hi"] = lo, hi
        lines.append(
            ",".join(
                repr(flat[c]) if isinstance(flat[c], float) else str(flat[c])
                for c in _SUMMARY_COLUMNS
            )
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Attacks


_ATTACK_COLUMNS = (
    "schema_version",
    "scenario_id",
    "strategy",
    "n",
    "list_rate",
    "d0",
    "success",
    "ci_low",
    "ci_high",
    "trials",
    "seed",
    "cap",
    "cap_keyed",
    "cap_keyless",
)


def _predicted_caps(spec: ExperimentSpec, n: int, d0: float) -> tuple[float, float, float]:
    point = regions.RegionPoint(
        key_rate=spec.key_rate, list_rate=0.0, d0=d0, d1=1.0, d2=1.0
    )
    if spec.scheme_family == "permutation":
        verdict = regions.binary_inner(point, spec.crossover or 0.0, spec.channel)
    elif spec.source.kind == "vector_gaussian":
        verdict = regions.vector_gaussian_inner(
            point, spec.spent_powers, spec.source.variances, spec.channel
        )
    else:
        verdict = regions.gaussian_inner(
            point, spec.spent_power, spec.source.variance, spec.channel
        )
    return (
        verdict.cap,
        verdict.details["cap_keyed"],
        verdict.details["cap_keyless"],
    )


def run_attacks(spec: ExperimentSpec) -> tuple[dict, ...]:
    """Run every configured attack at every block length; returns table rows.

    Each row carries the measured success statistics next to the predicted
    achievable-cap components at the attack's distortion budget, so a sweep
    across list rates renders the threshold picture directly.
    """
    rows = []
    for n in spec.n_list:
        params = spec.params_for(n)
        for idx, attack in enumerate(spec.attacks):
            rng = spec.stream(_PHASE_ATTACK, n, idx)
            if attack.strategy == "keysearch":
                result = adversary.keysearch_attack(
                    spec.source,
                    spec.channel,
                    params,
                    attack.d0,
                    attack.trials,
                    rng,
                    list_rate=attack.list_rate,
                    margin=attack.margin,
                )
            elif attack.strategy == "ignorez":
                result = adversary.ignorez_attack(
                    spec.source,
                    n,
                    attack.d0,
                    attack.trials,
                    rng,
                    list_rate=attack.list_rate,
                    margin=attack.margin,
                )
            else:
                if spec.scheme_family != "permutation":
                    raise ValueError(
                        f"{attack.strategy} attack needs the binary permutation scheme"
                    )
                codebook = permute_codec.gen_permutation_codebook(
                    n, spec.key_rate, spec.stream(_PHASE_CODEBOOK, n)
                )
                instance = adversary.BinaryScrambleInstance.from_models(
                    spec.source, spec.channel, params, codebook.perms
                )
                if attack.list_rate is None:
                    raise ValueError(f"{attack.strategy} attack needs an explicit list_rate")
                if attack.strategy == "exhaustive":
                    exact = adversary.exhaustive_henchman(
                        instance, attack.d0, attack.list_rate
                    )
                    result = adversary.simulate_henchman_code(
                        instance, exact.code, attack.d0, attack.trials, rng,
                        strategy="exhaustive",
                    )
                    result.extra["exact_success"] = exact.success
                else:
                    result = adversary.greedy_henchman(
                        instance, attack.d0, attack.list_rate, attack.trials, rng
                    )
            cap, keyed, keyless = _predicted_caps(spec, n, attack.d0)
            rows.append(
                {
                    "schema_version": SCHEMA_VERSION,
                    "scenario_id": spec.scenario_id,
                    "strategy": result.strategy,
                    "n": n,
                    "list_rate": result.list_rate,
                    "d0": result.d0,
                    "success": result.success,
                    "ci_low": result.ci_low,
                    "ci_high": result.ci_high,
                    "trials": result.trials,
                    "seed": spec.master_seed,
                    "cap": cap,
                    "cap_keyed": keyed,
                    "cap_keyless": keyless,
                    **{f"extra_{k}": v for k, v in sorted(result.extra.items())},
                }
            )
    return tuple(rows)


def attack_rows_csv(rows: Sequence[Mapping]) -> str:
    """Fixed-column CSV of attack rows at full float precision."""
    lines = [",".join(_ATTACK_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                repr(row[c]) if isinstance(row[c], float) else str(row[c])
                for c in _ATTACK_COLUMNS
            )
        )
    return "\n".join(lines) + "\n"


def to_json(payload) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Diagnostic self-checks


@dataclass(frozen=True)
class LemmaCheck:
    """One self-check: a named statistic compared against a threshold."""

    name: str
    statistic: float
    threshold: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "verdict": "pass" if self.passed else "FAIL",
            "detail": self.detail,
        }


def _check_scramble_uniform(rng: KeyedRng) -> LemmaCheck:
    block = np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)
    report = permute_codec.uniformity_test(block, samples=200_000, rng=rng)
    return LemmaCheck(
        name="scramble_uniform_over_type_class",
        statistic=report.p_value,
        threshold=1e-3,
        passed=report.p_value > 1e-3,
        detail=f"chi-square over {report.class_size} arrangements, {report.samples} draws",
    )


def _check_scramble_inverse_uniform(rng: KeyedRng) -> LemmaCheck:
    # If the scrambling permutation is uniform, so is its inverse; check the
    # inverse's action on a fixed block directly.
    block = np.array([0, 1, 1, 0, 1, 0], dtype=np.int8)

    def inverted(gen: np.random.Generator, count: int, n: int) -> np.ndarray:
        draws = np.argsort(gen.random((count, n)), axis=1)
        return np.argsort(draws, axis=1)

    report = permute_codec.uniformity_test(
        block, samples=200_000, rng=rng, permute=inverted
    )
    return LemmaCheck(
        name="descramble_uniform_over_type_class",
        statistic=report.p_value,
        threshold=1e-3,
        passed=report.p_value > 1e-3,
        detail="inverse permutations binned over the type class",
    )


def _check_type_class_bounds() -> LemmaCheck:
    worst = -math.inf
    for n in range(2, 13):
        for ones in range(n + 1):
            block = np.array([1] * ones + [0] * (n - ones), dtype=np.int8)
            size = permute_codec.type_class_size(permute_codec.type_of(block))
            log2_exact = math.log2(size.exact)
            gap = max(log2_exact - size.log2_upper, size.log2_lower - log2_exact)
            worst = max(worst, gap)
    return LemmaCheck(
        name="type_class_size_sandwich",
        statistic=worst,
        threshold=1e-9,
        passed=worst <= 1e-9,
        detail="all binary compositions, n <= 12",
    )


def _check_haar(rng: KeyedRng) -> list[LemmaCheck]:
    report = ortho_codec.haar_invariance_test(16, samples=20_000, rng=rng)
    return [
        LemmaCheck(
            name="rotation_image_mean_zero",
            statistic=report.max_abs_mean,
            threshold=report.mean_tol,
            passed=report.means_ok,
        ),
        LemmaCheck(
            name="rotation_image_second_moment",
            statistic=report.max_moment_dev,
            threshold=report.moment_tol,
            passed=report.moments_ok,
        ),
        LemmaCheck(
            name="rotation_direction_invariance_ks",
            statistic=report.ks_p,
            threshold=ortho_codec.TOLERANCES["p_floor"],
            passed=report.ks_ok,
        ),
        LemmaCheck(
            name="rotation_orthogonality_residual",
            statistic=report.orthogonality_residual,
            threshold=ortho_codec.TOLERANCES["orthogonality"],
            passed=report.orthogonality_ok,
        ),
    ]


def _check_haar_angular(rng: KeyedRng) -> LemmaCheck:
    report = ortho_codec.haar_invariance_test(2, samples=40_000, rng=rng)
    return LemmaCheck(
        name="rotation_planar_angle_uniform",
        statistic=report.angular_p,
        threshold=ortho_codec.TOLERANCES["p_floor"],
        passed=report.angular_ok,
        detail="32-bin chi-square on n=2 image angles",
    )


def _check_cap_ratio_closed_form() -> LemmaCheck:
    theta = 0.7
    exact = adversary.spherical_cap_ratio(3, theta).exact
    closed = (1.0 - math.cos(theta)) / 2.0
    err = abs(exact - closed)
    return LemmaCheck(
        name="cap_ratio_matches_n3_closed_form",
        statistic=err,
        threshold=1e-12,
        passed=err <= 1e-12,
    )


def _check_cap_ratio_asymptotic() -> LemmaCheck:
    ratio = adversary.spherical_cap_ratio(200, math.pi / 4)
    rel = abs(ratio.asymptotic - ratio.exact) / ratio.exact
    return LemmaCheck(
        name="cap_ratio_asymptotic_agreement",
        statistic=rel,
        threshold=0.02,
        passed=rel < 0.02,
        detail="n=200, quarter-circle half-angle",
    )


def _check_binomial_exponent() -> LemmaCheck:
    d = 0.11
    floor = 1.0 - binary_entropy(d)
    worst = math.inf
    for n in range(10, 21):
        radius = math.floor(n * d + 1e-9)
        prob = sum(math.comb(n, w) for w in range(radius + 1)) / 2**n
        lhs = -math.log2(prob) / n
        rhs = floor - 2.0 * math.log2(n + 1) / n
        worst = min(worst, lhs - rhs)
    return LemmaCheck(
        name="ball_mass_exponent_floor",
        statistic=worst,
        threshold=0.0,
        passed=worst >= 0.0,
        detail="exact binomial tails, n=10..20, d=0.11",
    )


def _check_dtilted_identity() -> LemmaCheck:
    source = DiscreteDistribution.from_probs([0.35, 0.65])
    dmat = hamming_matrix(2)
    target = 0.15
    point = blahut_arimoto_rd(source, dmat, target)
    tilt = dtilted_information(source, dmat, target)
    err = abs(float(source.vector @ tilt) - point.rate_bits)
    return LemmaCheck(
        name="dtilted_mean_equals_rate",
        statistic=err,
        threshold=1e-3,
        passed=err <= 1e-3,
    )


def _check_conditional_dtilted() -> list[LemmaCheck]:
    # Uniform bit observed through crossover 0.2; the conditional curve has
    # the closed form h(0.2) - h(target) to compare against.
    joint = np.array([[0.5 * 0.8, 0.5 * 0.2], [0.5 * 0.2, 0.5 * 0.8]])
    dmat = hamming_matrix(2)
    target = 0.1
    point = conditional_rd(joint, dmat, target)
    closed = binary_entropy(0.2) - binary_entropy(target)
    rate_err = abs(point.rate_bits - closed)
    tilt = conditional_dtilted(joint, dmat, target)
    mean = float(np.sum(joint * tilt.table))
    mean_err = abs(mean - point.rate_bits)
    budget = float(np.sum(joint.sum(axis=0) * point.b_star)) - target
    return [
        LemmaCheck(
            name="conditional_rate_closed_form",
            statistic=rate_err,
            threshold=1e-3,
            passed=rate_err <= 1e-3,
        ),
        LemmaCheck(
            name="conditional_dtilted_mean_equals_rate",
            statistic=mean_err,
            threshold=1e-3,
            passed=mean_err <= 1e-3,
        ),
        LemmaCheck(
            name="conditional_allocation_meets_budget",
            statistic=budget,
            threshold=1e-6,
            passed=abs(budget) <= 1e-6,
        ),
    ]


def _check_junction_continuity() -> LemmaCheck:
    lam = pw = n0 = 1.0
    junction = lam * n0 / (pw + n0)
    eps = 1e-12
    above = regions.sign_change_upper(lam, pw, n0, junction + eps)
    below = regions.sign_change_upper(lam, pw, n0, junction)
    err = max(
        abs(above.keyed_bound - 1.0),
        abs(below.keyed_bound - 1.0),
    )
    return LemmaCheck(
        name="single_letter_junction_value",
        statistic=err,
        threshold=1e-9,
        passed=err <= 1e-9,
        detail="both branches equal one key-bit at the junction",
    )


def _check_water_level(rng: KeyedRng) -> LemmaCheck:
    gen = rng.generator()
    worst = 0.0
    for _ in range(50):
        caps = tuple(float(c) for c in gen.uniform(0.05, 3.0, size=gen.integers(1, 7)))
        target = float(gen.uniform(0.0, sum(caps)))
        level = regions.water_level(caps, target)
        got = sum(min(level, c) for c in caps)
        worst = max(worst, abs(got - target))
    return LemmaCheck(
        name="water_level_reproduces_budget",
        statistic=worst,
        threshold=1e-10,
        passed=worst <= 1e-10,
        detail="50 random cap profiles",
    )


def _check_covering_matches_region() -> LemmaCheck:
    worst = 0.0
    channel = BroadcastChannel.awgn(1.0, 1.0, 3.0, power=1.0)
    for d0 in (0.05, 0.2, 0.4):
        for key_rate in (0.0, 0.5, 1.5):
            est = adversary.covering_count_estimate(1.0, 1.0, 1.0, d0, key_rate)
            point = regions.RegionPoint(
                key_rate=key_rate, list_rate=0.0, d0=d0, d1=1.0, d2=1.0
            )
            verdict = regions.gaussian_inner(point, 1.0, 1.0, channel)
            worst = max(
                worst,
                abs(est.keyed_exponent - verdict.details["cap_keyed"]),
                abs(est.keyless_exponent - verdict.details["cap_keyless"]),
            )
    return LemmaCheck(
        name="covering_count_matches_achievable_cap",
        statistic=worst,
        threshold=1e-12,
        passed=worst <= 1e-12,
    )


def _check_negative_controls(rng: KeyedRng) -> list[LemmaCheck]:
    # Deliberately broken samplers must be caught: a scrambler that leaves
    # the block alone half the time, and a "rotation" sampler with one axis
    # never reflected.
    block = np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)

    def sticky(gen: np.random.Generator, count: int, n: int) -> np.ndarray:
        perms = np.argsort(gen.random((count, n)), axis=1)
        stay = gen.random(count) < 0.5
        perms[stay] = np.arange(n)
        return perms

    report = permute_codec.uniformity_test(
        block, samples=50_000, rng=rng.derive(0), permute=sticky
    )
    caught_perm = report.p_value < 1e-3

    def lopsided(gen: np.random.Generator, count: int, n: int) -> np.ndarray:
        mats, ok = ortho_codec._orthonormalize_batch(
            gen.standard_normal((count, n, n))
        )
        mats[~ok] = np.eye(n)
        mats[:, :, 0] = np.abs(mats[:, :, 0])
        return mats

    haar = ortho_codec.haar_invariance_test(
        8, samples=20_000, rng=rng.derive(1), sampler=lopsided
    )
    caught_haar = not haar.passed
    return [
        LemmaCheck(
            name="negative_control_sticky_scrambler_caught",
            statistic=report.p_value,
            threshold=1e-3,
            passed=caught_perm,
            detail="biased sampler must fail the uniformity test",
        ),
        LemmaCheck(
            name="negative_control_lopsided_rotations_caught",
            statistic=haar.max_abs_mean,
            threshold=haar.mean_tol,
            passed=caught_haar,
            detail="half-space sampler must fail the invariance suite",
        ),
    ]


def verify_lemmas(seed: int = 7, selector: str = "all") -> tuple[LemmaCheck, ...]:
    """Run the structural self-checks; returns one record per check.

    ``selector`` filters by substring of the check name ("all" keeps
    everything).  Each check is a cheap, seeded diagnostic of a property the
    package's guarantees lean on; the two negative controls assert that the
    statistical tests have teeth.
    """
    rng = KeyedRng(seed, stream=0xC0FFEE)
    checks: list[LemmaCheck] = []
    checks.append(_check_scramble_uniform(rng.derive(0)))
    checks.append(_check_scramble_inverse_uniform(rng.derive(1)))
    checks.append(_check_type_class_bounds())
    checks.extend(_check_haar(rng.derive(2)))
    checks.append(_check_haar_angular(rng.derive(3)))
    checks.append(_check_cap_ratio_closed_form())
    checks.append(_check_cap_ratio_asymptotic())
    checks.append(_check_binomial_exponent())
    checks.append(_check_dtilted_identity())
    checks.extend(_check_conditional_dtilted())
    checks.append(_check_junction_continuity())
    checks.append(_check_water_level(rng.derive(4)))
    checks.append(_check_covering_matches_region())
    checks.extend(_check_negative_controls(rng.derive(5)))
    if selector != "all":
        checks = [c for c in checks if selector in c.name]
    return tuple(checks)


# ---------------------------------------------------------------------------
# Region artifacts


_REGION_PRESETS = ("fig2", "fig5", "binary-opt")


def _point_from_request(obj: Mapping) -> regions.RegionPoint:
    raw = obj.get("point")
    if not isinstance(raw, Mapping):
        raise ConfigError("point", "expected an object")
    try:
        return regions.RegionPoint(
            key_rate=float(raw["key_rate"]),
            list_rate=float(raw["list_rate"]),
            d0=float(raw["d0"]),
            d1=float(raw["d1"]),
            d2=float(raw["d2"]),
        )
    except KeyError as exc:
        raise ConfigError(f"point.{exc.args[0]}", "missing required field") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError("point", str(exc)) from exc


def _verdict_payload(name: str, verdict: regions.RegionVerdict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "bound": name,
        "member": verdict.member,
        "cap": verdict.cap,
        "binding": list(verdict.binding),
        "details": dict(verdict.details),
    }


def emit_region(request: Mapping) -> dict[str, str]:
    """Produce region artifacts as ``{filename: content}``.

    ``{"preset": "fig2" | "fig5" | "binary-opt"}`` emits the corresponding
    sweep as CSV plus a small JSON manifest.  Otherwise the request names a
    ``setting`` (binary / gaussian), models, and a single rate-distortion
    point, and the result is a JSON verdict from both bounds plus the
    optimality check.
    """
    if not isinstance(request, Mapping):
        raise ConfigError("", "region request must be an object")
    preset = request.get("preset")
    if preset is not None:
        if preset not in _REGION_PRESETS:
            raise ConfigError("preset", f"expected one of {_REGION_PRESETS}, got {preset!r}")
        if preset == "fig2":
            curve = regions.fig2_surface()
            stem = "keyed_cap_surface"
        elif preset == "fig5":
            curve = regions.fig5_curves()
            stem = "single_letter_comparison"
        else:
            curve = regions.binary_optimality_curve()
            stem = "binary_optimality_sweep"
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "preset": preset,
            "columns": list(curve.columns),
            "rows": len(curve.rows),
        }
        return {
            f"{stem}.csv": curve.to_csv(),
            f"{stem}.json": to_json(manifest),
        }

    setting = request.get("setting")
    if setting == "binary":
        channel = _parse_channel(request.get("channel"))
        if channel.kind != "bsc":
            raise ConfigError("channel.kind", "binary setting needs a bsc channel")
        point = _point_from_request(request)
        crossover = request.get("crossover")
        if (
            isinstance(crossover, bool)
            or not isinstance(crossover, (int, float))
            or not 0.0 <= crossover <= 0.5
        ):
            raise ConfigError("crossover", f"expected a number in [0, 1/2], got {crossover!r}")
        inner = regions.binary_inner(point, float(crossover), channel)
        outer = regions.binary_outer(point, channel)
        opt = regions.binary_optimality(point, channel)
    elif setting == "gaussian":
        channel = _parse_channel(request.get("channel"))
        if channel.kind != "awgn":
            raise ConfigError("channel.kind", "gaussian setting needs an awgn channel")
        point = _point_from_request(request)
        lam = request.get("variance", 1.0)
        if isinstance(lam, bool) or not isinstance(lam, (int, float)) or lam <= 0:
            raise ConfigError("variance", f"expected a positive number, got {lam!r}")
        spent = request.get("power", channel.power)
        if isinstance(spent, bool) or not isinstance(spent, (int, float)) or spent < 0:
            raise ConfigError("power", f"expected a nonnegative number, got {spent!r}")
        inner = regions.gaussian_inner(point, float(spent), float(lam), channel)
        outer = regions.gaussian_outer(point, float(lam), channel)
        opt = regions.gaussian_optimality(point, float(lam), channel)
    else:
        raise ConfigError("setting", f"expected 'binary' or 'gaussian', got {setting!r}")

    payload = {
        "schema_version": SCHEMA_VERSION,
        "setting": setting,
        "point": {
            "key_rate": point.key_rate,
            "list_rate": point.list_rate,
            "d0": point.d0,
            "d1": point.d1,
            "d2": point.d2,
        },
        "inner": _verdict_payload("inner", inner),
        "outer": _verdict_payload("outer", outer),
        "optimality": {
            "optimal": opt.optimal,
            "branch": opt.branch,
            "receiver": opt.receiver,
            "inner_cap": opt.inner_cap,
            "outer_cap": opt.outer_cap,
            "caps_coincide": opt.caps_coincide,
            "scheme_knob": opt.scheme_knob,
            "domain_ok": opt.domain_ok,
        },
    }
    return {"region_point.json": to_json(payload)}
