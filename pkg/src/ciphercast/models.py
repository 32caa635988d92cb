"""Source, channel, and scheme primitives shared by every other module.

Everything here is an immutable dataclass plus a handful of pure sampling
functions.  The broadcast setting is fixed at three outputs: receiver 1,
receiver 2, and an eavesdropper (index 0 throughout).  Randomness is always
threaded through :class:`KeyedRng` so that a (seed, stream path) pair pins
down every draw exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

__all__ = [
    "HAMMING",
    "SQUARED_ERROR",
    "SUM_SQUARED_ERROR",
    "ConfigError",
    "SourceModel",
    "BroadcastChannel",
    "SchemeParams",
    "KeyedRng",
    "ExperimentConfig",
    "key_count",
    "sample_source_block",
    "transmit",
    "empirical_power",
    "distortion",
    "parse_config",
]

HAMMING = "hamming"
SQUARED_ERROR = "squared_error"
SUM_SQUARED_ERROR = "sum_squared_error"

_SOURCE_KINDS = ("bernoulli", "gaussian", "vector_gaussian")
_CHANNEL_KINDS = ("bsc", "awgn", "vector_awgn")
_SCHEME_FAMILIES = ("permutation", "orthogonal", "sign_change")


class ConfigError(ValueError):
    """Invalid configuration; ``field_path`` names the offending entry."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        self.message = message
        super().__init__(f"{field_path}: {message}" if field_path else message)


def key_count(n: int, key_rate: float) -> int:
    """Number of shared keys for block length ``n`` and key rate ``key_rate``.

    Exact big integer ``2**ceil(n * key_rate)``; the ceiling is taken with a
    small slack so that float noise in ``n * key_rate`` cannot bump an exact
    integer product up a full bit.
    """
    if n <= 0:
        raise ValueError(f"block length must be positive, got {n}")
    if key_rate < 0:
        raise ValueError(f"key rate must be nonnegative, got {key_rate}")
    bits = max(0, math.ceil(n * key_rate - 1e-9))
    return 1 << bits


@dataclass(frozen=True)
class SourceModel:
    """Memoryless source plus its distortion measure.

    Parameters
    ----------
    kind:
        ``"bernoulli"`` (parameter ``q = P[S = 1]``), ``"gaussian"``
        (variance ``variance``), or ``"vector_gaussian"`` (independent
        banks with per-bank variances ``variances``).
    distortion:
        ``"hamming"`` for bits, ``"squared_error"`` for scalar blocks
        (normalised by block length), ``"sum_squared_error"`` for vector
        blocks (normalised by block length, summed over banks).
    """

    kind: str
    q: float = 0.5
    variance: float = 1.0
    variances: tuple[float, ...] = ()
    distortion: str = HAMMING

    def __post_init__(self):
        if self.kind not in _SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "bernoulli":
            if not 0.0 <= self.q <= 1.0:
                raise ValueError(f"bernoulli parameter must be in [0, 1], got {self.q}")
            if self.distortion != HAMMING:
                raise ValueError("bernoulli sources use hamming distortion")
        elif self.kind == "gaussian":
            if self.variance <= 0:
                raise ValueError(f"variance must be positive, got {self.variance}")
            if self.distortion != SQUARED_ERROR:
                raise ValueError("gaussian sources use squared_error distortion")
        else:
            if not self.variances:
                raise ValueError("vector_gaussian needs at least one bank variance")
            if any(v <= 0 for v in self.variances):
                raise ValueError(f"bank variances must be positive, got {self.variances}")
            if self.distortion != SUM_SQUARED_ERROR:
                raise ValueError("vector_gaussian sources use sum_squared_error distortion")

    @classmethod
    def bernoulli_half(cls) -> "SourceModel":
        return cls(kind="bernoulli", q=0.5)

    @classmethod
    def bernoulli(cls, q: float) -> "SourceModel":
        return cls(kind="bernoulli", q=q)

    @classmethod
    def gaussian(cls, variance: float = 1.0) -> "SourceModel":
        return cls(kind="gaussian", variance=variance, distortion=SQUARED_ERROR)

    @classmethod
    def vector_gaussian(cls, variances) -> "SourceModel":
        return cls(
            kind="vector_gaussian",
            variances=tuple(float(v) for v in variances),
            distortion=SUM_SQUARED_ERROR,
        )

    @property
    def banks(self) -> int:
        """Number of parallel source banks (1 unless vector_gaussian)."""
        return len(self.variances) if self.kind == "vector_gaussian" else 1


@dataclass(frozen=True)
class BroadcastChannel:
    """Memoryless broadcast channel with outputs (eavesdropper, rx1, rx2).

    ``kind="bsc"`` flips each transmitted bit independently with probability
    ``crossovers[i]`` on output ``i``.  ``kind="awgn"`` adds independent
    zero-mean Gaussian noise of variance ``noise[i]`` under an average input
    power budget ``power``.  ``kind="vector_awgn"`` does the same per bank,
    ``noise[i]`` being the per-bank noise row for output ``i`` and ``power``
    the total budget across banks.
    """

    kind: str
    crossovers: tuple[float, float, float] = ()
    noise: tuple = ()
    power: float = 0.0

    def __post_init__(self):
        if self.kind not in _CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "bsc":
            if len(self.crossovers) != 3:
                raise ValueError("bsc needs exactly three crossover probabilities")
            for i, p in enumerate(self.crossovers):
                if not 0.0 <= p <= 0.5:
                    raise ValueError(f"crossover {i} must be in [0, 1/2], got {p}")
        else:
            if self.power <= 0:
                raise ValueError(f"power budget must be positive, got {self.power}")
            if len(self.noise) != 3:
                raise ValueError("awgn needs exactly three noise entries")
            if self.kind == "awgn":
                for i, v in enumerate(self.noise):
                    if v < 0:
                        raise ValueError(f"noise variance {i} must be nonnegative, got {v}")
            else:
                widths = {len(row) for row in self.noise}
                if len(widths) != 1:
                    raise ValueError("vector_awgn noise rows must share a length")
                for i, row in enumerate(self.noise):
                    for j, v in enumerate(row):
                        if v < 0:
                            raise ValueError(
                                f"noise variance ({i},{j}) must be nonnegative, got {v}"
                            )

    @classmethod
    def bsc(cls, p0: float, p1: float, p2: float) -> "BroadcastChannel":
        return cls(kind="bsc", crossovers=(p0, p1, p2))

    @classmethod
    def awgn(cls, n0: float, n1: float, n2: float, power: float) -> "BroadcastChannel":
        return cls(kind="awgn", noise=(n0, n1, n2), power=power)

    @classmethod
    def vector_awgn(cls, noise_rows, power: float) -> "BroadcastChannel":
        rows = tuple(tuple(float(v) for v in row) for row in noise_rows)
        return cls(kind="vector_awgn", noise=rows, power=power)

    @property
    def banks(self) -> int:
        if self.kind == "vector_awgn":
            return len(self.noise[0])
        return 1


@dataclass(frozen=True)
class SchemeParams:
    """Per-block parameters of a keyed uncoded transmission scheme.

    Binary permutation schemes carry the test-channel crossover ``crossover``
    (the probability that a transmitted bit differs from the scrambled source
    bit).  Scalar Gaussian schemes carry the spent power ``power`` with gain
    ``alpha`` and per-output estimator coefficients ``betas``; vector schemes
    carry per-bank tuples of the same.  Factories compute the matched
    gains/coefficients, so constructing by hand is rarely needed.
    """

    n: int
    key_rate: float
    crossover: float | None = None
    power: float | None = None
    alpha: float | None = None
    betas: tuple[float, float, float] | None = None
    powers: tuple[float, ...] | None = None
    alphas: tuple[float, ...] | None = None
    beta_banks: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"block length must be positive, got {self.n}")
        if self.key_rate < 0:
            raise ValueError(f"key rate must be nonnegative, got {self.key_rate}")
        modes = sum(x is not None for x in (self.crossover, self.power, self.powers))
        if modes != 1:
            raise ValueError("exactly one of crossover / power / powers must be set")
        if self.crossover is not None and not 0.0 <= self.crossover <= 0.5:
            raise ValueError(f"crossover must be in [0, 1/2], got {self.crossover}")
        if self.power is not None and self.power < 0:
            raise ValueError(f"spent power must be nonnegative, got {self.power}")
        if self.powers is not None and any(p < 0 for p in self.powers):
            raise ValueError(f"spent powers must be nonnegative, got {self.powers}")

    @property
    def num_keys(self) -> int:
        return key_count(self.n, self.key_rate)

    @property
    def key_bits(self) -> int:
        return self.num_keys.bit_length() - 1

    @classmethod
    def binary(cls, n: int, key_rate: float, crossover: float) -> "SchemeParams":
        return cls(n=n, key_rate=key_rate, crossover=crossover)

    @classmethod
    def gaussian(
        cls,
        n: int,
        key_rate: float,
        power: float,
        source: SourceModel,
        channel: BroadcastChannel,
    ) -> "SchemeParams":
        """Matched scalar scheme: gain sqrt(P'/lam), MMSE coefficients per output."""
        if source.kind != "gaussian" or channel.kind != "awgn":
            raise ValueError("gaussian scheme needs a gaussian source and an awgn channel")
        lam = source.variance
        alpha = math.sqrt(power / lam) if power > 0 else 0.0
        betas = tuple(
            math.sqrt(lam * power) / (power + nv) if power + nv > 0 else 0.0
            for nv in channel.noise
        )
        return cls(n=n, key_rate=key_rate, power=power, alpha=alpha, betas=betas)

    @classmethod
    def vector(
        cls,
        n: int,
        key_rate: float,
        powers,
        source: SourceModel,
        channel: BroadcastChannel,
    ) -> "SchemeParams":
        """Matched per-bank scalar schemes under a shared total power budget."""
        if source.kind != "vector_gaussian" or channel.kind != "vector_awgn":
            raise ValueError("vector scheme needs vector_gaussian source and vector_awgn channel")
        powers = tuple(float(p) for p in powers)
        if len(powers) != source.banks or source.banks != channel.banks:
            raise ValueError(
                f"bank mismatch: {len(powers)} powers, {source.banks} source banks, "
                f"{channel.banks} channel banks"
            )
        if sum(powers) > channel.power + 1e-9:
            raise ValueError(
                f"spent power {sum(powers)} exceeds budget {channel.power}"
            )
        alphas = tuple(
            math.sqrt(p / lam) if p > 0 else 0.0
            for p, lam in zip(powers, source.variances)
        )
        beta_banks = tuple(
            tuple(
                math.sqrt(lam * p) / (p + nv) if p + nv > 0 else 0.0
                for p, lam, nv in zip(powers, source.variances, channel.noise[i])
            )
            for i in range(3)
        )
        return cls(
            n=n,
            key_rate=key_rate,
            powers=powers,
            alphas=alphas,
            beta_banks=beta_banks,
        )


@dataclass(frozen=True)
class KeyedRng:
    """Deterministic hierarchical RNG handle.

    ``generator()`` yields a fresh numpy Generator seeded by
    ``(seed, stream, *path)``; ``derive(*tags)`` extends the path, giving an
    independent stream for the same seed.  Equal handles always reproduce the
    same draws, so experiment records are exactly replayable.
    """

    seed: int
    stream: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for tag in (self.stream, *self.path):
            if not 0 <= tag < 2**32:
                raise ValueError(f"stream tags must fit in 32 bits, got {tag}")

    def derive(self, *tags: int) -> "KeyedRng":
        return KeyedRng(self.seed, self.stream, self.path + tuple(int(t) for t in tags))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream, *self.path))
        return np.random.default_rng(ss)


def sample_source_block(source: SourceModel, n: int, rng: KeyedRng) -> np.ndarray:
    """Draw one length-``n`` block: shape (n,) or (banks, n) for vector sources."""
    gen = rng.generator()
    if source.kind == "bernoulli":
        return (gen.random(n) < source.q).astype(np.int8)
    if source.kind == "gaussian":
        return gen.normal(0.0, math.sqrt(source.variance), n)
    scales = np.sqrt(np.asarray(source.variances))[:, None]
    return gen.standard_normal((source.banks, n)) * scales


def transmit(channel: BroadcastChannel, x: np.ndarray, rng: KeyedRng):
    """Push a block through the channel; returns ``(y1, y2, z)``.

    Noise on the three outputs is drawn from independent sub-streams of
    ``rng`` (tags 1, 2 for the receivers and 0 for the eavesdropper).
    """
    x = np.asarray(x)
    outputs = []
    for i in (1, 2, 0):
        gen = rng.derive(i).generator()
        if channel.kind == "bsc":
            flips = gen.random(x.shape) < channel.crossovers[i]
            outputs.append(np.bitwise_xor(x.astype(np.int8), flips.astype(np.int8)))
        elif channel.kind == "awgn":
            outputs.append(x + gen.normal(0.0, math.sqrt(channel.noise[i]), x.shape))
        else:
            scales = np.sqrt(np.asarray(channel.noise[i]))[:, None]
            outputs.append(x + gen.standard_normal(x.shape) * scales)
    return outputs[0], outputs[1], outputs[2]


def empirical_power(x: np.ndarray) -> float:
    """Average energy per channel use: sum of squares over block length.

    For vector blocks of shape (banks, n) this sums across banks, matching a
    total (not per-bank) power budget.
    """
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x) / x.shape[-1])


def distortion(source: SourceModel, s: np.ndarray, est: np.ndarray) -> float:
    """Per-letter distortion between a source block and its reconstruction."""
    s = np.asarray(s)
    est = np.asarray(est)
    if s.shape != est.shape:
        raise ValueError(f"shape mismatch: {s.shape} vs {est.shape}")
    if source.distortion == HAMMING:
        return float(np.mean(s != est))
    diff = s.astype(float) - est.astype(float)
    return float(np.sum(diff * diff) / s.shape[-1])


# ---------------------------------------------------------------------------
# JSON configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed top-level configuration: models plus block/seed bookkeeping."""

    source: SourceModel
    channel: BroadcastChannel
    scheme_family: str
    scheme: SchemeParams
    n: int
    key_rate: float
    seed: int


def _require(obj: Mapping, key: str, path: str) -> Any:
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _as_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _parse_source(obj: Any, path: str = "source") -> SourceModel:
    if not isinstance(obj, Mapping):
        raise ConfigError(path, "expected an object")
    kind = _require(obj, "kind", path)
    try:
        if kind == "bernoulli":
            return SourceModel.bernoulli(_as_number(obj.get("q", 0.5), f"{path}.q"))
        if kind == "gaussian":
            return SourceModel.gaussian(_as_number(obj.get("variance", 1.0), f"{path}.variance"))
        if kind == "vector_gaussian":
            variances = _require(obj, "variances", path)
            if not isinstance(variances, (list, tuple)):
                raise ConfigError(f"{path}.variances", "expected a list")
            return SourceModel.vector_gaussian(
                [_as_number(v, f"{path}.variances[{j}]") for j, v in enumerate(variances)]
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown source kind {kind!r}")


def _parse_channel(obj: Any, path: str = "channel") -> BroadcastChannel:
    if not isinstance(obj, Mapping):
        raise ConfigError(path, "expected an object")
    kind = _require(obj, "kind", path)
    try:
        if kind == "bsc":
            raw = _require(obj, "crossovers", path)
            if not isinstance(raw, (list, tuple)) or len(raw) != 3:
                raise ConfigError(f"{path}.crossovers", "expected a list of three probabilities")
            ps = [_as_number(v, f"{path}.crossovers[{j}]") for j, v in enumerate(raw)]
            return BroadcastChannel.bsc(*ps)
        if kind == "awgn":
            raw = _require(obj, "noise", path)
            if not isinstance(raw, (list, tuple)) or len(raw) != 3:
                raise ConfigError(f"{path}.noise", "expected a list of three variances")
            ns = [_as_number(v, f"{path}.noise[{j}]") for j, v in enumerate(raw)]
            return BroadcastChannel.awgn(*ns, power=_as_number(_require(obj, "power", path), f"{path}.power"))
        if kind == "vector_awgn":
            raw = _require(obj, "noise", path)
            if not isinstance(raw, (list, tuple)) or len(raw) != 3:
                raise ConfigError(f"{path}.noise", "expected three per-bank noise rows")
            rows = []
            for i, row in enumerate(raw):
                if not isinstance(row, (list, tuple)):
                    raise ConfigError(f"{path}.noise[{i}]", "expected a list")
                rows.append([_as_number(v, f"{path}.noise[{i}][{j}]") for j, v in enumerate(row)])
            return BroadcastChannel.vector_awgn(rows, power=_as_number(_require(obj, "power", path), f"{path}.power"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown channel kind {kind!r}")


def parse_config(obj: Mapping) -> ExperimentConfig:
    """Validate a raw JSON object into an :class:`ExperimentConfig`.

    Every failure raises :class:`ConfigError` carrying the dotted path of the
    offending field (``channel.crossovers[1]`` and the like), so callers can
    surface precise diagnostics.  ``key_rate`` also accepts the alias
    ``R_K``.
    """
    if not isinstance(obj, Mapping):
        raise ConfigError("", "top-level config must be an object")
    source = _parse_source(_require(obj, "source", ""))
    channel = _parse_channel(_require(obj, "channel", ""))
    n = _as_int(_require(obj, "n", ""), "n")
    if n <= 0:
        raise ConfigError("n", f"block length must be positive, got {n}")
    if "key_rate" in obj:
        key_rate = _as_number(obj["key_rate"], "key_rate")
    elif "R_K" in obj:
        key_rate = _as_number(obj["R_K"], "R_K")
    else:
        raise ConfigError("key_rate", "missing required field")
    if key_rate < 0:
        raise ConfigError("key_rate", f"must be nonnegative, got {key_rate}")
    seed = _as_int(_require(obj, "seed", ""), "seed")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", f"must be a 64-bit unsigned integer, got {seed}")

    raw_scheme = _require(obj, "scheme", "")
    if not isinstance(raw_scheme, Mapping):
        raise ConfigError("scheme", "expected an object")
    family = _require(raw_scheme, "family", "scheme")
    if family not in _SCHEME_FAMILIES:
        raise ConfigError("scheme.family", f"unknown scheme family {family!r}")
    try:
        if family == "permutation":
            if source.kind == "bernoulli":
                crossover = _as_number(raw_scheme.get("crossover", 0.0), "scheme.crossover")
                scheme = SchemeParams.binary(n, key_rate, crossover)
            else:
                raise ConfigError("scheme.family", "permutation scheme needs a bernoulli source")
        elif family == "orthogonal":
            if source.kind == "gaussian":
                power = _as_number(
                    raw_scheme.get("power", channel.power if channel.kind == "awgn" else 0.0),
                    "scheme.power",
                )
                scheme = SchemeParams.gaussian(n, key_rate, power, source, channel)
            elif source.kind == "vector_gaussian":
                raw_powers = _require(raw_scheme, "powers", "scheme")
                if not isinstance(raw_powers, (list, tuple)):
                    raise ConfigError("scheme.powers", "expected a list")
                powers = [
                    _as_number(p, f"scheme.powers[{j}]") for j, p in enumerate(raw_powers)
                ]
                scheme = SchemeParams.vector(n, key_rate, powers, source, channel)
            else:
                raise ConfigError("scheme.family", "orthogonal scheme needs a gaussian source")
        else:
            if source.kind != "gaussian" or channel.kind != "awgn":
                raise ConfigError("scheme.family", "sign_change needs a scalar gaussian setting")
            power = _as_number(
                raw_scheme.get("power", channel.power), "scheme.power"
            )
            scheme = SchemeParams.gaussian(n, key_rate, power, source, channel)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("scheme", str(exc)) from exc

    if channel.kind == "bsc" and source.kind != "bernoulli":
        raise ConfigError("channel.kind", "bsc channel needs a bernoulli source")
    if channel.kind in ("awgn", "vector_awgn") and source.kind == "bernoulli":
        raise ConfigError("channel.kind", "gaussian channels need a gaussian source")

    return ExperimentConfig(
        source=source,
        channel=channel,
        scheme_family=family,
        scheme=scheme,
        n=n,
        key_rate=key_rate,
        seed=seed,
    )
