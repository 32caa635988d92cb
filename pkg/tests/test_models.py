import math

import numpy as np
import pytest

from ciphercast.models import (
    BroadcastChannel,
    ConfigError,
    KeyedRng,
    SchemeParams,
    SourceModel,
    distortion,
    empirical_power,
    key_count,
    parse_config,
    sample_source_block,
    transmit,
)


def _binary_config(**overrides):
    cfg = {
        "source": {"kind": "bernoulli", "q": 0.5},
        "channel": {"kind": "bsc", "crossovers": [0.1, 0.1, 0.2]},
        "scheme": {"family": "permutation", "crossover": 0.05},
        "n": 100,
        "key_rate": 0.5,
        "seed": 3,
    }
    cfg.update(overrides)
    return cfg


def test_parse_config_roundtrip():
    cfg = parse_config(_binary_config())
    assert cfg.scheme_family == "permutation"
    assert cfg.n == 100
    assert cfg.key_rate == 0.5
    assert cfg.source.q == 0.5
    assert cfg.channel.crossovers == (0.1, 0.1, 0.2)


def test_parse_config_accepts_key_rate_alias():
    raw = _binary_config()
    raw.pop("key_rate")
    raw["R_K"] = 0.25
    assert parse_config(raw).key_rate == 0.25


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda c: c.pop("source"), "source"),
        (lambda c: c["source"].update(kind="laplacian"), "source.kind"),
        (lambda c: c["source"].update(q=1.5), "source"),
        (lambda c: c["channel"].update(crossovers=[0.1, 0.1]), "channel.crossovers"),
        (lambda c: c.update(n=-5), "n"),
        (lambda c: c.update(seed="abc"), "seed"),
        (lambda c: c["scheme"].update(family="affine"), "scheme.family"),
        (lambda c: c["scheme"].update(crossover=0.9), "scheme"),
    ],
)
def test_parse_config_reports_field_path(mutate, field):
    raw = _binary_config()
    mutate(raw)
    with pytest.raises(ConfigError) as err:
        parse_config(raw)
    assert err.value.field_path == field
    assert str(err.value).startswith(field)


def test_parse_config_rejects_mismatched_models():
    raw = _binary_config()
    raw["channel"] = {"kind": "awgn", "noise": [1.0, 1.0, 3.0], "power": 1.0}
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_key_count_rounding():
    assert key_count(10, 0.0) == 1
    assert key_count(10, 0.5) == 32
    assert key_count(10, 0.41) == 32  # ceil(4.1) bits
    assert key_count(4, 1.0) == 16
    # tiny float error below an integer boundary must not add a bit
    assert key_count(10, 0.3) == 8


def test_keyed_rng_is_deterministic_and_stream_separated():
    a = KeyedRng(42).derive(1, 7).generator().random(4)
    b = KeyedRng(42).derive(1, 7).generator().random(4)
    c = KeyedRng(42).derive(1, 8).generator().random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_keyed_rng_derive_extends_path():
    base = KeyedRng(5, stream=9)
    assert base.derive(1, 2).path == (1, 2)
    assert base.derive(1).derive(2).path == (1, 2)
    x = base.derive(1, 2).generator().random()
    y = base.derive(1).derive(2).generator().random()
    assert x == y


def test_sample_source_block_shapes_and_dtypes():
    rng = KeyedRng(0)
    bits = sample_source_block(SourceModel.bernoulli_half(), 50, rng)
    assert bits.shape == (50,) and bits.dtype == np.int8
    assert set(np.unique(bits)) <= {0, 1}
    reals = sample_source_block(SourceModel.gaussian(2.0), 50, rng)
    assert reals.shape == (50,) and reals.dtype == np.float64
    vec = sample_source_block(SourceModel.vector_gaussian((1.0, 0.25, 4.0)), 8, rng)
    assert vec.shape == (3, 8)


def test_gaussian_source_variance_scaling():
    rng = KeyedRng(1)
    x = sample_source_block(SourceModel.gaussian(4.0), 200_000, rng)
    assert abs(np.var(x) - 4.0) < 0.1


def test_transmit_bsc_flip_rates():
    channel = BroadcastChannel.bsc(0.0, 0.1, 0.5)
    x = np.zeros(200_000, dtype=np.int8)
    y1, y2, z = transmit(channel, x, KeyedRng(2))
    assert abs(y1.mean() - 0.1) < 5e-3
    assert abs(y2.mean() - 0.5) < 5e-3
    assert z.sum() == 0  # eavesdropper branch is noiseless here


def test_transmit_awgn_noise_power():
    channel = BroadcastChannel.awgn(0.5, 1.0, 3.0, power=1.0)
    x = np.zeros(200_000)
    y1, y2, z = transmit(channel, x, KeyedRng(3))
    assert abs(np.var(y1) - 1.0) < 0.05
    assert abs(np.var(y2) - 3.0) < 0.1
    assert abs(np.var(z) - 0.5) < 0.05


def test_transmit_streams_are_independent_across_outputs():
    channel = BroadcastChannel.awgn(1.0, 1.0, 1.0, power=1.0)
    _, y2, z = transmit(channel, np.zeros(1000), KeyedRng(4))
    assert abs(float(np.corrcoef(y2, z)[0, 1])) < 0.1


def test_distortion_conventions():
    bern = SourceModel.bernoulli_half()
    s = np.array([0, 1, 1, 0], dtype=np.int8)
    est = np.array([0, 1, 0, 0], dtype=np.int8)
    assert distortion(bern, s, est) == 0.25
    gauss = SourceModel.gaussian(1.0)
    assert distortion(gauss, np.array([1.0, 2.0]), np.array([0.0, 0.0])) == 2.5
    with pytest.raises(ValueError):
        distortion(bern, s, est[:2])


def test_empirical_power_sums_across_banks():
    assert empirical_power(np.array([1.0, -1.0, 1.0, -1.0])) == 1.0
    two_banks = np.ones((2, 4))
    assert empirical_power(two_banks) == 2.0


def test_scheme_params_gaussian_scalings():
    source = SourceModel.gaussian(1.0)
    channel = BroadcastChannel.awgn(1.0, 1.0, 3.0, power=1.0)
    params = SchemeParams.gaussian(8, 0.5, 1.0, source, channel)
    assert params.alpha == 1.0
    assert params.betas == (0.5, 0.5, 0.25)
    # encoder scaling hits the power budget exactly in expectation
    assert math.isclose(params.alpha**2 * source.variance, channel.power)


def test_scheme_params_requires_exactly_one_mode():
    with pytest.raises(ValueError):
        SchemeParams(n=4, key_rate=0.5)
    with pytest.raises(ValueError):
        SchemeParams(n=4, key_rate=0.5, crossover=0.1, power=1.0, alpha=1.0, betas=(1, 1, 1))


def test_scheme_params_key_accounting():
    params = SchemeParams.binary(10, 0.5, 0.0)
    assert params.key_bits == 5
    assert params.num_keys == 32
