import numpy as np
import pytest

from ciphercast.models import BroadcastChannel, KeyedRng, SchemeParams, SourceModel
from ciphercast.ortho_codec import (
    TOLERANCES,
    CodebookMemoryError,
    decode,
    encode,
    gen_orthogonal_codebook,
    haar_invariance_test,
    permutation_matrix,
    sample_orthogonal,
    sign_change_decode,
    sign_change_encode,
)
from ciphercast.permute_codec import apply_permutation


@pytest.mark.parametrize("n", [1, 2, 5, 32, 128])
def test_sampled_matrices_are_orthogonal(n):
    mats = sample_orthogonal(KeyedRng(1, path=(n,)).generator(), 3, n)
    eye = np.eye(n)
    for q in mats:
        assert np.max(np.abs(q.T @ q - eye)) < TOLERANCES["orthogonality"]
        assert abs(abs(np.linalg.det(q)) - 1.0) < TOLERANCES["determinant"]


def test_sampled_matrices_preserve_length():
    gen = KeyedRng(2).generator()
    q = sample_orthogonal(gen, 1, 64)[0]
    v = gen.standard_normal(64)
    assert abs(np.linalg.norm(q @ v) - np.linalg.norm(v)) < 1e-9 * np.linalg.norm(v)


def test_permutation_matrix_matches_index_form():
    gen = KeyedRng(3).generator()
    perm = gen.permutation(7)
    block = gen.standard_normal(7)
    assert np.allclose(permutation_matrix(perm) @ block, apply_permutation(perm, block))


def _scalar_setup(n=16, key_rate=0.25):
    source = SourceModel.gaussian(1.0)
    channel = BroadcastChannel.awgn(1.0, 0.5, 2.0, power=1.0)
    params = SchemeParams.gaussian(n, key_rate, 1.0, source, channel)
    book = gen_orthogonal_codebook(n, key_rate, KeyedRng(4))
    return params, book


def test_encode_decode_inverts_rotation():
    params, book = _scalar_setup()
    gen = KeyedRng(5).generator()
    block = gen.standard_normal(16)
    for key in (0, 3, 15):
        x = encode(block, key, book, params)
        # undo the receiver gain: decode applies beta_r after the inverse
        restored = decode(x, key, book, params, receiver=1) / (params.alpha * params.betas[1])
        assert np.allclose(restored, block)


def test_encode_hits_power_budget_in_expectation():
    params, book = _scalar_setup(n=512, key_rate=0.0)
    block = KeyedRng(6).generator().standard_normal(512)
    x = encode(block, 0, book, params)
    assert abs(float(x @ x) / 512 - 1.0) < 0.1


def test_codebook_refuses_oversize_allocation():
    with pytest.raises(CodebookMemoryError):
        gen_orthogonal_codebook(256, 1.0, KeyedRng(7), max_bytes=1 << 20)


def test_sign_change_roundtrip():
    source = SourceModel.gaussian(1.0)
    channel = BroadcastChannel.awgn(1.0, 1.0, 1.0, power=1.0)
    params = SchemeParams.gaussian(1, 1.0, 1.0, source, channel)
    block = np.array([1.7])
    for bit in (0, 1):
        x = sign_change_encode(block, bit, params)
        restored = sign_change_decode(x, bit, params) / (params.alpha * params.betas[1])
        assert np.allclose(restored, block)
    # opposite key bits disagree in sign
    assert np.allclose(
        sign_change_encode(block, 0, params), -sign_change_encode(block, 1, params)
    )


class TestHaarInvariance:
    """The sampled rotations should be statistically indistinguishable from
    the rotation-invariant law; a deliberately broken sampler must not be."""

    def test_suite_passes_at_moderate_size(self):
        report = haar_invariance_test(16, samples=20_000, rng=KeyedRng(8))
        assert report.means_ok
        assert report.moments_ok
        assert report.ks_ok
        assert report.orthogonality_ok
        assert report.isometry_ok
        assert report.passed

    def test_planar_angles_are_uniform(self):
        report = haar_invariance_test(2, samples=40_000, rng=KeyedRng(9))
        assert report.angular_p > TOLERANCES["p_floor"]
        assert report.passed

    def test_half_space_sampler_is_rejected(self):
        def lopsided(gen, count, n):
            mats = sample_orthogonal(gen, count, n)
            mats[:, :, 0] = np.abs(mats[:, :, 0])
            return mats

        report = haar_invariance_test(8, samples=20_000, rng=KeyedRng(10), sampler=lopsided)
        assert not report.passed
        assert report.max_abs_mean > report.mean_tol
