"""Keyed rotation (orthogonal-matrix) scrambling for Gaussian blocks.

The key indexes a codebook of independent uniformly random orthogonal
matrices, built by Gram-Schmidt on iid standard normal columns (normalising
against positive pivots, which makes the law exactly rotation-invariant).
A scrambled block is uniform on the sphere of its own radius.  The
single-letter sign-change scheme (one key bit flipping the block's sign)
lives here too, as the degenerate one-dimensional rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .models import KeyedRng, SchemeParams, key_count

__all__ = [
    "TOLERANCES",
    "MAX_CODEBOOK_BYTES",
    "GramSchmidtError",
    "CodebookMemoryError",
    "OrthogonalCodebook",
    "HaarReport",
    "gen_orthogonal_codebook",
    "sample_orthogonal",
    "permutation_matrix",
    "encode",
    "decode",
    "sign_change_encode",
    "sign_change_decode",
    "haar_invariance_test",
]

# Centralised numerical tolerances for this module.
TOLERANCES = {
    "orthogonality": 1e-8,   # max |Q^T Q - I| entry
    "isometry": 1e-9,        # relative norm preservation
    "determinant": 1e-6,     # | |det Q| - 1 |, checked up to _DET_CHECK_MAX_N
    "pivot": 1e-12,          # Gram-Schmidt column norm floor
    "p_floor": 1e-3,         # statistical test p-value floor
}

MAX_CODEBOOK_BYTES = 1 << 30
_DET_CHECK_MAX_N = 64
_MAX_RESAMPLE = 100


class GramSchmidtError(RuntimeError):
    """Orthonormalisation failed (degenerate pivots or broken invariants)."""


class CodebookMemoryError(RuntimeError):
    """Requested codebook would exceed the materialisation memory cap."""


def _orthonormalize_batch(mats: np.ndarray):
    """Column-by-column Gram-Schmidt with an immediate second projection pass
    per column.  Returns (Q, ok) where ok flags batch members whose pivots all
    cleared the degeneracy floor."""
    b, n, _ = mats.shape
    q = np.zeros_like(mats)
    ok = np.ones(b, dtype=bool)
    pivot = TOLERANCES["pivot"]
    for j in range(n):
        v = mats[:, :, j].copy()
        if j:
            prior = q[:, :, :j]
            for _ in range(2):
                coeff = np.einsum("bij,bi->bj", prior, v)
                v -= np.einsum("bij,bj->bi", prior, coeff)
        norms = np.linalg.norm(v, axis=1)
        good = norms > pivot
        ok &= good
        safe = np.where(good, norms, 1.0)
        q[:, :, j] = v / safe[:, None]
    return q, ok


def sample_orthogonal(gen: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Draw ``count`` independent uniformly random orthogonal matrices."""
    out = np.empty((count, n, n))
    pending = np.arange(count)
    for _ in range(_MAX_RESAMPLE):
        mats = gen.standard_normal((pending.size, n, n))
        q, ok = _orthonormalize_batch(mats)
        out[pending[ok]] = q[ok]
        pending = pending[~ok]
        if pending.size == 0:
            return out
    raise GramSchmidtError(
        f"degenerate pivots persisted through {_MAX_RESAMPLE} resampling rounds"
    )


def _check_entries(mats: np.ndarray):
    eye = np.eye(mats.shape[-1])
    residual = np.abs(np.einsum("bij,bik->bjk", mats, mats) - eye[None]).max()
    if residual >= TOLERANCES["orthogonality"]:
        raise GramSchmidtError(f"orthogonality residual {residual} out of tolerance")
    if mats.shape[-1] <= _DET_CHECK_MAX_N:
        dets = np.abs(np.abs(np.linalg.det(mats)) - 1.0).max()
        if dets >= TOLERANCES["determinant"]:
            raise GramSchmidtError(f"determinant residual {dets} out of tolerance")


@dataclass(frozen=True)
class OrthogonalCodebook:
    """Key-indexed orthogonal matrices, one bank per source component.

    ``banks`` has shape (banks, keys, n, n).  Decoding uses the transpose, so
    no inverses are stored.
    """

    banks: np.ndarray

    def __post_init__(self):
        if self.banks.ndim != 4 or self.banks.shape[-1] != self.banks.shape[-2]:
            raise ValueError("banks must have shape (banks, keys, n, n)")

    @property
    def num_banks(self) -> int:
        return self.banks.shape[0]

    @property
    def num_keys(self) -> int:
        return self.banks.shape[1]

    @property
    def n(self) -> int:
        return self.banks.shape[-1]

    def entry(self, key: int, bank: int = 0) -> np.ndarray:
        if not 0 <= key < self.num_keys:
            raise KeyError(f"key {key} out of range [0, {self.num_keys})")
        return self.banks[bank, key]


def gen_orthogonal_codebook(
    n: int,
    key_rate: float,
    rng: KeyedRng,
    banks: int = 1,
    max_bytes: int = MAX_CODEBOOK_BYTES,
) -> OrthogonalCodebook:
    """Materialise the keyed rotation codebook, failing fast on memory.

    The size check happens before any sampling; construction also verifies
    the orthogonality (and, for small n, determinant) invariants on every
    entry.
    """
    num = key_count(n, key_rate)
    needed = banks * num * n * n * 8
    if needed > max_bytes:
        raise CodebookMemoryError(
            f"codebook of {banks}x{num} matrices of size {n} needs {needed} bytes, "
            f"cap is {max_bytes}"
        )
    gen = rng.generator()
    stacked = np.stack([sample_orthogonal(gen, num, n) for _ in range(banks)])
    _check_entries(stacked.reshape(-1, n, n))
    return OrthogonalCodebook(banks=stacked)


def permutation_matrix(perm) -> np.ndarray:
    """Orthogonal embedding of a permutation: row t picks out entry perm[t]."""
    perm = np.asarray(perm)
    n = perm.shape[0]
    mat = np.zeros((n, n))
    mat[np.arange(n), perm] = 1.0
    return mat


def encode(
    block: np.ndarray,
    key: int,
    codebook: OrthogonalCodebook,
    params: SchemeParams,
) -> np.ndarray:
    """Rotate by the keyed matrix and scale to the spent power."""
    block = np.asarray(block, dtype=float)
    if params.alphas is not None:
        if block.ndim != 2 or block.shape[0] != codebook.num_banks:
            raise ValueError("vector block shape must be (banks, n)")
        return np.stack(
            [
                params.alphas[j] * (codebook.entry(key, j) @ block[j])
                for j in range(codebook.num_banks)
            ]
        )
    if params.alpha is None:
        raise ValueError("params carry no scalar gain")
    return params.alpha * (codebook.entry(key) @ block)


def decode(
    received: np.ndarray,
    key: int,
    codebook: OrthogonalCodebook,
    params: SchemeParams,
    receiver: int = 1,
) -> np.ndarray:
    """Linear estimate then inverse rotation (transpose of the keyed matrix)."""
    received = np.asarray(received, dtype=float)
    if params.beta_banks is not None:
        if received.ndim != 2 or received.shape[0] != codebook.num_banks:
            raise ValueError("vector block shape must be (banks, n)")
        coefs = params.beta_banks[receiver]
        return np.stack(
            [
                coefs[j] * (codebook.entry(key, j).T @ received[j])
                for j in range(codebook.num_banks)
            ]
        )
    if params.betas is None:
        raise ValueError("params carry no estimator coefficients")
    return params.betas[receiver] * (codebook.entry(key).T @ received)


def sign_change_encode(block: np.ndarray, key_bit: int, params: SchemeParams) -> np.ndarray:
    """One-bit-key scheme: transmit the scaled block with a key-chosen sign."""
    if key_bit not in (0, 1):
        raise ValueError(f"key bit must be 0 or 1, got {key_bit}")
    if params.alpha is None:
        raise ValueError("params carry no scalar gain")
    sign = 1.0 if key_bit else -1.0
    return params.alpha * sign * np.asarray(block, dtype=float)


def sign_change_decode(
    received: np.ndarray, key_bit: int, params: SchemeParams, receiver: int = 1
) -> np.ndarray:
    if key_bit not in (0, 1):
        raise ValueError(f"key bit must be 0 or 1, got {key_bit}")
    if params.betas is None:
        raise ValueError("params carry no estimator coefficients")
    sign = 1.0 if key_bit else -1.0
    return params.betas[receiver] * sign * np.asarray(received, dtype=float)


# ---------------------------------------------------------------------------
# Distributional diagnostics


@dataclass(frozen=True)
class HaarReport:
    """Rotation-invariance diagnostics for the sampled matrix law.

    All statistical verdicts use the shared p-value floor; the image used is
    the first column (the rotation of a fixed unit vector), which is uniform
    on the sphere exactly when the law is rotation invariant.
    """

    n: int
    samples: int
    max_abs_mean: float
    mean_tol: float
    max_moment_dev: float
    moment_tol: float
    ks_p: float
    angular_p: float | None
    orthogonality_residual: float
    isometry_residual: float

    @property
    def means_ok(self) -> bool:
        return self.max_abs_mean <= self.mean_tol

    @property
    def moments_ok(self) -> bool:
        return self.max_moment_dev <= self.moment_tol

    @property
    def ks_ok(self) -> bool:
        return self.ks_p > TOLERANCES["p_floor"]

    @property
    def angular_ok(self) -> bool:
        return self.angular_p is None or self.angular_p > TOLERANCES["p_floor"]

    @property
    def orthogonality_ok(self) -> bool:
        return self.orthogonality_residual < TOLERANCES["orthogonality"]

    @property
    def isometry_ok(self) -> bool:
        return self.isometry_residual < TOLERANCES["isometry"]

    @property
    def passed(self) -> bool:
        return (
            self.means_ok
            and self.moments_ok
            and self.ks_ok
            and self.angular_ok
            and self.orthogonality_ok
            and self.isometry_ok
        )


def haar_invariance_test(
    n: int,
    samples: int,
    rng: KeyedRng,
    chunk: int = 4096,
    sampler=None,
) -> HaarReport:
    """Sample keyed rotations and test the sphere-uniformity consequences.

    Checks per-coordinate means (zero) and second moments (1/n) of a rotated
    unit vector, agreement of two fixed one-dimensional projections
    (two-sample KS on independent halves), the n = 2 angular histogram, and
    the orthogonality/isometry residuals of the sampled matrices.  ``sampler``
    may replace the matrix source (for negative controls); it receives
    ``(generator, count, n)``.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if samples < 100:
        raise ValueError(f"need at least 100 samples, got {samples}")
    gen = rng.generator()
    draw = sampler if sampler is not None else sample_orthogonal

    images = np.empty((samples, n))
    diag_proj = np.empty(samples)
    residual = 0.0
    done = 0
    eye = np.eye(n)
    ones = np.full(n, 1.0 / math.sqrt(n))
    while done < samples:
        take = min(chunk, samples - done)
        mats = draw(gen, take, n)
        residual = max(
            residual,
            float(np.abs(np.einsum("bij,bik->bjk", mats, mats) - eye[None]).max()),
        )
        images[done : done + take] = mats[:, :, 0]
        diag_proj[done : done + take] = mats[:, :, 0] @ ones
        done += take

    means = images.mean(axis=0)
    mean_tol = 5.0 / math.sqrt(n * samples)
    moments = (images**2).mean(axis=0)
    moment_sd = math.sqrt((2.0 * n - 2.0) / (n * n * (n + 2.0)))
    moment_tol = 5.0 * moment_sd / math.sqrt(samples)

    half = samples // 2
    ks = stats.ks_2samp(images[:half, 0], diag_proj[half:])

    angular_p = None
    if n == 2:
        theta = np.mod(np.arctan2(images[:, 1], images[:, 0]), 2.0 * math.pi)
        hist, _ = np.histogram(theta, bins=32, range=(0.0, 2.0 * math.pi))
        angular_p = float(stats.chisquare(hist).pvalue)

    probe_gen = rng.derive(1).generator()
    probe = probe_gen.standard_normal(n)
    mat = draw(probe_gen, 1, n)[0]
    isometry_residual = abs(
        float(np.linalg.norm(mat @ probe) / np.linalg.norm(probe)) - 1.0
    )

    return HaarReport(
        n=n,
        samples=samples,
        max_abs_mean=float(np.abs(means).max()),
        mean_tol=mean_tol,
        max_moment_dev=float(np.abs(moments - 1.0 / n).max()),
        moment_tol=moment_tol,
        ks_p=float(ks.pvalue),
        angular_p=angular_p,
        orthogonality_residual=residual,
        isometry_residual=isometry_residual,
    )
