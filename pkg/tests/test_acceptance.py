"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints a single PASS/FAIL line with the measured numbers, then
asserts.  Oracles are computed inline (closed forms, ``math.comb``
enumeration, brute-force counting) rather than through the code under test
wherever the guarantee is about agreement with an independent route.
"""

import math

import numpy as np
import pytest
from scipy import stats

from ciphercast import adversary, harness, permute_codec, rd_analysis, regions
from ciphercast.models import (
    BroadcastChannel,
    KeyedRng,
    SchemeParams,
    SourceModel,
)
from ciphercast.ortho_codec import haar_invariance_test, sample_orthogonal
from ciphercast.rd_analysis import binary_convolve, binary_entropy


def _report(num: int, ok: bool, detail: str):
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, detail


def _simulate(scenario, source, channel, scheme, n, trials, key_rate, seed):
    cfg = {
        "scenario_id": scenario,
        "source": source,
        "channel": channel,
        "scheme": scheme,
        "n_list": [n],
        "trials": trials,
        "key_rate": key_rate,
        "seed": seed,
    }
    return harness.run_simulation_for_n(harness.parse_experiment(cfg), n)


def test_criterion_01_binary_receiver_distortion():
    summary = _simulate(
        "accept-bin",
        {"kind": "bernoulli", "q": 0.5},
        {"kind": "bsc", "crossovers": [0.15, 0.1, 0.2]},
        {"family": "permutation", "crossover": 0.05},
        n=10_000,
        trials=100,
        key_rate=0.5,
        seed=42,
    )
    t1 = binary_convolve(0.05, 0.1)
    t2 = binary_convolve(0.05, 0.2)
    assert (t1, t2) == (0.14, 0.23)
    ok = abs(summary.mean_d1 - t1) <= 0.01 and abs(summary.mean_d2 - t2) <= 0.01
    _report(
        1,
        ok,
        f"mean d=({summary.mean_d1:.4f}, {summary.mean_d2:.4f}) vs ({t1}, {t2}) ±0.01",
    )


def test_criterion_02_gaussian_receiver_distortion_and_power():
    summary = _simulate(
        "accept-gauss",
        {"kind": "gaussian", "variance": 1.0},
        {"kind": "awgn", "noise": [1.0, 1.0, 3.0], "power": 1.0},
        {"family": "orthogonal", "power": 1.0},
        n=512,
        trials=200,
        key_rate=4.0 / 512,
        seed=43,
    )
    t1 = 1.0 * 1.0 / (1.0 + 1.0)
    t2 = 1.0 * 3.0 / (1.0 + 3.0)
    ok = (
        abs(summary.mean_d1 - t1) <= 0.03
        and abs(summary.mean_d2 - t2) <= 0.03
        and abs(summary.mean_power - 1.0) <= 0.05
    )
    _report(
        2,
        ok,
        f"mse=({summary.mean_d1:.4f}, {summary.mean_d2:.4f}) vs ({t1}, {t2}) ±0.03,"
        f" power={summary.mean_power:.4f} vs 1 ±0.05",
    )


def test_criterion_03_key_rate_does_not_move_the_statistics():
    def samples(source, channel, scheme, n, key_rate, seed):
        s = _simulate("indiff", source, channel, scheme, n, 200, key_rate, seed)
        return [r.d1 for r in s.records], [r.d2 for r in s.records]

    ps = []
    b0 = samples(
        {"kind": "bernoulli", "q": 0.5},
        {"kind": "bsc", "crossovers": [0.15, 0.1, 0.2]},
        {"family": "permutation", "crossover": 0.05},
        500, 0.0, 101,
    )
    b4 = samples(
        {"kind": "bernoulli", "q": 0.5},
        {"kind": "bsc", "crossovers": [0.15, 0.1, 0.2]},
        {"family": "permutation", "crossover": 0.05},
        500, 4.0 / 500, 102,
    )
    g0 = samples(
        {"kind": "gaussian", "variance": 1.0},
        {"kind": "awgn", "noise": [1.0, 1.0, 3.0], "power": 1.0},
        {"family": "orthogonal", "power": 1.0},
        128, 0.0, 105,
    )
    g4 = samples(
        {"kind": "gaussian", "variance": 1.0},
        {"kind": "awgn", "noise": [1.0, 1.0, 3.0], "power": 1.0},
        {"family": "orthogonal", "power": 1.0},
        128, 4.0 / 128, 106,
    )
    for keyless, keyed in ((b0, b4), (g0, g4)):
        for i in range(2):
            ps.append(float(stats.ks_2samp(keyless[i], keyed[i]).pvalue))
    ok = all(p > 0.01 for p in ps)
    _report(3, ok, "two-sample KS p-values " + ", ".join(f"{p:.3f}" for p in ps))


def test_criterion_04_type_exactness_and_class_counts():
    gen = np.random.default_rng(44)
    blocks = gen.integers(0, 2, size=(1_000_000, 16), dtype=np.int8)
    perms = np.argsort(gen.random(blocks.shape), axis=1)
    permuted = np.take_along_axis(blocks, perms, axis=1)
    invariant = bool(
        np.array_equal(np.sort(permuted, axis=1), np.sort(blocks, axis=1))
    )
    for row, perm in zip(blocks[:200], perms[:200]):
        assert np.array_equal(
            permute_codec.apply_permutation(perm, row), row[perm]
        )

    counts_ok = True
    for n in range(1, 13):
        buckets = np.bincount(
            [bin(v).count("1") for v in range(1 << n)], minlength=n + 1
        )
        for k in range(n + 1):
            block = np.array([1] * k + [0] * (n - k), dtype=np.int8)
            size = permute_codec.type_class_size(permute_codec.type_of(block))
            if size.exact != int(buckets[k]) or size.exact != math.comb(n, k):
                counts_ok = False
    ok = invariant and counts_ok
    _report(
        4,
        ok,
        f"type invariance on 10^6 pairs: {invariant}; "
        f"class counts vs enumeration n<=12: {counts_ok}",
    )


def test_criterion_05_scramble_uniformity_over_the_class():
    block = np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)
    report = permute_codec.uniformity_test(block, samples=1_000_000, rng=KeyedRng(5))
    ok = report.p_value > 1e-3 and report.dof == 19
    _report(5, ok, f"chi-square p={report.p_value:.4f} over 20-member class")


def test_criterion_06_rotation_sampler_suite():
    worst = 0.0
    for n in (2, 16, 64, 512):
        gen = KeyedRng(6, stream=n).generator()
        for mat in sample_orthogonal(gen, 4 if n <= 64 else 2, n):
            worst = max(worst, float(np.abs(mat.T @ mat - np.eye(n)).max()))
    rep2 = haar_invariance_test(2, 100_000, KeyedRng(61))
    rep16 = haar_invariance_test(16, 100_000, KeyedRng(62))
    ok = (
        worst < 1e-8
        and rep2.passed
        and rep2.angular_p > 1e-3
        and rep16.passed
        and rep16.max_moment_dev <= 3e-3
    )
    _report(
        6,
        ok,
        f"residual {worst:.2e}; n=2 angular p={rep2.angular_p:.4f};"
        f" n=16 moment dev {rep16.max_moment_dev:.2e} <= 3e-3",
    )


def test_criterion_07_rate_distortion_oracles():
    src = rd_analysis.DiscreteDistribution(np.array([0.5, 0.5]))
    dmat = rd_analysis.hamming_matrix(2)
    ba_worst = 0.0
    for d in np.linspace(0.01, 0.49, 50):
        point = rd_analysis.blahut_arimoto_rd(src, dmat, float(d))
        ba_worst = max(ba_worst, abs(point.rate_bits - (1.0 - binary_entropy(float(d)))))

    q = 0.2
    joint = np.array([[(1 - q) / 2, q / 2], [q / 2, (1 - q) / 2]])
    cond_worst = 0.0
    for d in np.linspace(0.01, 0.19, 10):
        point = rd_analysis.conditional_rd(joint, dmat, float(d))
        cond_worst = max(
            cond_worst,
            abs(point.rate_bits - (binary_entropy(q) - binary_entropy(float(d)))),
        )

    tilted = rd_analysis.dtilted_information(src, dmat, 0.15)
    rate = rd_analysis.blahut_arimoto_rd(src, dmat, 0.15).rate_bits
    tilt_err = abs(float(tilted @ src.vector) - rate)
    ct = rd_analysis.conditional_dtilted(joint, dmat, 0.1)
    tilt_err = max(tilt_err, abs(float((ct.table * joint).sum()) - ct.rate_bits))

    ok = ba_worst <= 1e-4 and cond_worst <= 1e-4 and tilt_err <= 1e-3
    _report(
        7,
        ok,
        f"BA grid err {ba_worst:.1e} <= 1e-4; conditional err {cond_worst:.1e} <= 1e-4;"
        f" tilted-mean err {tilt_err:.1e} <= 1e-3",
    )


def test_criterion_08_reverse_water_filling():
    lams = (1.0, 0.25)
    quiet = BroadcastChannel.vector_awgn(
        [[1e-9, 1e-9], [1e-9, 1e-9], [1e-9, 1e-9]], power=1.0
    )
    point = regions.RegionPoint(key_rate=0.2, list_rate=0.0, d0=0.5, d1=2.0, d2=2.0)
    verdict = regions.vector_gaussian_inner(point, (0.5, 0.5), lams, quiet)
    mu = verdict.details["mu"]
    mu_budget_err = abs(sum(min(mu, lam) for lam in lams) - 0.5)
    keyless_err = abs(verdict.details["cap_keyless"] - 1.0)

    noisy = BroadcastChannel.vector_awgn(
        [[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]], power=1.0
    )
    point2 = regions.RegionPoint(key_rate=0.2, list_rate=0.0, d0=0.3, d1=2.0, d2=2.0)
    verdict2 = regions.vector_gaussian_inner(point2, (0.5, 0.5), lams, noisy)
    theta = verdict2.details["theta"]
    residuals = [lam * 1.0 / (0.5 + 1.0) for lam in lams]
    theta_budget_err = abs(sum(min(theta, r) for r in residuals) - 0.3)

    single = BroadcastChannel.vector_awgn([[0.4], [0.6], [0.9]], power=0.7)
    scalar = BroadcastChannel.awgn(0.4, 0.6, 0.9, power=0.7)
    pt = regions.RegionPoint(key_rate=0.3, list_rate=0.1, d0=0.25, d1=0.5, d2=0.6)
    vec = regions.vector_gaussian_inner(pt, (0.7,), (0.8,), single)
    sca = regions.gaussian_inner(pt, 0.7, 0.8, scalar)
    reduction_err = max(
        abs(vec.cap - sca.cap),
        abs(vec.details["d1_floor"] - sca.details["d1_floor"]),
        abs(vec.details["d2_floor"] - sca.details["d2_floor"]),
    )

    ok = (
        mu_budget_err <= 1e-10
        and keyless_err <= 1e-12
        and theta_budget_err <= 1e-10
        and reduction_err <= 1e-12
    )
    _report(
        8,
        ok,
        f"mu budget err {mu_budget_err:.1e}; R_S err {keyless_err:.1e};"
        f" theta budget err {theta_budget_err:.1e}; m=1 reduction err {reduction_err:.1e}",
    )


def test_criterion_09_inner_outer_consistency_grid():
    gen = np.random.default_rng(2024)
    violations = 0
    fires = {"binary": 0, "gaussian": 0}
    coincide_failures = 0

    def check(report):
        nonlocal coincide_failures
        if report.optimal and (
            not report.caps_coincide
            or abs(report.inner_cap - report.outer_cap) > 1e-9
        ):
            coincide_failures += 1

    for _ in range(2500):
        chan = BroadcastChannel.bsc(*(float(v) for v in gen.uniform(0.01, 0.49, 3)))
        point = regions.RegionPoint(
            key_rate=float(gen.uniform(0, 1.5)),
            list_rate=float(gen.uniform(0, 1.2)),
            d0=float(gen.uniform(0, 1)),
            d1=float(gen.uniform(0, 1)),
            d2=float(gen.uniform(0, 1)),
        )
        crossover = float(gen.uniform(0, 0.5))
        if (
            regions.binary_inner(point, crossover, chan).member
            and not regions.binary_outer(point, chan).member
        ):
            violations += 1
        report = regions.binary_optimality(point, chan)
        if report.optimal:
            fires["binary"] += 1
            check(report)

    for _ in range(1250):  # ordered so the clean-eavesdropper branch can fire
        p0 = float(gen.uniform(0.01, 0.2))
        p1 = min(0.49, p0 + float(gen.uniform(0, 0.15)))
        p2 = min(0.49, p0 + float(gen.uniform(0, 0.15)))
        chan = BroadcastChannel.bsc(p0, p1, p2)
        d1 = min(0.5, p1 + float(gen.uniform(0, 0.2)))
        d2 = min(0.5, p2 + float(gen.uniform(0, 0.2)))
        d0 = min(0.5, max(d1, d2) + float(gen.uniform(0, 0.1)))
        point = regions.RegionPoint(
            key_rate=float(gen.uniform(0.05, 1.0)), list_rate=0.0, d0=d0, d1=d1, d2=d2
        )
        report = regions.binary_optimality(point, chan)
        if report.optimal:
            fires["binary"] += 1
            check(report)

    for _ in range(1250):  # receivers pinned to their floors, noisy eavesdropper
        p1 = float(gen.uniform(0.01, 0.3))
        p2 = float(gen.uniform(0.01, 0.3))
        p0 = min(0.49, max(p1, p2) + float(gen.uniform(0, 0.15)))
        chan = BroadcastChannel.bsc(p0, p1, p2)
        i = int(gen.integers(1, 3))
        pinned = (p1, p2)[i - 1]
        d0 = float(gen.uniform(0.005, pinned))
        d1 = p1 if i == 1 else min(0.5, p1 + float(gen.uniform(0, 0.2)))
        d2 = p2 if i == 2 else min(0.5, p2 + float(gen.uniform(0, 0.2)))
        point = regions.RegionPoint(
            key_rate=float(gen.uniform(0.05, 1.0)), list_rate=0.0, d0=d0, d1=d1, d2=d2
        )
        report = regions.binary_optimality(point, chan)
        if report.optimal:
            fires["binary"] += 1
            check(report)

    for _ in range(2500):
        lam = float(gen.uniform(0.2, 2.0))
        power = float(gen.uniform(0.1, 2.0))
        chan = BroadcastChannel.awgn(
            *(float(v) for v in gen.uniform(0.0, 3.0, 3)), power=power
        )
        spent = float(gen.uniform(0, power))
        point = regions.RegionPoint(
            key_rate=float(gen.uniform(0, 1.5)),
            list_rate=float(gen.uniform(0, 1.2)),
            d0=float(gen.uniform(0.01, 2 * lam)),
            d1=float(gen.uniform(0.01, 2 * lam)),
            d2=float(gen.uniform(0.01, 2 * lam)),
        )
        if (
            regions.gaussian_inner(point, spent, lam, chan).member
            and not regions.gaussian_outer(point, lam, chan).member
        ):
            violations += 1
        report = regions.gaussian_optimality(point, lam, chan)
        if report.optimal:
            fires["gaussian"] += 1
            check(report)

    for _ in range(1250):  # quiet eavesdropper, distortions above both receivers
        lam = float(gen.uniform(0.2, 2.0))
        power = float(gen.uniform(0.1, 2.0))
        n0 = float(gen.uniform(0.0, 1.5))
        n1 = n0 + float(gen.uniform(0, 1.5))
        n2 = n0 + float(gen.uniform(0, 1.5))
        chan = BroadcastChannel.awgn(n0, n1, n2, power=power)
        d1 = lam * n1 / (power + n1) + float(gen.uniform(0, lam))
        d2 = lam * n2 / (power + n2) + float(gen.uniform(0, lam))
        d0 = max(d1, d2) + float(gen.uniform(0, lam))
        point = regions.RegionPoint(
            key_rate=float(gen.uniform(0.05, 1.0)), list_rate=0.0, d0=d0, d1=d1, d2=d2
        )
        report = regions.gaussian_optimality(point, lam, chan)
        if report.optimal:
            fires["gaussian"] += 1
            check(report)

    for _ in range(1250):  # noisy eavesdropper, one receiver at its floor
        lam = float(gen.uniform(0.2, 2.0))
        power = float(gen.uniform(0.1, 2.0))
        n1 = float(gen.uniform(0.01, 1.5))
        n2 = float(gen.uniform(0.01, 1.5))
        n0 = max(n1, n2) + float(gen.uniform(0, 1.5))
        chan = BroadcastChannel.awgn(n0, n1, n2, power=power)
        i = int(gen.integers(1, 3))
        f1 = lam * n1 / (power + n1)
        f2 = lam * n2 / (power + n2)
        d1 = f1 if i == 1 else f1 + float(gen.uniform(0, lam))
        d2 = f2 if i == 2 else f2 + float(gen.uniform(0, lam))
        d0 = max(1e-6, float(gen.uniform(0.2, 1.0)) * (d1, d2)[i - 1])
        point = regions.RegionPoint(
            key_rate=float(gen.uniform(0.05, 1.0)), list_rate=0.0, d0=d0, d1=d1, d2=d2
        )
        report = regions.gaussian_optimality(point, lam, chan)
        if report.optimal:
            fires["gaussian"] += 1
            check(report)

    ok = (
        violations == 0
        and coincide_failures == 0
        and fires["binary"] >= 1000
        and fires["gaussian"] >= 1000
    )
    _report(
        9,
        ok,
        f"10^4 points: inner-without-outer {violations}; matching fired"
        f" {fires['binary']}+{fires['gaussian']} times, cap mismatches {coincide_failures}",
    )


def test_criterion_10_sign_change_never_beats_block_rotations():
    curve = regions.fig5_curves()
    cols = {name: np.array(vals) for name, vals in zip(curve.columns, zip(*curve.rows))}
    cap_gap = cols["proposed_cap"] - cols["sign_cap"]
    keyed_gap = cols["proposed_keyed"] - cols["sign_keyed"]
    interior = (cols["d0"] > 0) & (cols["d0"] < 1.0)
    dominated = bool((cap_gap >= -1e-12).all())
    strict = bool((keyed_gap[interior] > 0).all())

    # junction of the grid's noiseless eavesdropper sits at d0 = 0
    at_zero = regions.sign_change_upper(1.0, 1.0, 0.0, 0.0)
    junction_err = abs(at_zero.keyed_bound - 1.0)
    # positive-noise junction: both branch formulas meet at the same value
    cap = regions.sign_change_upper(1.0, 1.0, 1.0, 0.5)
    timeshare = (1.0 - 0.5) * (1.0 + 1.0) / (1.0 * 1.0)
    key_plus_noise = 1.0 + 0.5 * math.log2(1.0 * 1.0 / (0.5 * (1.0 + 1.0)))
    junction_err = max(
        junction_err,
        abs(cap.keyed_bound - 1.0),
        abs(timeshare - 1.0),
        abs(key_plus_noise - 1.0),
    )

    ok = dominated and strict and junction_err <= 1e-12
    _report(
        10,
        ok,
        f"cap dominated everywhere: {dominated}; strict single-letter gap on"
        f" (0, 1): {strict}; junction value err {junction_err:.1e}",
    )


def test_criterion_11_exhaustive_list_attack_ground_truth():
    inst4 = adversary.BinaryScrambleInstance.with_full_key(4, flip=0.3)
    exact = {}
    for d0 in (0.0, 0.25, 0.5):
        for rate in (0.0, 0.25, 0.5, 0.75):
            exact[(d0, rate)] = adversary.exhaustive_henchman(inst4, d0, rate).success
    rate_steps = [(0.0, 0.25), (0.25, 0.5), (0.5, 0.75)]
    d0_steps = [(0.0, 0.25), (0.25, 0.5)]
    monotone = all(
        exact[(d, a)] <= exact[(d, b)] + 1e-12
        for d in (0.0, 0.25, 0.5)
        for a, b in rate_steps
    ) and all(
        exact[(a, r)] <= exact[(b, r)] + 1e-12
        for r in (0.0, 0.25, 0.5, 0.75)
        for a, b in d0_steps
    )

    contained = []
    for inst, d0, rate, seed in (
        (inst4, 0.25, 0.25, 2311),
        (adversary.BinaryScrambleInstance.with_full_key(3, flip=0.2), 0.0, 1 / 3, 2312),
    ):
        best = adversary.exhaustive_henchman(inst, d0, rate)
        mc = adversary.simulate_henchman_code(
            inst, best.code, d0, 100_000, KeyedRng(seed)
        )
        contained.append(
            mc.ci_low - 1e-12 <= best.success <= mc.ci_high + 1e-12
        )
    ok = monotone and all(contained)
    _report(
        11,
        ok,
        f"success monotone in list size and budget: {monotone};"
        f" Monte Carlo CI contains the exact optimum: {contained}",
    )


def test_criterion_12_list_rate_threshold():
    n = 10_000
    d0 = 0.05
    params = SchemeParams.binary(n, 0.5, 0.0)
    source = SourceModel.bernoulli(0.5)
    channel = BroadcastChannel.bsc(0.1, 0.1, 0.2)
    cap = regions.binary_inner(
        regions.RegionPoint(key_rate=0.5, list_rate=0.0, d0=d0, d1=1.0, d2=1.0),
        0.0,
        channel,
    ).cap
    results = {}
    for label, rate, seeds in (
        ("below", cap - 0.15, (8, 10)),
        ("above", cap + 0.15, (9, 11)),
    ):
        ks = adversary.keysearch_attack(
            source, channel, params, d0, 60, KeyedRng(seeds[0]), list_rate=rate
        )
        ig = adversary.ignorez_attack(
            source, n, d0, 60, KeyedRng(seeds[1]), list_rate=rate
        )
        results[label] = (ks.success, ig.success)
    below_ok = all(s < 0.1 for s in results["below"])
    above_ok = any(s > 0.9 for s in results["above"])
    ok = below_ok and above_ok
    _report(
        12,
        ok,
        f"cap {cap:.4f}: success below (keysearch, ignorez)={results['below']},"
        f" above={results['above']}",
    )


def test_criterion_13_ball_mass_exponent_floor():
    target = 0.11
    rate = 1.0 - binary_entropy(target)
    margin = math.inf
    for n in range(10, 21):
        radius = math.floor(n * target)
        mass = sum(math.comb(n, k) for k in range(radius + 1)) / 2**n
        exponent = -math.log2(mass) / n
        floor = rate - (2.0 / n) * math.log2(n + 1)
        margin = min(margin, exponent - floor)
    ok = margin >= 0.0
    _report(13, ok, f"worst exponent margin over n=10..20: {margin:.4f} >= 0")


def test_criterion_14_spherical_cap_asymptotics():
    ratio = adversary.spherical_cap_ratio(200, math.pi / 4)
    rel_gap = abs(ratio.asymptotic - ratio.exact) / ratio.exact
    hemisphere = adversary.spherical_cap_ratio(200, math.pi / 2).exact
    ok = rel_gap < 0.02 and abs(hemisphere - 0.5) <= 1e-15
    _report(
        14,
        ok,
        f"n=200 theta=pi/4 relative gap {rel_gap:.4f} < 0.02;"
        f" hemisphere mass {hemisphere}",
    )
