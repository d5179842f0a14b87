"""Acceptance checks; each test prints one pass/fail line per criterion."""
import time

import numpy as np
from conftest import random_cloud
from oracles import exhaustive_min_volume, reduction_diagrams

from zerotopo.bench import BenchScenario, power_bench, reconstruction_bench
from zerotopo.pipeline import AnalysisConfig, analyze, volume_for
from zerotopo.reconstruct import reconstruct_signal
from zerotopo.signal import (
    ZERO_DENSITY_COMPLEX,
    NoiseModel,
    find_zeros,
    mix_at_snr,
    qrf,
    spectrogram,
    stft,
    synth,
    white_noise,
    zero_density,
)
from zerotopo.stats import (
    STAT_KINDS,
    AlphaSchedule,
    FwerScenario,
    NoiseReference,
    StatisticVector,
    apf,
    apf_envelope_test,
    build_noise_references,
    fwer_harness,
    mask_energy,
    p_values,
    sequential_hole_count,
    simultaneous_test,
)
from zerotopo.tda import (
    alpha_filtration,
    build_persistence_tree,
    diagram_h0,
    diagram_h1,
    minimum_volume,
    rasterize_volume,
    stable_volume,
)

ALPHA = 0.05


def _bd(pairs):
    return sorted((p.birth, p.death) for p in pairs)


def _overlap(a, b):
    return a["ci_high"] >= b["ci_low"] and b["ci_high"] >= a["ci_low"]


def test_persistence_matches_reduction(verdict):
    bad, elapsed = 0, 0.0
    for seed in range(1000, 1200):
        pts = random_cloud(seed)
        t0 = time.perf_counter()
        filt = alpha_filtration(pts)
        tree = build_persistence_tree(filt)
        h0, h1 = diagram_h0(filt), diagram_h1(tree)
        elapsed += time.perf_counter() - t0
        ref = reduction_diagrams(list(filt.entries()))
        bad += _bd(h0) != sorted(ref[0]) or _bd(h1) != sorted(ref[1])
    ok = bad == 0 and elapsed < 60
    verdict(1, ok, f"200 clouds, {bad} diagram mismatches, tree time {elapsed:.2f} s (< 60 s)")
    assert ok


def test_mv_minimality(verdict):
    bad = checked = 0
    t0 = time.perf_counter()
    for seed in range(2000, 2100):
        tree = build_persistence_tree(alpha_filtration(random_cloud(seed, lo=4, hi=12)))
        for p in diagram_h1(tree):
            if p.zero_persistence:
                continue
            checked += 1
            bad += len(minimum_volume(tree, p)) != exhaustive_min_volume(tree.filtration, p.birth_simplex, p.death_simplex)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and checked > 0 and elapsed < 120
    verdict(2, ok, f"100 clouds, {checked} holes, {bad} size mismatches, {elapsed:.1f} s (< 120 s)")
    assert ok


def _impulse_sizes(snr, seeds=range(10)):
    # the hole whose minimum volume holds the most spectrogram energy
    f = synth("impulses", 1024, count=2)
    mv, sv = [], []
    for seed in seeds:
        an = analyze(mix_at_snr(f, NoiseModel(seed=seed), snr, stream=1))
        best = max(
            (p for p in an.pairs if not p.zero_persistence),
            key=lambda p: mask_energy(rasterize_volume(volume_for(an, p, "mv"), an.spec), an.spec),
        )
        mv.append(len(volume_for(an, best, "mv")))
        sv.append(len(volume_for(an, best, "sv")))
    return np.var(mv, ddof=1), np.var(sv, ddof=1)


def test_sv_properties(verdict):
    eps = np.linspace(0.0, 0.5, 26)
    sv0_bad = mono_bad = holes = 0
    for seed in range(1000, 1200):
        tree = build_persistence_tree(alpha_filtration(random_cloud(seed)))
        for p in diagram_h1(tree):
            if p.zero_persistence:
                continue
            holes += 1
            mv = minimum_volume(tree, p).triangles
            sv0_bad += not np.array_equal(stable_volume(tree, p, 0.0).triangles, mv)
            sizes = [len(stable_volume(tree, p, e)) for e in eps]
            mono_bad += bool(np.any(np.diff(sizes) > 0))
    variances = {snr: _impulse_sizes(snr) for snr in (0.0, 5.0, 10.0, 20.0)}
    var_ok = all(v_sv <= v_mv for v_mv, v_sv in variances.values())
    ok = sv0_bad == 0 and mono_bad == 0 and var_ok
    detail = ", ".join(f"{s:g} dB MV {m:.2f} SV {v:.2f}" for s, (m, v) in variances.items())
    verdict(3, ok, f"{holes} holes: SV_0 != MV {sv0_bad}, non-monotone {mono_bad}; two-impulse size variance {detail}")
    assert ok


def test_type1_calibration(verdict, cache_dir):
    # Each trial takes one pool row as the observed noise signal and 200
    # other rows as its reference, so observation and reference are
    # exchangeable and the rate below is the unconditional type-I error.
    n_trials, B, K = 1000, 200, 5
    pool = build_noise_references(1024, AnalysisConfig(), B=1200, K=K, seed=10_000, cache_dir=cache_dir)
    rng = np.random.default_rng(4)
    bonf, seq = AlphaSchedule(ALPHA, "bonferroni", K=K), AlphaSchedule(ALPHA, "polynomial", m=1.0)
    rej = {k: 0 for k in STAT_KINDS}
    fd = {k: 0 for k in STAT_KINDS}
    for i in range(n_trials):
        others = np.delete(np.arange(pool["dist"].B), i)
        rows = rng.choice(others, size=B, replace=False)
        for k in STAT_KINDS:
            pv = p_values(StatisticVector(k, pool[k].matrix[i]), NoiseReference(k, pool[k].matrix[rows]))
            rej[k] += simultaneous_test(pv, bonf)
            fd[k] += sequential_hole_count(pv, seq)[0] > 0
    se = np.sqrt(ALPHA * (1 - ALPHA) / n_trials)
    r_b, r_s = rej["energy_sv"] / n_trials, fd["energy_sv"] / n_trials
    ok = r_b <= ALPHA + 3 * se and abs(r_s - ALPHA) <= 3 * se
    # a single fixed reference, as used by one run of the tool
    fixed = build_noise_references(1024, AnalysisConfig(), B=B, K=K, seed=0, cache_dir=cache_dir)
    info = []
    for k in STAT_KINDS:
        fr = sum(simultaneous_test(p_values(StatisticVector(k, pool[k].matrix[i]), fixed[k]), bonf) for i in range(n_trials))
        info.append(f"{k} bonf {rej[k] / n_trials:.3f} seq {fd[k] / n_trials:.3f} fixed-ref bonf {fr / n_trials:.3f}")
    verdict(4, ok, f"energy_sv Bonferroni {r_b:.3f} <= {ALPHA + 3 * se:.4f}, sequential {r_s:.3f} in "
            f"{ALPHA:.2f} +- {3 * se:.4f}; " + "; ".join(info))
    assert ok


def test_fwer_corollary(verdict):
    scenarios = [
        (AlphaSchedule(ALPHA, "polynomial", m=1.0), 2, (0.1, 0.3)),
        (AlphaSchedule(0.1, "polynomial", m=2.0), 1, (0.2,)),
        (AlphaSchedule(ALPHA, "geometric", beta=0.5), 2, (0.1, 0.3)),
        (AlphaSchedule(0.1, "geometric", beta=0.8), 3, (0.05, 0.1, 0.2)),
    ]
    ok, parts = True, []
    for j, (sched, ks, eps) in enumerate(scenarios):
        r = fwer_harness(FwerScenario(ks, eps, sched, K=10, trials=100_000, seed=j))
        se = np.sqrt(r.theory_over * (1 - r.theory_over) / 100_000)
        good = abs(r.p_over - r.theory_over) <= 3 * se
        ok &= good
        parts.append(f"{sched.rule} k*={ks} {r.p_over:.5f} vs {r.theory_over:.5f} (3 SE {3 * se:.5f})")
    verdict(5, ok, "; ".join(parts))
    assert ok


def test_power_ordering(verdict, cache_dir):
    snrs = (-5.0, 0.0, 5.0, 10.0)
    methods = ("first-dist", "bonferroni-dist", "bonferroni-energy-mv", "bonferroni-energy-sv", "apf")
    rows = power_bench(BenchScenario(snrs=snrs, trials=200, methods=methods, cache_dir=cache_dir))
    by = {(r["method"], r["snr"]): r for r in rows}
    mono = all(
        by[(m, b)]["power"] >= by[(m, a)]["power"] or _overlap(by[(m, a)], by[(m, b)])
        for m in methods for a, b in zip(snrs, snrs[1:])
    )
    compared = ("bonferroni-energy-sv", "bonferroni-energy-mv", "bonferroni-dist", "first-dist")
    # lowest SNR where every compared method is strictly between 0 and 1
    inner = [s for s in snrs if all(0 < by[(m, s)]["power"] < 1 for m in compared)]
    s0 = inner[0] if inner else next((s for s in snrs if any(0 < by[(m, s)]["power"] < 1 for m in compared)), snrs[0])

    def geq(a, b):
        return by[(a, s0)]["power"] >= by[(b, s0)]["power"] or _overlap(by[(a, s0)], by[(b, s0)])

    order = (geq("bonferroni-energy-sv", "bonferroni-energy-mv")
             and all(geq("bonferroni-energy-mv", d) for d in ("bonferroni-dist", "first-dist")))
    ok = mono and order
    table = "; ".join(f"{m} " + "/".join(f"{by[(m, s)]['power']:.3f}" for s in snrs) for m in methods)
    verdict(6, ok, f"monotone {mono}, ordering at {s0:g} dB {order}; power at {'/'.join(f'{s:g}' for s in snrs)} dB: {table}")
    assert ok


def test_reconstruction(verdict, cache_dir):
    f = synth("chirp")
    g = stft(f)
    q_all = qrf(f, reconstruct_signal(g, np.ones(g.shape, bool)))
    snr = 10.0
    c2 = f.energy() / (len(f) * 10 ** (snr / 10))
    oracle = np.abs(g.values) ** 2 > c2 / 512
    gains = [qrf(f, reconstruct_signal(stft(mix_at_snr(f, NoiseModel(seed=s), snr, stream=1)), oracle)) - snr
             for s in range(50)]
    rows = reconstruction_bench(BenchScenario(snrs=(0.0,), trials=200, cache_dir=cache_dir), alphas=(0.05, 0.15))
    by = {(r["volumes"], r["alpha"]): r for r in rows}
    q05, q15 = by[("sv", 0.05)]["mean_qrf"], by[("sv", 0.15)]["mean_qrf"]
    ok = q_all > 30 and np.mean(gains) > 0 and q15 >= q05
    info = ", ".join(f"{v} a={a} QRF {r['mean_qrf']:.2f} n_hat {r['mean_n_holes']:.2f}" for (v, a), r in sorted(by.items()))
    verdict(7, ok, f"all-ones QRF {q_all:.1f} dB (> 30), oracle gain {np.mean(gains):.2f} dB (> 0), "
            f"0 dB SV QRF a=0.15 {q15:.3f} >= a=0.05 {q05:.3f}; {info}")
    assert ok


def test_apf_calibration(verdict):
    # Null curves come from a pool; each repetition draws L + 1 distinct
    # curves and treats the first as the observation.
    L, reps = 99, 1000
    pool = [apf(analyze(white_noise(1024, NoiseModel(seed=30_000 + j), stream=2)).pairs) for j in range(300)]
    rng = np.random.default_rng(8)
    hits = 0
    for _ in range(reps):
        idx = rng.choice(len(pool), size=L + 1, replace=False)
        hits += apf_envelope_test(pool[idx[0]], L, ALPHA, [pool[j] for j in idx[1:]])
    rate = hits / reps
    ok = abs(rate - ALPHA) <= 0.02
    verdict(8, ok, f"null rejection rate {rate:.3f} over {reps} repetitions (0.05 +- 0.02)")
    assert ok


def test_zero_density(verdict):
    d = []
    for seed in range(100):
        sp = spectrogram(white_noise(4096, NoiseModel("complex", seed=seed)))
        d.append(zero_density(find_zeros(sp), sp))
    d = np.asarray(d)
    cv = d.std(ddof=1) / d.mean()
    rel = d.mean() / ZERO_DENSITY_COMPLEX - 1
    ok = cv < 0.05 and abs(rel) <= 0.05
    verdict(9, ok, f"CV {100 * cv:.2f}% (< 5%), mean density {d.mean():.4f} vs {ZERO_DENSITY_COMPLEX} ({100 * rel:+.2f}%)")
    assert ok
