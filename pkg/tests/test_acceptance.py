"""Acceptance criteria, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line and records it so the terminal
summary lists every criterion.  Run with ``pytest tests/test_acceptance.py -v``.
"""

import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from chartkit import _kernels
from chartkit.channels import ChannelDataset, save_dataset
from chartkit.cli import main
from chartkit.distances import (
    dist_normalized,
    dist_phase_insensitive,
    dist_phase_insensitive_variational,
)
from chartkit.isomap import NeighborhoodGraph, chart_channels, classical_mds, geodesic_distances
from chartkit.metrics import continuity, pca_baseline, quality_curves, trustworthiness
from chartkit.synth import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    ScenarioConfig,
    channels_at,
    generate_scenario,
    preset_deepmimo_like,
    preset_los_wideband,
    preset_quadriga_like,
)

from conftest import ACCEPTANCE_LINES, random_channels


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def euclid(P):
    return np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))


def two_users_on_a_ray(separation, subcarriers, bandwidth, fc):
    cfg = ScenarioConfig(center_frequency=fc, bandwidth=bandwidth, subcarrier_count=subcarriers,
                         geometry=ArrayGeometry("ula", (8,)), user_count=2, paths_per_user=1,
                         los_probability=1.0, scatterer_count=0)
    direction = np.array([np.cos(1.1), np.sin(1.1)])
    H = channels_at(cfg, [100.0 * direction, (100.0 + separation) * direction])
    return H[0], H[1]


def test_criterion_01_closed_form_matches_grid():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for idx in range(1000):
        m = (8, 32, 1024)[idx % 3]
        a, b = random_channels(rng, 2, m)
        gap = abs(dist_phase_insensitive(a, b) - dist_phase_insensitive_variational(a, b, 4096))
        worst = max(worst, gap)
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-5 and elapsed < 10.0,
           f"max |closed - grid| = {worst:.2e} (<= 1e-5), {elapsed:.2f} s (< 10 s)")


def test_criterion_02_half_wavelength_pathology():
    fc = 3.5e9
    lam = SPEED_OF_LIGHT / fc
    h1, h2 = two_users_on_a_ray(lam / 2, 1, 0.0, fc)
    n1, s1 = dist_normalized(h1, h2), dist_phase_insensitive(h1, h2)
    h1, h2 = two_users_on_a_ray(lam / 2, 16, 20e6, fc)
    n16, s16 = dist_normalized(h1, h2), dist_phase_insensitive(h1, h2)
    ok = abs(n1 - 2.0) <= 1e-9 and abs(s1) <= 1e-9 and n16 >= 1.99 and s16 <= 0.01
    report(2, ok, f"S=1: d_norm={n1:.12f}, d*={s1:.2e}; S=16: d_norm={n16:.6f}, d*={s16:.2e}")


def test_criterion_03_oscillation_sweep():
    fc = 3.5e9
    lam = SPEED_OF_LIGHT / fc
    dstar, dnorm = [], []
    for sep in np.arange(0, 201) * lam / 20:
        h1, h2 = two_users_on_a_ray(sep, 16, 20e6, fc)
        dstar.append(dist_phase_insensitive(h1, h2))
        dnorm.append(dist_normalized(h1, h2))
    v = np.asarray(dnorm)
    maxima = int(np.sum((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])))
    monotone = bool(np.all(np.diff(dstar) >= 0))
    report(3, monotone and maxima >= 9,
           f"d* nondecreasing: {monotone}; d_norm local maxima: {maxima} (>= 9)")


def test_criterion_04_metric_axioms():
    rng = np.random.default_rng(404)
    asym = 0
    worst = -np.inf
    for idx in range(10_000):
        m = (4, 16, 64)[idx % 3]
        x, y, z = random_channels(rng, 3, m)
        dxy, dyx = dist_phase_insensitive(x, y), dist_phase_insensitive(y, x)
        asym += dxy != dyx
        worst = max(worst, dist_phase_insensitive(x, z) - dxy - dist_phase_insensitive(y, z))
    report(4, asym == 0 and worst <= 1e-9,
           f"asymmetric pairs: {asym}; max triangle excess {worst:.2e} (<= 1e-9)")


def test_criterion_05_mds_exactness():
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(5):
        P = rng.standard_normal((100, 2)) * rng.uniform(0.5, 5.0, 2)
        D = euclid(P)
        Z = classical_mds(D, 2).points
        worst = max(worst, float(np.max(np.abs(euclid(Z) - D)) / np.max(D)))
    report(5, worst <= 1e-8, f"max relative pairwise error {worst:.2e} (<= 1e-8)")


def floyd_warshall(n, edges):
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for i, j, w in edges:
        D[i, j] = D[j, i] = min(D[i, j], w)
    for k in range(n):
        D = np.minimum(D, D[:, k, None] + D[None, k, :])
    return D


def graph_from_edges(n, edges):
    nbrs = [dict() for _ in range(n)]
    for i, j, w in edges:
        nbrs[i][j] = nbrs[j][i] = w
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices, weights = [], []
    for i in range(n):
        for j in sorted(nbrs[i]):
            indices.append(j)
            weights.append(nbrs[i][j])
        indptr[i + 1] = len(indices)
    return NeighborhoodGraph(n, indptr, np.array(indices, dtype=np.int32), np.array(weights))


def test_criterion_06_geodesic_oracle(monkeypatch):
    rng = np.random.default_rng(606)
    worst = 0.0
    for name, impl in sorted(_kernels.backends().items()):
        monkeypatch.setattr(_kernels, "_impl", impl)
        for n in (2, 3, 10, 25, 50, 50):
            edges = [(i, int(rng.integers(0, i)), float(rng.uniform(0.1, 5))) for i in range(1, n)]
            for _ in range(2 * n):
                i, j = rng.choice(n, 2, replace=False)
                edges.append((int(i), int(j), float(rng.uniform(0.1, 5))))
            uniq = {(min(i, j), max(i, j)): w for i, j, w in edges}
            edges = [(i, j, w) for (i, j), w in uniq.items()]
            for threads in (1, 4):
                G = geodesic_distances(graph_from_edges(n, edges), threads).values
                worst = max(worst, float(np.max(np.abs(G - floyd_warshall(n, edges)))))
    report(6, worst <= 1e-12,
           f"max |Dijkstra - Floyd-Warshall| = {worst:.1e} (<= 1e-12), backends "
           f"{sorted(_kernels.backends())}")


def brute_score(ref_pts, cmp_pts, K):
    def ranks(P):
        n = len(P)
        R = np.zeros((n, n), dtype=int)
        for i in range(n):
            order = sorted((float(np.sum((P[i] - P[j]) ** 2)), j) for j in range(n) if j != i)
            for r, (_, j) in enumerate(order, start=1):
                R[i, j] = r
        return R

    r, rc = ranks(ref_pts), ranks(cmp_pts)
    n = len(r)
    total = sum(rc[i, j] - K for i in range(n) for j in range(n)
                if j != i and r[i, j] <= K and rc[i, j] > K)
    return 1.0 - 2.0 * total / (n * K * (2 * n - 3 * K - 1))


def test_criterion_07_ct_tw_correctness():
    rng = np.random.default_rng(707)
    P = rng.standard_normal((60, 2))
    ks = [K for K in range(1, 60) if 3 * K < 2 * 60 - 1]
    ct, tw = quality_curves(P, P, ks)
    identity = all(v == 1.0 for v in ct.scores + tw.scores)
    Z = rng.standard_normal((60, 2))
    swap = all(trustworthiness(P, Z, K) == continuity(Z, P, K) for K in ks)
    worst = 0.0
    for trial in range(5):
        P10 = rng.standard_normal((10, 2))
        Z10 = P10.copy()
        i, j = rng.choice(10, 2, replace=False)
        Z10[[i, j]] = Z10[[j, i]]
        if trial == 4:
            Z10 = np.zeros((10, 2))
        for K in (1, 2, 3, 5):
            worst = max(worst, abs(continuity(P10, Z10, K) - brute_score(P10, Z10, K)),
                        abs(trustworthiness(P10, Z10, K) - brute_score(Z10, P10, K)))
    report(7, identity and swap and worst <= 1e-12,
           f"identity all 1: {identity}; role swap exact: {swap}; "
           f"max oracle gap N=10: {worst:.1e} (<= 1e-12)")


@pytest.mark.slow
def test_criterion_08_end_to_end_charting():
    t0 = time.perf_counter()
    config = preset_los_wideband()
    ds = generate_scenario(config)
    ks = [5, 10, 25, 50]
    star = chart_channels(ds, dim=2, k=30)
    ct, tw = quality_curves(ds.positions, star.chart, ks)
    norm = chart_channels(ds, dim=2, k=30, measure="normalized")
    ct_norm, _ = quality_curves(ds.positions, norm.chart, ks)
    ct_pca, _ = quality_curves(ds.positions, pca_baseline(ds, 2), ks)
    elapsed = time.perf_counter() - t0
    ok = (ct.mean() >= 0.85 and tw.mean() >= 0.85
          and ct.mean() >= ct_pca.mean() + 0.02 and ct.mean() >= ct_norm.mean() + 0.02
          and elapsed < 120.0)
    report(8, ok,
           f"N={ds.matrix.shape[0]} M={ds.matrix.shape[1]} seed={config.rng_seed}: "
           f"d* CT={ct.mean():.4f} TW={tw.mean():.4f} (>= 0.85); "
           f"normalized CT={ct_norm.mean():.4f}, PCA CT={ct_pca.mean():.4f} (margin >= 0.02); "
           f"{elapsed:.1f} s (< 120 s)")


def test_criterion_09_angle_recovery():
    n, radius = 150, 150.0
    cfg = ScenarioConfig(center_frequency=2e9, subcarrier_count=1,
                         geometry=ArrayGeometry("ula", (32,)), user_count=n, paths_per_user=1,
                         los_probability=1.0, scatterer_count=0)
    angles = np.random.default_rng(909).permutation(np.linspace(0.35, np.pi - 0.35, n))
    pos = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    ds = ChannelDataset(channels_at(cfg, pos), 32, 1, cfg.frequency_grid(), pos)
    z = chart_channels(ds, dim=1, k=5).points[:, 0]
    rho = spearmanr(z, angles).correlation
    report(9, abs(rho) >= 0.99, f"|Spearman rho| = {abs(rho):.5f} (>= 0.99)")


def _min_time(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


@pytest.mark.slow
def test_criterion_10_runtime_envelope():
    timings = {}
    for label, preset, limit in (("quadriga-like", preset_quadriga_like, 60.0),
                                 ("deepmimo-like", preset_deepmimo_like, 180.0)):
        ds = generate_scenario(preset())
        t0 = time.perf_counter()
        chart_channels(ds, dim=2, k=30)
        timings[label] = (time.perf_counter() - t0, limit)
    H = generate_scenario(preset_los_wideband().replace(user_count=2000)).matrix
    small = _min_time(lambda: _kernels.pair_distances(H[:1000], _kernels.KIND_PHASE_INSENSITIVE))
    large = _min_time(lambda: _kernels.pair_distances(H, _kernels.KIND_PHASE_INSENSITIVE))
    ratio = large / small
    ok = all(t < lim for t, lim in timings.values()) and 2.0 <= ratio <= 6.0
    detail = "; ".join(f"{k}: {t:.1f} s (< {lim:.0f} s)" for k, (t, lim) in timings.items())
    report(10, ok, f"{detail}; distance stage N 1000->2000 at M=512: x{ratio:.2f} (4 +- 50%)")


@pytest.mark.slow
def test_criterion_11_thread_determinism(tmp_path, capsys):
    data = tmp_path / "q.ccd"
    save_dataset(generate_scenario(preset_quadriga_like()), data)
    one, eight = tmp_path / "t1.csv", tmp_path / "t8.csv"
    codes = (main(["chart", str(data), str(one), "--threads", "1"]),
             main(["chart", str(data), str(eight), "--threads", "8"]))
    capsys.readouterr()
    same = codes == (0, 0) and one.read_bytes() == eight.read_bytes()
    report(11, same, f"exit codes {codes}; chart CSVs byte-identical: {same}")
