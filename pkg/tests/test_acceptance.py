"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one ``[acceptance N] PASS/FAIL`` line (visible with
``pytest tests/test_acceptance.py -s``). The reference configuration is the
default one: 60 GHz (wavelength pinned to 5 mm), 2 GHz bandwidth, 27x27
arrays at 2 cm spacing 15 m apart, -20 dBm, NF 8 dB, isotropic elements,
optimal symmetric waist, noiseless beam-domain compression.
"""

import json
import math
import time
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.special import erf

import beamcap as bc
from beamcap.config import load_config
from beamcap.runner import run
from oracles import grid_search_waterfill, mode_overlap_matrix


def _report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[acceptance {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {criterion} failed: {detail}"


@pytest.fixture(scope="module")
def t1(table1_link, table1_arrays, table1_params):
    """Reference-system baseline: native channel, its SVD, capacity, trace."""
    tx, rx = table1_arrays
    started = time.perf_counter()
    native = bc.build_native_channel(tx, rx, table1_link, bc.ElementPattern("isotropic"))
    svd = bc.decompose(native)
    noise = bc.noise_power(table1_link).watts
    power = table1_link.tx_power_w
    alloc = bc.water_fill(svd.s, noise, power)
    native_se = bc.spectral_efficiency(alloc, svd.s, noise).spectral_efficiency
    source = bc.make_channel_source(native, table1_params, estimation="noiseless")
    trace = bc.iterative_capacity(source, table1_link, epsilon=1e-15, hard_cap=15)
    elapsed = time.perf_counter() - started
    tx_basis = bc.build_beam_basis(tx, table1_params, 8)
    rx_basis = bc.build_beam_basis(rx, table1_params, 8)
    return SimpleNamespace(
        link=table1_link,
        params=table1_params,
        native=native,
        svd=svd,
        noise=noise,
        power=power,
        native_se=native_se,
        trace=trace,
        elapsed=elapsed,
        tx_basis=tx_basis,
        rx_basis=rx_basis,
    )


def test_criterion_1_capacity_convergence(t1):
    """Relative capacity error: monotone in L, <=10% at L=8, <=1% at L=11,
    stalled below 1e-3 of SE beyond L=12, full run under five minutes."""
    se = {r.l_max: r.spectral_efficiency for r in t1.trace.records}
    delta = {r.l_max: r.delta for r in t1.trace.records if r.delta is not None}
    rel_err = {l: abs(se[l] - t1.native_se) / t1.native_se for l in se}
    levels = sorted(rel_err)
    monotone = all(
        rel_err[levels[i + 1]] <= rel_err[levels[i]] + 1e-12 for i in range(len(levels) - 1)
    )
    at_8 = rel_err.get(8, 1.0)
    at_11 = rel_err.get(11, 1.0)
    beyond = [l for l in delta if l > 12]
    stalled = bool(beyond) and all(delta[l] < 1e-3 * se[l] for l in beyond)
    fast = t1.elapsed < 300.0
    ok = monotone and at_8 <= 0.10 and at_11 <= 0.01 and stalled and fast
    _report(
        1,
        ok,
        f"monotone={monotone}, err(L=8)={at_8:.2e} (<=0.10), err(L=11)={at_11:.2e} (<=0.01), "
        f"max delta beyond L=12 = {max((delta[l] for l in beyond), default=float('nan')):.2e}, "
        f"runtime {t1.elapsed:.1f}s (<300s)",
    )


def test_criterion_2_overhead_accounting(tmp_path):
    """Summary reports 81 beam-mode references vs 729 antenna ones at L=8."""
    cfg = load_config(None, {"algorithm.hard_cap": 8, "algorithm.epsilon": 1e-15})
    bundle = run("capacity", cfg, out_dir=str(tmp_path / "overhead"))
    summary = json.loads(bundle.path("summary.json").read_text())
    ok = (
        summary["l_max"] == 8
        and summary["hg_reference_signals"] == 81
        and summary["antenna_reference_signals"] == 729
        and abs(summary["overhead_reduction"] - 0.889) <= 0.001
    )
    _report(
        2,
        ok,
        f"l_max={summary['l_max']}, refs={summary['hg_reference_signals']}/"
        f"{summary['antenna_reference_signals']}, reduction={summary['overhead_reduction']:.4f}",
    )


def test_criterion_3_compression_bound(t1):
    """sigma_k of the L=8 beam channel never exceeds the native values, and
    every sigma_k grows monotonically with L."""
    s_native = t1.svd.s
    worst_violation = -np.inf
    prev = None
    monotone = True
    for l in range(9):
        n = (l + 1) ** 2
        hg = bc.compress_channel(
            t1.native, bc.basis_prefix(t1.tx_basis, n), bc.basis_prefix(t1.rx_basis, n)
        )
        s = np.linalg.svd(hg.matrix, compute_uv=False)
        worst_violation = max(worst_violation, float(np.max(s - s_native[: len(s)])))
        if prev is not None and np.min(s[: len(prev)] - prev) < -1e-12:
            monotone = False
        prev = s
    ok = worst_violation <= 1e-9 and monotone
    _report(
        3,
        ok,
        f"max(sigma_hg - sigma_native)={worst_violation:.2e} (<=1e-9), growth monotone={monotone}",
    )


def test_criterion_4_residual_structure(t1):
    """Residuals shrink as the basis grows (1e-12 slack) and, for L<=3, the
    first (L+1)^2 singular modes sit at least 5x below the next frontier."""
    n_modes = 100
    l_values = range(9)
    errs = np.empty((n_modes, len(l_values)))
    for col, l in enumerate(l_values):
        basis = bc.basis_prefix(t1.tx_basis, (l + 1) ** 2)
        for k in range(n_modes):
            errs[k, col] = bc.project_field(t1.svd.v[:, k], basis).residual
    monotone = bool(np.all(np.diff(errs, axis=1) <= 1e-12))
    ratios = []
    for l in range(4):
        head = errs[: (l + 1) ** 2, l].mean()
        tail = errs[(l + 1) ** 2 : (l + 2) ** 2, l].mean()
        ratios.append(tail / head)
    separated = all(r >= 5.0 for r in ratios)
    ok = monotone and separated
    _report(
        4,
        ok,
        f"monotone={monotone}, frontier separation ratios (L=0..3): "
        + ", ".join(f"{r:.0f}x" for r in ratios)
        + " (>=5x)",
    )


def test_criterion_5_mode_correctness(t1):
    """Quadrature orthonormality to 1e-6 for all indices <= 12, exact peak
    intensity of the fundamental, and the closed-form captured power."""
    gram = mode_overlap_matrix(t1.params, t1.params.rx_z, 12, nodes=200)
    ortho_err = float(np.abs(gram - np.eye(gram.shape[0])).max())
    peak = abs(bc.hg_field((0, 0), 0.0, 0.0, 0.0, t1.params)) ** 2
    peak_expected = 2.0 / (math.pi * t1.params.waist**2)
    peak_err = abs(peak / peak_expected - 1.0)
    capture_err = abs(bc.captured_power((0, 0), 1.0) - erf(math.sqrt(2.0)) ** 2)
    ok = ortho_err <= 1e-6 and peak_err <= 1e-10 and capture_err <= 1e-6
    _report(
        5,
        ok,
        f"orthonormality err={ortho_err:.2e} (<=1e-6), peak rel err={peak_err:.2e} (<=1e-10), "
        f"captured-power err={capture_err:.2e} (<=1e-6)",
    )


def test_criterion_6_optimal_waist():
    """Waist numbers for the 5 mm / 15 m link, plus finite-difference proof
    that the plane radius is minimized at that waist."""
    params = bc.optimal_waist(0.005, 15.0)
    radius = bc.beam_geometry(params, params.rx_z).radius
    waist_err = abs(params.waist - 0.10925)
    radius_err = abs(radius - 0.15451)

    def plane_radius(waist: float) -> float:
        return bc.beam_geometry(
            bc.BeamParameters.symmetric(waist, 0.005, 15.0), 7.5
        ).radius

    h = 1e-5
    slope = (plane_radius(params.waist + h) - plane_radius(params.waist - h)) / (2 * h)
    curvature = (
        plane_radius(params.waist + h)
        - 2 * plane_radius(params.waist)
        + plane_radius(params.waist - h)
    )
    ok = waist_err <= 1e-5 and radius_err <= 1e-5 and abs(slope) < 1e-4 and curvature > 0
    _report(
        6,
        ok,
        f"waist={params.waist:.6f} (err {waist_err:.1e}), radius={radius:.6f} "
        f"(err {radius_err:.1e}), FD slope={slope:.1e}, FD curvature={curvature:.2e}>0",
    )


def test_criterion_7_water_filling_optimality():
    """100 randomized instances with <=4 modes: exact solution matches the
    grid-search oracle to 1e-6 bits/s/Hz and satisfies the KKT conditions."""
    rng = np.random.default_rng(12345)
    worst_gap = 0.0
    worst_kkt = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        s = np.sort(rng.uniform(0.05, 3.0, n))[::-1]
        noise = float(rng.uniform(0.05, 2.0))
        total = float(rng.uniform(0.2, 5.0))
        alloc = bc.water_fill(s, noise, total)
        se = bc.spectral_efficiency(alloc, s, noise).spectral_efficiency
        worst_gap = max(worst_gap, abs(se - grid_search_waterfill(s, noise, total)))
        for k in range(n):
            inv = noise / s[k] ** 2
            if alloc.powers[k] > 0:
                worst_kkt = max(worst_kkt, abs(alloc.water_level - inv - alloc.powers[k]))
            else:
                worst_kkt = max(worst_kkt, max(0.0, alloc.water_level - inv))
        worst_kkt = max(worst_kkt, abs(alloc.powers.sum() - total))
    ok = worst_gap <= 1e-6 and worst_kkt <= 1e-10
    _report(
        7,
        ok,
        f"worst |SE - oracle|={worst_gap:.2e} (<=1e-6), worst KKT/budget residual="
        f"{worst_kkt:.2e} (<=1e-10)",
    )


def test_criterion_8_estimation_sanity(t1, small_native, small_bases):
    """Zero-noise LS equals the compression, and the noisy per-entry error
    variance matches sigma^2/(P * repetitions) within 10% over 1000 trials."""
    tx_basis = bc.basis_prefix(t1.tx_basis, 16)
    rx_basis = bc.basis_prefix(t1.rx_basis, 16)
    exact_big = bc.compress_channel(t1.native, tx_basis, rx_basis).matrix
    noiseless = bc.ls_estimate(
        t1.native, tx_basis, rx_basis, t1.link, repetitions=1, seed=0, noise_w=0.0
    ).matrix
    equality_gap = float(np.abs(noiseless - exact_big).max())

    s_tx, s_rx = small_bases
    exact = bc.compress_channel(small_native, s_tx, s_rx).matrix
    repetitions = 2
    total_sq = 0.0
    count = 0
    for trial in range(1000):
        est = bc.ls_estimate(
            small_native, s_tx, s_rx, t1.link, repetitions=repetitions, seed=10_000 + trial
        ).matrix
        diff = est - exact
        total_sq += float(np.sum(np.abs(diff) ** 2))
        count += diff.size
    empirical = total_sq / count
    predicted = t1.noise / (t1.power * repetitions)
    ratio = empirical / predicted
    ok = equality_gap <= 1e-12 and 0.9 <= ratio <= 1.1
    _report(
        8,
        ok,
        f"noiseless gap={equality_gap:.2e} (<=1e-12), variance ratio={ratio:.4f} (within 10%)",
    )


def test_criterion_9_small_instance_equivalence(table1_link, table1_params):
    """N=2 arrays with a full-span basis: beam-domain capacity equals the
    native capacity to 1e-9 bits/s/Hz."""
    tx = bc.ArraySpec(2, 0.02, -7.5, "+z")
    rx = bc.ArraySpec(2, 0.02, +7.5, "-z")
    native = bc.build_native_channel(tx, rx, table1_link)
    noise = bc.noise_power(table1_link).watts
    power = table1_link.tx_power_w
    s_native = np.linalg.svd(native.matrix, compute_uv=False)
    se_native = bc.spectral_efficiency(
        bc.water_fill(s_native, noise, power), s_native, noise
    ).spectral_efficiency
    tx_b = bc.build_beam_basis(tx, table1_params, 4, drop_tol=0.0)
    rx_b = bc.build_beam_basis(rx, table1_params, 4, drop_tol=0.0)
    full_span = len(tx_b.kept) == 25 and len(rx_b.kept) == 25
    s_hg = np.linalg.svd(bc.compress_channel(native, tx_b, rx_b).matrix, compute_uv=False)
    se_hg = bc.spectral_efficiency(
        bc.water_fill(s_hg, noise, power), s_hg, noise
    ).spectral_efficiency
    gap = abs(se_hg - se_native)
    ok = full_span and gap <= 1e-9
    _report(
        9,
        ok,
        f"full span={full_span} (25/25 modes kept), |SE_beam - SE_native|={gap:.2e} (<=1e-9)",
    )
