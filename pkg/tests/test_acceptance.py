"""Acceptance criteria, one test per criterion.

Each test prints ``PASS``/``FAIL criterion N: value (target)`` including its
runtime budget; the lines are also collected into the terminal summary.
Criteria whose stated target contradicts the model are evaluated as stated
and fail.
"""
import math
import time

import numpy as np
import pytest

from mmfnoise.bath import (K_B, BathSpec, FilterKind, PowerLawNoise, classical_chi, coherence_curves,
                           crossover_time, dephasing_chi, effective_temperature)
from mmfnoise.errors import OptimizationError
from mmfnoise.gateopt import GateModel, dd_suppression, dd_suppression_quadrature, optimal_gate_time, total_cost
from mmfnoise.mmfbm import (CovarianceModel, HurstProfile, TimeGrid, build_covariance_matrix, covariance,
                            cumulative_paths, sample_fgn_circulant, sample_paths_cholesky,
                            variance_theory)
from mmfnoise.numerics import QuadratureSpec, fit_line, fit_power_law, integrate
from mmfnoise.sde import (SdeConfig, carrier_frequency, dephasing_signal, estimate_t1, estimate_t2,
                          simulate_energy, simulate_ensemble, t1_reference_config, t2_reference_config)
from mmfnoise.spectral import (PsdEstimate, consistency_check, fit_psd_exponent, hurst_from_coherence,
                               hurst_from_variance, synthetic_coherence, welch_psd)

REPORT = []
OMEGA_C = 2 * math.pi * 10.0


def report(n, ok, value, target, elapsed, budget):
    in_time = elapsed < budget
    line = (f"{'PASS' if ok and in_time else 'FAIL'} criterion {n}: {value} (target {target}); "
            f"runtime {elapsed:.2f} s (< {budget:g} s)")
    print(line)
    REPORT.append(line)
    assert ok, line
    assert in_time, line


def test_criterion_01_cholesky_variance():
    t0 = time.perf_counter()
    H = 0.7
    cov = build_covariance_matrix(TimeGrid.spanning(1.0, 128),
                                  CovarianceModel("constant_fbm", HurstProfile.constant(H)))
    ens = sample_paths_cholesky(cov, 10_000, seed=1)
    t = cov.grid.times[1:]
    dev = float(np.max(np.abs(ens.variance()[1:] / t ** (2 * H) - 1)))
    report(1, dev < 0.05, f"max |Var/t^2H - 1| = {dev:.4f}", "< 0.05", time.perf_counter() - t0, 30)


def test_criterion_02_circulant_variance_slope():
    t0 = time.perf_counter()
    devs = []
    for k, H in enumerate((0.55, 0.65, 0.75)):
        inc = sample_fgn_circulant(H, TimeGrid(0.0, 1.0, 2**14), 1000, seed=20 + k)
        slope = 2 * hurst_from_variance(cumulative_paths(inc), mode="global").h_mean
        devs.append(abs(slope - 2 * H))
    dev = max(devs)
    report(2, dev < 0.05, f"max |slope - 2H| = {dev:.4f}", "< 0.05", time.perf_counter() - t0, 60)


@pytest.mark.filterwarnings("ignore::mmfnoise.errors.AdiabaticityWarning")
def test_criterion_03_hurst_extraction():
    t0 = time.perf_counter()
    prof = HurstProfile.sinusoid(0.65, 0.1, 20.0)
    cov = build_covariance_matrix(TimeGrid.spanning(20.0, 512), CovarianceModel("locally_stationary", prof))
    ens = sample_paths_cholesky(cov, 1000, seed=3)
    h = hurst_from_variance(ens, profile=prof).h_mean
    report(3, abs(h - 0.65) <= 0.010, f"mean H_ext = {h:.4f}", "0.650 +/- 0.010", time.perf_counter() - t0, 60)


def _avg_psd(rows, seg, dt):
    ests = [welch_psd(r, seg, dt=dt) for r in rows]
    return PsdEstimate(ests[0].frequencies, np.mean([e.power for e in ests], axis=0), seg, 0.5)


@pytest.mark.filterwarnings("ignore::mmfnoise.errors.AdiabaticityWarning")
def test_criterion_04_psd_bias_and_convergence():
    t0 = time.perf_counter()
    # N = 512 mmfBm increments, 128-point segments
    prof = HurstProfile.sinusoid(0.65, 0.1, 20.0)
    grid = TimeGrid.spanning(20.0, 512)
    cov = build_covariance_matrix(grid, CovarianceModel("locally_stationary", prof))
    vals = sample_paths_cholesky(cov, 200, seed=4).values
    beta_small = fit_psd_exponent(_avg_psd(np.diff(vals, axis=1), 128, grid.dt)).slope
    theory = 2 * float(np.mean(prof(grid.times[1:]))) - 1
    bias = theory - beta_small
    # N = 2^17 constant-H fGn, low-frequency band
    inc = sample_fgn_circulant(0.7, TimeGrid(0.0, 1.0, 2**17), 4, seed=5)
    beta_large = fit_psd_exponent(_avg_psd(inc.values, 4096, 1.0), f_high=0.1).slope
    ok = bias >= 0.05 and abs(beta_large - 0.4) <= 0.05
    report(4, ok, f"N=512 beta_fit = {beta_small:.4f} vs theory {theory:.4f} (bias {bias:.4f}); "
           f"N=2^17 beta_fit = {beta_large:.4f}", "bias >= 0.05 and 0.4 +/- 0.05",
           time.perf_counter() - t0, 120)


def test_criterion_05_double_integral_constant():
    t0 = time.perf_counter()
    spec = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-13)
    worst = 0.0
    for H in (0.6, 0.7):
        model = CovarianceModel("constant_fbm", HurstProfile.constant(H))
        for t in (1.0, 10.0):
            inner = lambda u: integrate(lambda v: covariance(u, v, model), 0.0, t, spec, points=[u])
            val = integrate(inner, 0.0, t, spec)
            target = t ** (2 * H + 2) / ((2 * H + 1) * (2 * H + 2))
            worst = max(worst, abs(val / target - 1))
    report(5, worst < 1e-6, f"max relative deviation {worst:.4g}", "< 1e-6", time.perf_counter() - t0, 10)


def test_criterion_06_ramsey_scaling():
    t0 = time.perf_counter()
    t = np.geomspace(0.01, 1.0, 21)
    devs = []
    for H in (0.6, 0.7):
        res = dephasing_chi(t, PowerLawNoise(1.0, HurstProfile.constant(H)))
        a = fit_power_law(t, res.chi).slope
        g = fit_power_law(t, res.gamma_phi).slope
        devs.append((abs(a - 2 * H), abs(g - (2 * H - 1))))
    dc, dg = max(d[0] for d in devs), max(d[1] for d in devs)
    report(6, dc < 0.05 and dg < 0.07, f"max |chi slope - 2H| = {dc:.4f}, max |Gamma slope - (2H-1)| = {dg:.4f}",
           "< 0.05 and < 0.07", time.perf_counter() - t0, 60)


def test_criterion_07_ohmic_log_high_t():
    t0 = time.perf_counter()
    spec = BathSpec(1.0, OMEGA_C, HurstProfile.constant(1.0), 100 * OMEGA_C / K_B)
    t = np.geomspace(10.0, 1e3, 25) / OMEGA_C
    chi = dephasing_chi(t, spec).chi
    r2 = fit_line(np.log(OMEGA_C * t), chi).r_squared
    report(7, r2 > 0.99, f"R^2 of chi vs ln(omega_c t) = {r2:.4f}", "> 0.99", time.perf_counter() - t0, 30)


def test_criterion_08_temperature_crossover():
    t0 = time.perf_counter()
    a, b = crossover_time(0.05), crossover_time(0.5)
    ok_t = abs(a / 0.153 - 1) < 0.02 and abs(b / 0.0153 - 1) < 0.02
    mono = True
    times = np.geomspace(0.05, 5.0, 8)
    for H in (0.55, 0.65, 0.75):
        spec = BathSpec.from_coupling(2 * math.pi * 0.05, OMEGA_C, HurstProfile.constant(H), 0.01)
        chis = [r.chi for r in coherence_curves(spec, times, [0.01, 0.05, 0.1, 0.5])]
        mono &= all(np.all(hi >= lo) for lo, hi in zip(chis, chis[1:]))
    report(8, ok_t and mono, f"t_cross = {a:.5f} / {b:.6f} ns, monotone = {mono}",
           "0.153 / 0.0153 ns +/- 2%, monotone", time.perf_counter() - t0, 10)


def test_criterion_09_high_t_classical():
    t0 = time.perf_counter()
    spec = BathSpec(1.0, OMEGA_C, HurstProfile.constant(0.7), 100 * OMEGA_C / K_B)
    t = np.geomspace(0.1, 10.0, 7)
    r = dephasing_chi(t, spec).chi / classical_chi(t, spec)
    te = effective_temperature(0.0, spec) / spec.temperature
    ok = bool(np.all((r >= 0.99) & (r <= 1.01))) and abs(te - 1) < 0.01
    report(9, ok, f"chi/chi_cl in [{r.min():.5f}, {r.max():.5f}], T_eff/T = {te:.5f}",
           "[0.99, 1.01], 1 +/- 0.01", time.perf_counter() - t0, 30)


def test_criterion_10_gate_optimization():
    t0 = time.perf_counter()
    m = GateModel(30.0, 0.5, 0.7)
    try:
        opt = optimal_gate_time(m, "numeric")
        x = opt.t_opt
        f = lambda s: float(total_cost(s, m))
        local = f(x) <= min(f(0.99 * x), f(1.01 * x))
        agree = abs(x / opt.closed_form - 1)
        ok, value = agree < 0.05 and local, f"numeric/closed form - 1 = {agree:.4f}, locally minimal = {local}"
    except OptimizationError as exc:
        ok, value = False, f"OptimizationError: {exc}"
    report(10, ok, value, "agreement within 5%, local minimum", time.perf_counter() - t0, 5)


def test_criterion_11_dd_suppression():
    t0 = time.perf_counter()
    worst = 0.0
    for H in (0.6, 0.7):
        for n in (8, 16, 32):
            worst = max(worst, abs(dd_suppression_quadrature(n, H) / dd_suppression(n, H) - 1))
    report(11, worst <= 0.15, f"max |ratio / (n/2)^-2H - 1| = {worst:.4f}", "<= 0.15",
           time.perf_counter() - t0, 60)


def test_criterion_12_sde_sanity():
    t0 = time.perf_counter()
    lam = 0.5
    cfg = SdeConfig(lam=lam, sigma0=0.0, grid=TimeGrid.spanning(10.0, 2001))
    t = cfg.grid.times
    eps = simulate_energy(cfg).epsilon
    bound = 0.5 * lam**2 * t * cfg.grid.dt * np.exp(-lam * t) * 1.01 + 1e-15
    ok_euler = bool(np.all(np.abs(eps - np.exp(-lam * t)) <= bound))

    cfg0 = SdeConfig(lam=0.0, sigma0=0.3, profile=HurstProfile.constant(0.7), grid=TimeGrid.spanning(2.0, 101),
                     seed=1)
    var = np.mean((simulate_ensemble(cfg0, 2000).values - 1.0) ** 2, axis=0)[1:]
    th = 0.09 * variance_theory(cfg0.grid.times[1:], cfg0.profile)
    ok_var = bool(np.all(np.abs(var / th - 1) < 3 * math.sqrt(2 / 2000)))

    c1 = t1_reference_config()
    t1, _ = estimate_t1(simulate_ensemble(c1, 20))
    c2 = t2_reference_config()
    t2, _ = estimate_t2(dephasing_signal(simulate_ensemble(c2, 20), carrier_frequency(c2)))
    ok_mag = 0.5 <= t1 / 5.0e6 <= 2 and 0.5 <= t2 / 4.18e5 <= 2

    ratios = []
    for lam in (0.05, 0.1, 0.2):
        c = SdeConfig(lam=lam, sigma0=0.0, grid=TimeGrid.spanning(3.0 / lam, 400))
        ratios.append(estimate_t1(simulate_energy(c))[0] * lam)
    ok_scale = max(abs(r / ratios[0] - 1) for r in ratios) < 0.05
    ok = ok_euler and ok_var and ok_mag and ok_scale
    report(12, ok, f"Euler bound {ok_euler}, variance band {ok_var}, T1 = {t1:.4g} ns, T2 = {t2:.4g} ns, "
           f"T1*lam spread {max(ratios) / min(ratios) - 1:.2e}",
           "all hold; T1, T2 within factor 2 of 5.0e6 / 4.18e5 ns", time.perf_counter() - t0, 120)


def test_criterion_13_protocol_consistency():
    t0 = time.perf_counter()
    t = np.geomspace(0.1, 5.0, 64)
    p = HurstProfile.sinusoid(0.65, 0.1, 20.0)
    hr = hurst_from_coherence((t, synthetic_coherence(t, p, "ramsey")), kind="ramsey")
    he = hurst_from_coherence((t, synthetic_coherence(t, p, "echo")), kind="echo")
    bad = hurst_from_coherence((t, synthetic_coherence(t, p, "echo", offset=0.06)), kind="echo")
    good, off = consistency_check(hr, he), consistency_check(hr, bad)
    ok = good.passed and not off.passed
    report(13, ok, f"consistent max |H_R - H_E| = {good.max_difference:.4f}, offset curve "
           f"{off.max_difference:.4f} rejected = {not off.passed}", "< 0.05 passes, 0.06 offset fails",
           time.perf_counter() - t0, 10)
