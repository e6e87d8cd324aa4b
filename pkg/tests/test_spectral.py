import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmfnoise.errors import DomainError, EstimationError, NumericWarning
from mmfnoise.io import read_csv
from mmfnoise.mmfbm import HurstProfile, TimeGrid, cumulative_paths, sample_fgn_circulant
from mmfnoise.spectral import (HurstEstimate, PsdEstimate, consistency_check, effective_sample_size,
                               fit_psd_exponent, hurst_from_coherence, hurst_from_psd, hurst_from_variance,
                               synthetic_coherence, welch_psd, write_hurst_csv, write_psd_csv)


def test_welch_parseval_and_white_noise_flat():
    x = np.random.default_rng(0).standard_normal(2**14)
    psd = welch_psd(x, 256, dt=0.5)
    assert np.sum(psd.power) * psd.df == pytest.approx(np.var(x), rel=1e-12)
    r = fit_psd_exponent(psd)
    assert abs(r.slope) < 0.05
    assert psd.frequencies[-1] == pytest.approx(1.0)  # Nyquist 1/(2 dt)


@given(st.integers(0, 2**31 - 1))
def test_welch_parseval_property(seed):
    x = np.random.default_rng(seed).standard_normal(300).cumsum()
    psd = welch_psd(x, 64, 0.25, dt=1.0)
    assert np.sum(psd.power) * psd.df == pytest.approx(np.var(x), rel=1e-10)
    assert np.all(psd.power >= 0)


def test_welch_errors():
    with pytest.raises(EstimationError):
        welch_psd(np.zeros(100), 128)
    with pytest.raises(EstimationError):
        welch_psd(np.zeros(150), 128, overlap_fraction=0.0)
    with pytest.raises(DomainError):
        welch_psd(np.zeros((2, 300)), 64)
    with pytest.raises(DomainError):
        welch_psd(np.zeros(300), 64, overlap_fraction=1.0)


def test_fit_band_checks():
    x = np.random.default_rng(1).standard_normal(1024)
    psd = welch_psd(x, 64, dt=1.0)
    with pytest.raises(DomainError):
        fit_psd_exponent(psd, 0.6, 0.7)
    with pytest.raises(DomainError):
        fit_psd_exponent(psd, 0.30, 0.33)


def test_psd_hurst_large_sample():
    H = 0.7
    e = sample_fgn_circulant(H, TimeGrid(0.0, 1.0, 2**15), 4, seed=11)
    p = np.mean([welch_psd(row, 2048, dt=1.0).power for row in e.values], axis=0)
    psd = PsdEstimate(welch_psd(e.values[0], 2048, dt=1.0).frequencies, p, 2048, 0.5)
    est = hurst_from_psd(psd, f_high=0.1)
    assert est.h_mean == pytest.approx(H, abs=0.03)
    assert est.method == "psd"


def test_psd_estimate_invariants():
    with pytest.raises(DomainError):
        PsdEstimate(np.array([0.0, 1.0]), np.array([1.0, -1.0]), 8, 0.5)
    with pytest.raises(DomainError):
        PsdEstimate(np.array([1.0, 0.5]), np.array([1.0, 1.0]), 8, 0.5)


def test_variance_hurst_circulant_global_and_windowed():
    H = 0.65
    e = cumulative_paths(sample_fgn_circulant(H, TimeGrid(0.0, 1.0, 2048), 200, seed=4))
    g = hurst_from_variance(e, mode="global")
    w = hurst_from_variance(e)
    assert g.h_mean == pytest.approx(H, abs=0.03)
    assert w.h_mean == pytest.approx(H, abs=0.02)
    assert len(w.h_series) > 10
    with pytest.raises(EstimationError):
        hurst_from_variance(e.values[:10])
    with pytest.raises(DomainError):
        hurst_from_variance(e, mode="median")


def test_hurst_estimate_flags():
    assert HurstEstimate(1.2, 0.01).out_of_range
    assert not HurstEstimate(0.7, 0.01).out_of_range
    with pytest.raises(EstimationError):
        HurstEstimate(1.6, 0.01)
    with pytest.raises(DomainError):
        HurstEstimate(0.7, 0.01, method="guess")


def test_coherence_exact_stretched_exponentials():
    t = np.linspace(0.2, 2.0, 40)
    r = hurst_from_coherence((t, np.exp(-t**1.4)), kind="ramsey")
    assert r.h_mean == pytest.approx(0.70, abs=1e-10)
    e = hurst_from_coherence((t, np.exp(-t**3.4)), kind="echo")
    assert e.h_mean == pytest.approx(0.70, abs=1e-10)


@given(st.floats(0.52, 0.95), st.floats(0.5, 5.0))
def test_coherence_round_trip_constant_h(H, chi_end):
    t = np.geomspace(0.1, 5.0, 48)
    for kind in ("ramsey", "echo"):
        c = synthetic_coherence(t, HurstProfile.constant(H), kind, chi_end)
        assert hurst_from_coherence((t, c), kind=kind).h_mean == pytest.approx(H, abs=1e-9)


def test_coherence_non_monotone_window_skipped():
    t = np.linspace(0.2, 2.0, 32)
    c = np.exp(-t**1.4)
    c[3] = c[2] * 1.0001
    with pytest.warns(NumericWarning):
        r = hurst_from_coherence((t, c))
    assert r.h_mean == pytest.approx(0.7, abs=1e-8)


def test_coherence_input_errors():
    t = np.linspace(0.2, 2.0, 32)
    with pytest.raises(DomainError):
        hurst_from_coherence((t, np.exp(-t)), window_length=4)
    with pytest.raises(DomainError):
        hurst_from_coherence((t, np.exp(-t)), kind="cpmg")
    with pytest.raises(DomainError):
        hurst_from_coherence((t, np.zeros(32)))
    with pytest.raises(EstimationError):
        hurst_from_coherence((t, np.full(32, 0.9999)))


def test_consistency_check_threshold():
    t = np.geomspace(0.1, 5.0, 48)
    p = HurstProfile.sinusoid(0.65, 0.05, 40.0)
    hr = hurst_from_coherence((t, synthetic_coherence(t, p, "ramsey")), kind="ramsey")
    he = hurst_from_coherence((t, synthetic_coherence(t, p, "echo")), kind="echo")
    assert consistency_check(hr, he).passed
    bad = hurst_from_coherence((t, synthetic_coherence(t, p, "echo", offset=0.06)), kind="echo")
    rep = consistency_check(hr, bad)
    assert not rep.passed and rep.max_difference > 0.05 and rep.violations


def test_effective_sample_size():
    rng = np.random.default_rng(2)
    n, s = effective_sample_size(rng.standard_normal(4000))
    assert n > 3000
    assert s == pytest.approx(1 / (2 * math.sqrt(n)))
    ar = np.zeros(4000)
    z = rng.standard_normal(4000)
    for k in range(1, 4000):
        ar[k] = 0.9 * ar[k - 1] + z[k]
    n_ar, _ = effective_sample_size(ar)
    assert n_ar < 400
    with pytest.raises(DomainError):
        effective_sample_size(np.ones(10))


def test_csv_writers(tmp_path):
    x = np.random.default_rng(0).standard_normal(512)
    psd = welch_psd(x, 64, dt=1.0)
    d = read_csv(write_psd_csv(psd, tmp_path / "psd.csv"))
    assert list(d) == ["frequency", "power"]
    t = np.linspace(0.2, 2.0, 32)
    est = hurst_from_coherence((t, np.exp(-t**1.4)))
    d = read_csv(write_hurst_csv(est, tmp_path / "h.csv"))
    assert list(d) == ["t", "H", "stat_err", "sys_err", "method"]
    assert set(d["method"]) == {"ramsey_window"}
