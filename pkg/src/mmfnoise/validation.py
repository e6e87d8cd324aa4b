"""Analytic-limit checks run by ``mmfnoise validate``.

Each check compares a simulated or integrated quantity with a known limit
and returns a :class:`Check`.  The suite is deterministic for a given seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bath import (K_B, BathSpec, FilterKind, classical_chi, dephasing_chi, diffusion_coefficient,
                   effective_temperature, friction_coefficient)
from .mmfbm import (CovarianceModel, HurstProfile, TimeGrid, build_covariance_matrix, cumulative_paths,
                    sample_fgn_circulant)
from .numerics import fit_line
from .spectral import hurst_from_variance

__all__ = ["Check", "run_suite", "CHECKS"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    target: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.6g} (target {self.target})"


def check_constant_h_covariance(seed: int = 0) -> Check:
    """Locally stationary kernel with constant H equals the fBm covariance."""
    g = TimeGrid.spanning(4.0, 64)
    p = HurstProfile.constant(0.7)
    a = build_covariance_matrix(g, CovarianceModel("locally_stationary", p)).matrix
    b = build_covariance_matrix(g, CovarianceModel("constant_fbm", p)).matrix
    err = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
    return Check("constant-H kernel equals fBm covariance", err < 1e-14, err, "< 1e-14")


def check_fbm_variance(seed: int = 0) -> Check:
    """Circulant fBm: variance slope 2H."""
    H = 0.7
    inc = sample_fgn_circulant(H, TimeGrid(0.0, 1.0, 4096), 200, seed)
    est = hurst_from_variance(cumulative_paths(inc), mode="global")
    dev = abs(2.0 * est.h_mean - 2.0 * H)
    return Check("fBm variance exponent 2H (H=0.7)", dev < 0.05, 2.0 * est.h_mean, "1.4 +/- 0.05")


def _hot_bath(H, factor=100.0):
    wc = 2.0 * math.pi * 10.0
    return BathSpec(1.0, wc, HurstProfile.constant(H), factor * wc / K_B)


def check_high_t_classical(seed: int = 0) -> Check:
    """χ / χ_cl -> 1 at k_BT = 100 ħω_c."""
    spec = _hot_bath(0.7)
    t = np.logspace(-1, 1, 7)
    r = dephasing_chi(t, spec).chi / classical_chi(t, spec)
    dev = float(np.max(np.abs(r - 1.0)))
    return Check("high-T chi / chi_classical", dev < 0.01, dev, "|ratio - 1| < 0.01")


def check_t_eff(seed: int = 0) -> Check:
    spec = _hot_bath(0.7)
    r = effective_temperature(0.0, spec) / spec.temperature
    return Check("high-T effective temperature T_eff / T", abs(r - 1) < 0.01, r, "1 +/- 0.01")


def check_ohmic_log(seed: int = 0) -> Check:
    """Ohmic (s = 1) vacuum dephasing grows as ln(ω_c t)."""
    wc = 2.0 * math.pi * 10.0
    spec = BathSpec(1.0, wc, HurstProfile.constant(1.0), 1e-6)
    t = np.logspace(1, 3, 25) / wc
    chi = dephasing_chi(t, spec).chi
    r2 = fit_line(np.log(wc * t), chi).r_squared
    return Check("Ohmic logarithmic dephasing (k_BT << hbar/t)", r2 > 0.99, r2, "R^2 > 0.99")


def check_markov_rate(seed: int = 0) -> Check:
    """Ohmic high-T Γ_φ is constant at ω_c t >> 1."""
    spec = _hot_bath(1.0)
    wc = spec.omega_c
    t = np.logspace(2, 3, 11) / wc
    # the flat high-T spectrum needs no infrared regularization
    g = dephasing_chi(t, spec, omega_min=1e-6 / t[-1]).gamma_phi[1:-1]
    spread = float((g.max() - g.min()) / g.mean())
    return Check("Markovian constant dephasing rate (Ohmic, high T)", spread < 0.02, spread,
                 "relative spread < 0.02")


def check_einstein(seed: int = 0) -> Check:
    """``D = M γ k_B T`` for an Ohmic bath at high temperature."""
    spec = _hot_bath(1.0)
    w = 1e-6 * spec.omega_c
    g = friction_coefficient(0.0, spec, w).value
    r = diffusion_coefficient(0.0, spec, w) / (spec.mass * g * spec.k_B * spec.temperature)
    return Check("Einstein relation D / (M gamma k_B T)", abs(r - 1) < 0.01, r, "1 +/- 0.01")


def check_zero_coupling(seed: int = 0) -> Check:
    spec = BathSpec(0.0, 2.0 * math.pi * 10.0, HurstProfile.constant(0.7), 0.05)
    res = dephasing_chi(np.logspace(-2, 1, 5), spec, FilterKind.echo())
    m = float(np.max(np.abs(res.chi)))
    ok = m == 0.0 and bool(np.all(res.coherence == 1.0))
    return Check("zero coupling gives chi = 0", ok, m, "exactly 0")


CHECKS: tuple[Callable[[int], Check], ...] = (
    check_constant_h_covariance,
    check_fbm_variance,
    check_high_t_classical,
    check_t_eff,
    check_ohmic_log,
    check_markov_rate,
    check_einstein,
    check_zero_coupling,
)


def run_suite(seed: int = 0) -> list[Check]:
    return [c(seed) for c in CHECKS]
