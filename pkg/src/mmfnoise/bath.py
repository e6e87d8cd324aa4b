"""Time-dependent Caldeira-Leggett bath and filter-function dephasing.

Simulation units: time in ns, angular frequency in rad/ns, temperature in K,
ħ = 1, so energies are expressed as angular frequencies and
``k_B = 130.92... rad ns^-1 K^-1``.

The spectral density is

    J(ω; t) = η(t) ω_c^(1-s(t)) ω^s(t) e^(-ω/ω_c),   s(t) = 2H(t) - 1,

and the dephasing function for a pulse sequence with filter ``F(ω; t)`` is

    χ(t) = (1/πħ²) ∫_{ω_min}^∞ S(ω; t) F(ω; t) dω,

with ``S = J coth(ħω/2k_BT)`` (bath mode) or a direct power law
``S = A ω^-(2H-1)`` (phenomenological mode).  Coherence is ``exp(-χ)``.
All kernels are evaluated at the observation time.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import constants as _const

from .errors import AdiabaticityWarning, DomainError, NumericError
from .io import write_csv
from .mmfbm import HurstProfile
from .numerics import QuadratureSpec, integrate

__all__ = [
    "HBAR",
    "K_B",
    "BathSpec",
    "PowerLawNoise",
    "FilterKind",
    "DephasingResult",
    "FrictionResult",
    "spectral_density",
    "noise_power",
    "noise_kernel",
    "dissipation_kernel",
    "friction_coefficient",
    "effective_temperature",
    "diffusion_coefficient",
    "filter_function",
    "dephasing_chi",
    "coherence_curves",
    "classical_chi",
    "crossover_time",
    "bath_correlation_time",
    "adiabaticity_report",
    "write_coherence_csv",
    "write_kernel_csv",
]

HBAR = 1.0
# k_B / ħ in rad ns^-1 K^-1
K_B = _const.k / _const.hbar * 1e-9
ADIABATIC_WARN = 0.1

_QSPEC = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-10, max_subdivisions=400, grid_kind="logarithmic")
_TAIL_DECAYS = 60.0  # e^-60 ~ 1e-26: upper limit in units of ω_c


def _as_fn(x) -> Callable:
    if callable(x):
        return x
    v = float(x)
    return lambda t: v


@dataclass(frozen=True)
class BathSpec:
    """Everything that defines ``J(ω; t)`` and ``S_B(ω; t)``.

    ``coupling_eta`` is a constant or a function of time (k_B-compatible
    units, rad/ns).  ``mass`` only enters the friction coefficient.
    """

    coupling_eta: float | Callable = 1.0
    omega_c: float = 2.0 * math.pi * 10.0
    profile: HurstProfile = field(default_factory=lambda: HurstProfile.constant(0.7))
    temperature: float = 0.05
    mass: float = 1.0
    hbar: float = HBAR
    k_B: float = K_B

    def __post_init__(self):
        if not self.omega_c > 0:
            raise DomainError("omega_c must be positive")
        if not self.temperature > 0:
            raise DomainError("temperature must be positive")
        if not self.mass > 0:
            raise DomainError("mass must be positive")
        if not callable(self.coupling_eta) and self.coupling_eta < 0:
            raise DomainError("coupling eta must be >= 0")

    @classmethod
    def from_coupling(cls, A: float, omega_c: float, profile: HurstProfile, temperature: float,
                      **kw) -> "BathSpec":
        """``J = (A²ħ/π) (ω/ω_c)^s e^(-ω/ω_c)``, i.e. ``η = A²ħ/(π ω_c)``."""
        hbar = kw.get("hbar", HBAR)
        return cls(A * A * hbar / (math.pi * omega_c), omega_c, profile, temperature, **kw)

    def eta(self, t) -> float:
        return float(_as_fn(self.coupling_eta)(t))

    def ohmicity(self, t) -> float:
        """``s(t) = 2H(t) - 1``, required to lie in [0, 1]."""
        s = 2.0 * float(self.profile(t)) - 1.0
        if not -1e-12 <= s <= 1.0 + 1e-12:
            raise DomainError(f"ohmicity s={s:.4g} at t={t:.4g} outside [0, 1]")
        return min(1.0, max(0.0, s))

    def with_temperature(self, T: float) -> "BathSpec":
        return BathSpec(self.coupling_eta, self.omega_c, self.profile, T, self.mass, self.hbar, self.k_B)

    def thermal_frequency(self) -> float:
        return self.k_B * self.temperature / self.hbar


@dataclass(frozen=True)
class PowerLawNoise:
    """Phenomenological spectrum ``S(ω; t) = amplitude · ω^-(2H(t)-1)``."""

    amplitude: float = 1.0
    profile: HurstProfile = field(default_factory=lambda: HurstProfile.constant(0.7))
    hbar: float = HBAR

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError("amplitude must be >= 0")

    def beta(self, t) -> float:
        return 2.0 * float(self.profile(t)) - 1.0


def spectral_density(omega, t: float, spec: BathSpec):
    """``J(ω; t)``; ``J(0) = 0`` for ``s > 0``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral_density requires omega >= 0")
    s = spec.ohmicity(t)
    wc = spec.omega_c
    with np.errstate(divide="ignore"):
        out = spec.eta(t) * wc ** (1.0 - s) * np.where(w > 0, w, 0.0) ** s * np.exp(-w / wc)
    if s == 0.0:
        out = np.where(w == 0, spec.eta(t) * wc, out)
    return float(out) if out.ndim == 0 else out


def _coth(x):
    return 1.0 / np.tanh(x)


def noise_power(omega, t: float, spec):
    """Noise PSD ``S(ω; t)``: ``J coth(ħω/2k_BT)`` or the power law."""
    w = np.asarray(omega, dtype=float)
    if isinstance(spec, PowerLawNoise):
        out = spec.amplitude * w ** (-spec.beta(t))
    else:
        out = spectral_density(w, t, spec) * _coth(spec.hbar * w / (2.0 * spec.k_B * spec.temperature))
    return float(out) if np.ndim(out) == 0 else out


def _omega_max(spec: BathSpec) -> float:
    return _TAIL_DECAYS * spec.omega_c


def _log_points(lo, hi, per_decade=2):
    if hi <= lo:
        return []
    n = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return list(np.geomspace(lo, hi, n)[1:-1])


def _fourier(g, tau, kind, lower, upper, scale_pts, spec=_QSPEC):
    """``∫ g(ω) cos|sin(ωτ) dω`` on [lower, upper] with a non-oscillatory head."""
    tau = float(tau)
    trig = np.cos if kind == "cos" else np.sin
    if tau == 0.0:
        if kind == "sin":
            return 0.0
        return integrate(g, lower, upper, spec, points=scale_pts)
    head_end = min(upper, 2.0 * math.pi / abs(tau))
    pts = [p for p in scale_pts if p < head_end]
    head = integrate(lambda w: g(w) * trig(w * tau), lower, head_end, spec, points=pts)
    if head_end >= upper:
        return head
    tail = integrate(g, head_end, upper, spec, weight=kind, wvar=tau)
    return head + tail


def _kernel_points(spec: BathSpec):
    wth = spec.thermal_frequency()
    wc = spec.omega_c
    pts = _log_points(wc * 1e-12, wc, 2) + [wc, 5 * wc, 20 * wc]
    if 0 < wth < _omega_max(spec):
        pts.append(wth)
    return sorted(set(pts))


def noise_kernel(tau: float, t_m: float, spec: BathSpec) -> float:
    """``L(τ) = (1/π) ∫ J(ω; t_m) coth(ħω/2k_BT) cos(ωτ) dω``; even in τ.

    For ``s = 0`` the integrand behaves as ``1/ω`` at low frequency and the
    kernel diverges at any finite temperature.
    """
    if spec.ohmicity(t_m) == 0.0:
        raise DomainError("noise kernel diverges logarithmically for s = 0 at T > 0")
    g = lambda w: noise_power(w, t_m, spec)
    return _fourier(g, abs(tau), "cos", 0.0, _omega_max(spec), _kernel_points(spec)) / math.pi


def dissipation_kernel(tau: float, t_m: float, spec: BathSpec) -> float:
    """``α(τ) = -(1/π) ∫ J(ω; t_m) sin(ωτ) dω``; odd in τ, temperature independent."""
    if tau == 0.0:
        return 0.0
    g = lambda w: spectral_density(w, t_m, spec)
    val = _fourier(g, abs(tau), "sin", 0.0, _omega_max(spec), _kernel_points(spec)) / math.pi
    return -math.copysign(val, tau)


@dataclass(frozen=True)
class FrictionResult:
    value: float
    divergent: bool
    power: float  # local power of J/ω at ω -> 0, i.e. s - 1


def friction_coefficient(t: float, spec: BathSpec, omega_eval: float) -> FrictionResult:
    """``γ(t) = J(ω_eval; t) / (2M ω_eval)``; the ω->0 limit diverges for s < 1."""
    if not omega_eval > 0:
        raise DomainError("omega_eval must be positive")
    s = spec.ohmicity(t)
    val = float(spectral_density(omega_eval, t, spec)) / (2.0 * spec.mass * omega_eval)
    return FrictionResult(val, s < 1.0, s - 1.0)


def effective_temperature(t: float, spec: BathSpec) -> float:
    """``T_eff = (ħ/2k_B) ∫ J ω coth(ħω/2k_BT) dω / ∫ J dω``.

    ``ω coth`` tends to ``2k_BT/ħ`` at low frequency, so ``T_eff -> T`` when
    ``k_BT >> ħω_c`` and ``T_eff >= T`` always.
    """
    pts = _kernel_points(spec)
    wmax = _omega_max(spec)
    x = lambda w: spec.hbar * w / (2.0 * spec.k_B * spec.temperature)

    def num(w):
        xv = x(w)
        # ω coth(x) written as (2k_BT/ħ) x coth x, finite at x -> 0
        xc = xv / math.tanh(xv) if xv > 0 else 1.0
        return float(spectral_density(w, t, spec)) * xc

    top = integrate(num, 0.0, wmax, _QSPEC, points=pts)
    bottom = integrate(lambda w: float(spectral_density(w, t, spec)), 0.0, wmax, _QSPEC, points=pts)
    if bottom == 0.0:
        return float(spec.temperature)
    return spec.temperature * top / bottom


def diffusion_coefficient(t: float, spec: BathSpec, omega_eval: float) -> float:
    """Momentum diffusion ``D = M γ(t) k_B T_eff(t)``."""
    g = friction_coefficient(t, spec, omega_eval).value
    return spec.mass * g * spec.k_B * effective_temperature(t, spec)


# --- filters -----------------------------------------------------------------


@dataclass(frozen=True)
class FilterKind:
    """``ramsey``, ``echo`` or ``cpmg`` with ``n`` even.

    ``cpmg(n)`` places ``n/2`` equally spaced π-pulses at
    ``t_k = t (k - 1/2) / (n/2)``, so that ``cpmg(2)`` is the Hahn echo.
    """

    kind: str = "ramsey"
    n: int = 0

    def __post_init__(self):
        if self.kind not in ("ramsey", "echo", "cpmg"):
            raise DomainError(f"unknown filter {self.kind!r}")
        if self.kind == "cpmg" and (self.n < 2 or self.n % 2):
            raise DomainError("cpmg requires even n >= 2")

    @classmethod
    def ramsey(cls):
        return cls("ramsey")

    @classmethod
    def echo(cls):
        return cls("echo")

    @classmethod
    def cpmg(cls, n: int):
        return cls("cpmg", int(n))

    @classmethod
    def parse(cls, text: str) -> "FilterKind":
        text = text.strip().lower()
        if text.startswith("cpmg"):
            return cls.cpmg(int(text[4:].strip("()_- ") or 0))
        return cls(text)

    @property
    def n_pulses(self) -> int:
        return {"ramsey": 0, "echo": 1}.get(self.kind, self.n // 2)

    def __str__(self):
        return f"cpmg{self.n}" if self.kind == "cpmg" else self.kind

    def switching_times(self, t: float) -> np.ndarray:
        npul = self.n_pulses
        inner = t * (np.arange(1, npul + 1) - 0.5) / npul if npul else np.empty(0)
        return np.concatenate([[0.0], inner, [t]])

    def coefficients(self) -> np.ndarray:
        npul = self.n_pulses
        c = np.empty(npul + 2)
        c[0] = -1.0
        c[1:npul + 1] = 2.0 * (-1.0) ** np.arange(npul)
        c[-1] = (-1.0) ** npul
        return c

    def cosine_terms(self, t: float):
        """``(C0, lags, D)`` with ``ω² F(ω) = C0 + Σ D_l cos(ω lag_l)``."""
        tk = self.switching_times(t)
        c = self.coefficients()
        c0 = float(c @ c)
        acc = {}
        for i in range(tk.size):
            for j in range(i + 1, tk.size):
                key = round((tk[j] - tk[i]) / t * 4 * max(1, self.n_pulses))
                lag, d = acc.get(key, (tk[j] - tk[i], 0.0))
                acc[key] = (lag, d + 2.0 * c[i] * c[j])
        lags = np.array([v[0] for v in acc.values()])
        ds = np.array([v[1] for v in acc.values()])
        keep = ds != 0
        return c0, lags[keep], ds[keep]


def filter_function(omega, t: float, filt: FilterKind):
    """``F(ω; t) ≥ 0``; Ramsey ``4 sin²(ωt/2)/ω²``, echo ``16 sin⁴(ωt/4)/ω²``."""
    w = np.asarray(omega, dtype=float)
    if filt.kind == "ramsey":
        out = 4.0 * np.sin(w * t / 2.0) ** 2 / w**2
    elif filt.kind == "echo":
        out = 16.0 * np.sin(w * t / 4.0) ** 4 / w**2
    else:
        tk = filt.switching_times(t)
        c = filt.coefficients()
        z = np.exp(1j * np.multiply.outer(w, tk)) @ c
        out = np.abs(z) ** 2 / w**2
    return float(out) if out.ndim == 0 else out


# --- dephasing ---------------------------------------------------------------


@dataclass(frozen=True)
class DephasingResult:
    times: np.ndarray
    chi: np.ndarray
    gamma_phi: np.ndarray
    coherence: np.ndarray
    spec: object
    filter: FilterKind
    omega_min: float
    warnings: tuple = ()

    @property
    def temperature(self):
        return getattr(self.spec, "temperature", None)


_KAPPA = 4.0


def _chi_single(S, t, filt, omega_min, omega_max, prefactor):
    wx = _KAPPA * max(1, filt.n_pulses) * 2.0 * math.pi / t
    wl = max(wx, 10.0 * omega_min)
    upper_dir = min(wl, omega_max)
    # geometric panels below 2π/t, half-period panels of the fastest term above
    w1 = min(2.0 * math.pi / t, upper_dir)
    pts = _log_points(omega_min, w1, 2) + [w1]
    if upper_dir > w1:
        step = math.pi / t
        pts += list(np.arange(w1 + step, upper_dir, step))
    f = lambda w: S(w) * filter_function(w, t, filt)
    lower = integrate(f, omega_min, upper_dir, _QSPEC, points=pts)
    if upper_dir >= omega_max:
        return prefactor * lower
    tol = max(abs(lower), 1e-300) * 1e-11
    tspec = QuadratureSpec(abs_tol=tol, rel_tol=1e-10, max_subdivisions=400)
    c0, lags, ds = filt.cosine_terms(t)
    g = lambda w: S(w) / (w * w)
    upper = c0 * integrate(g, wl, omega_max, tspec, points=None if math.isinf(omega_max)
                           else _log_points(wl, omega_max, 2))
    for lag, d in zip(lags, ds):
        upper += d * integrate(g, wl, omega_max, tspec, weight="cos", wvar=float(lag))
    return prefactor * (lower + upper)


def _adiabatic_messages(times, profile, eta_fn, tau_b):
    msgs = []
    t = np.asarray(times, dtype=float)
    h = np.asarray(profile(t), dtype=float)
    rh = float(np.max(np.abs(np.asarray(profile.derivative(t))) / h)) * tau_b
    if rh > ADIABATIC_WARN:
        msgs.append(f"adiabaticity: max |H'/H| tau_B = {rh:.3g} exceeds {ADIABATIC_WARN}")
    if eta_fn is not None and callable(eta_fn):
        e = np.array([eta_fn(x) for x in t], dtype=float)
        de = np.gradient(e, t) if t.size > 1 else np.zeros(1)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(e > 0, np.abs(de) / e, 0.0)
        re = float(np.max(r)) * tau_b
        if re > ADIABATIC_WARN:
            msgs.append(f"adiabaticity: max |eta'/eta| tau_B = {re:.3g} exceeds {ADIABATIC_WARN}")
    return msgs


def bath_correlation_time(spec: BathSpec) -> float:
    """``τ_B = max(1/ω_c, ħ/k_BT)``."""
    return max(1.0 / spec.omega_c, crossover_time(spec.temperature, spec))


def adiabaticity_report(times, spec) -> list[str]:
    if isinstance(spec, PowerLawNoise):
        return []
    return _adiabatic_messages(times, spec.profile, spec.coupling_eta, bath_correlation_time(spec))


def dephasing_chi(times, spec, filt: FilterKind | None = None, omega_min: float | None = None,
                  *, check_monotone: bool = True) -> DephasingResult:
    """``χ(t)``, ``Γ_φ = dχ/dt`` and ``C = exp(-χ)`` on ``times``.

    ``spec`` is a :class:`BathSpec` (``S = J coth``) or a
    :class:`PowerLawNoise`.  The default infrared cutoff is
    ``ω_min = 2π / (100 max(times))``.  Frequencies below a few times the
    fastest filter oscillation are integrated directly; above that the filter
    is split into cosine terms handled by Fourier-weighted quadrature.
    """
    t = np.asarray(times, dtype=float)
    filt = filt or FilterKind.ramsey()
    if t.ndim != 1 or t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise DomainError("times must be positive and strictly increasing")
    wmin = 2.0 * math.pi / (100.0 * t[-1]) if omega_min is None else float(omega_min)
    if not wmin > 0:
        raise DomainError("omega_min must be positive")
    if isinstance(spec, PowerLawNoise):
        wmax = math.inf
        pref = 1.0 / (math.pi * spec.hbar**2)
    elif isinstance(spec, BathSpec):
        wmax = _omega_max(spec)
        pref = 1.0 / (math.pi * spec.hbar**2)
    else:
        raise DomainError("spec must be a BathSpec or PowerLawNoise")
    chi = np.empty(t.size)
    for k, tk in enumerate(t):
        S = (lambda tt: (lambda w: noise_power(w, tt, spec)))(tk)
        try:
            chi[k] = _chi_single(S, tk, filt, wmin, wmax, pref)
        except NumericError as exc:
            raise NumericError(f"dephasing_chi at t={tk:.6g}: {exc}",
                               estimate=exc.estimate, error_bound=exc.error_bound) from None
    chi = np.maximum(chi, 0.0)
    if check_monotone and t.size > 1:
        d = np.diff(chi)
        tol = 1e-8 * max(float(np.max(chi)), 1e-300)
        if np.any(d < -tol):
            k = int(np.flatnonzero(d < -tol)[0])
            raise NumericError(f"chi decreases between t={t[k]:.6g} and t={t[k + 1]:.6g}")
    gphi = np.gradient(chi, t) if t.size > 1 else np.zeros(1)
    msgs = adiabaticity_report(t, spec)
    for m in msgs:
        warnings.warn(m, AdiabaticityWarning, stacklevel=2)
    return DephasingResult(t, chi, gphi, np.exp(-chi), spec, filt, wmin, tuple(msgs))


def coherence_curves(spec: BathSpec, times, temperatures: Sequence[float],
                     filt: FilterKind | None = None, omega_min: float | None = None) -> list[DephasingResult]:
    """One :class:`DephasingResult` per temperature; χ is checked to grow with T."""
    temps = list(temperatures)
    if not temps:
        raise DomainError("temperature list is empty")
    out = [dephasing_chi(times, spec.with_temperature(T), filt, omega_min) for T in temps]
    order = np.argsort(temps)
    for a, b in zip(order[:-1], order[1:]):
        lo, hi = out[a].chi, out[b].chi
        if np.any(hi < lo * (1.0 - 1e-9)):
            raise NumericError(f"chi not monotone in temperature between T={temps[a]} and T={temps[b]}")
    return out


def classical_chi(times, spec: BathSpec, filt: FilterKind | None = None,
                  omega_min: float | None = None) -> np.ndarray:
    """High-temperature limit ``(2k_BT/πħ³) ∫ J(ω;t)/ω F(ω;t) dω``."""
    t = np.asarray(times, dtype=float)
    filt = filt or FilterKind.ramsey()
    wmin = 2.0 * math.pi / (100.0 * t[-1]) if omega_min is None else float(omega_min)
    pref = 2.0 * spec.k_B * spec.temperature / (math.pi * spec.hbar**3)
    out = np.empty(t.size)
    for k, tk in enumerate(t):
        S = (lambda tt: (lambda w: spectral_density(w, tt, spec) / w))(tk)
        out[k] = _chi_single(S, tk, filt, wmin, _omega_max(spec), pref)
    return out


def crossover_time(temperature: float, spec: BathSpec | None = None) -> float:
    """``t_cross = ħ / (k_B T)`` in ns."""
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    hbar = spec.hbar if spec is not None else HBAR
    kb = spec.k_B if spec is not None else K_B
    return hbar / (kb * temperature)


def write_coherence_csv(results: Sequence[DephasingResult], path, meta=None) -> Path:
    cols = [[], [], [], [], [], []]
    for r in results:
        n = r.times.size
        T = r.temperature
        for c, v in zip(cols, (r.times, r.chi, r.gamma_phi, r.coherence,
                               [math.nan if T is None else T] * n, [str(r.filter)] * n)):
            c.extend(v)
    m = {"omega_min": results[0].omega_min if results else math.nan,
         "warnings": sorted({w for r in results for w in r.warnings})}
    m.update(meta or {})
    return write_csv(path, ["t", "chi", "gamma_phi", "coherence", "temperature", "filter"], cols, m)


def write_kernel_csv(taus, t_m: float, spec: BathSpec, path, meta=None) -> Path:
    taus = np.asarray(taus, dtype=float)
    L = [noise_kernel(x, t_m, spec) for x in taus]
    a = [dissipation_kernel(x, t_m, spec) for x in taus]
    return write_csv(path, ["tau", "L", "alpha"], [taus, L, a], meta)
