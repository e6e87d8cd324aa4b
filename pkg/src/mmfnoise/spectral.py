"""PSD estimation, spectral exponent fits and Hurst-exponent extraction."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal as _sig

from .errors import DomainError, EstimationError, FitError, NumericWarning
from .io import write_csv
from .numerics import FitResult, fit_line, fit_power_law

__all__ = [
    "PsdEstimate",
    "HurstEstimate",
    "ConsistencyReport",
    "welch_psd",
    "fit_psd_exponent",
    "hurst_from_psd",
    "hurst_from_variance",
    "hurst_from_coherence",
    "consistency_check",
    "synthetic_coherence",
    "effective_sample_size",
    "write_psd_csv",
    "write_hurst_csv",
]

CONSISTENCY_THRESHOLD = 0.05
_METHODS = ("variance_scaling", "psd", "ramsey_window", "echo_window")


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided PSD; ``sum(power) * df`` equals the sample variance."""

    frequencies: np.ndarray
    power: np.ndarray
    segment_length: int
    overlap_fraction: float
    window: str = "hann"

    def __post_init__(self):
        if np.any(np.diff(self.frequencies) <= 0):
            raise DomainError("PSD frequencies must be strictly increasing")
        if np.any(self.power < 0):
            raise DomainError("PSD power must be non-negative")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise DomainError("overlap_fraction must lie in [0, 1)")

    @property
    def df(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


@dataclass(frozen=True)
class HurstEstimate:
    h_mean: float
    stat_err: float
    sys_err: float = 0.0
    method: str = "variance_scaling"
    h_series: tuple | None = None
    prefactor: float | None = None
    stat_series: tuple | None = None
    sys_series: tuple | None = None
    out_of_range: bool = field(init=False, default=False)

    def __post_init__(self):
        if self.method not in _METHODS:
            raise DomainError(f"unknown Hurst method {self.method!r}")
        if self.stat_err < 0 or self.sys_err < 0:
            raise DomainError("error bars must be non-negative")
        if not 0.0 < self.h_mean < 1.5:
            raise EstimationError(f"estimated H={self.h_mean:.4g} outside (0, 1.5)")
        # outside the model range (1/2, 1) is flagged, not clamped
        object.__setattr__(self, "out_of_range", not 0.5 < self.h_mean < 1.0)

    @property
    def times(self) -> np.ndarray:
        return np.array([p[0] for p in self.h_series]) if self.h_series else np.array([])

    @property
    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.h_series]) if self.h_series else np.array([])


def _as_series(path):
    values = getattr(path, "values", path)
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise DomainError("welch_psd expects a single series")
    grid = getattr(path, "grid", None)
    dt = grid.dt if grid is not None else 1.0
    return values, dt


def welch_psd(path, segment_length: int = 128, overlap_fraction: float = 0.5, dt: float | None = None,
              detrend: str = "constant") -> PsdEstimate:
    """Hann-windowed, overlapped and averaged one-sided periodogram.

    ``path`` is a :class:`~mmfnoise.mmfbm.NoisePath` (sampling step taken
    from its grid) or a plain array with ``dt``.  The density is rescaled so
    that ``sum(power) * df`` equals the sample variance of the series.
    """
    x, gdt = _as_series(path)
    dt = gdt if dt is None else float(dt)
    n = x.size
    seg = int(segment_length)
    if seg > n:
        raise EstimationError(f"segment_length {seg} exceeds series length {n}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise DomainError("overlap_fraction must lie in [0, 1)")
    noverlap = int(round(seg * overlap_fraction))
    nseg = 1 + (n - seg) // (seg - noverlap)
    if nseg < 2:
        raise EstimationError(f"only {nseg} Welch segment(s); need at least 2")
    f, p = _sig.welch(x, fs=1.0 / dt, window="hann", nperseg=seg, noverlap=noverlap,
                      detrend=detrend, scaling="density", return_onesided=True)
    var = float(np.var(x))
    total = float(np.sum(p) * (f[1] - f[0]))
    if total > 0:
        p = p * (var / total)
    return PsdEstimate(f, p, seg, float(overlap_fraction))


def fit_psd_exponent(psd: PsdEstimate, f_low: float | None = None, f_high: float | None = None) -> FitResult:
    """Fit ``S(f) ∝ f^-β`` on ``f_low <= f <= f_high``; the returned slope is β."""
    f, p = psd.frequencies, psd.power
    lo = f[f > 0][0] if f_low is None else f_low
    hi = f[-1] if f_high is None else f_high
    band = (f >= lo) & (f <= hi) & (f > 0)
    if not band.any():
        raise DomainError(f"empty frequency band [{lo:.4g}, {hi:.4g}]")
    if band.sum() < 6:
        raise DomainError(f"band [{lo:.4g}, {hi:.4g}] holds {band.sum()} bins; need at least 6")
    r = fit_power_law(f[band], p[band])
    return FitResult(-r.slope, r.intercept, r.stderr_slope, r.r_squared, r.n_points)


def hurst_from_psd(psd: PsdEstimate, f_low=None, f_high=None) -> HurstEstimate:
    """``H = (β + 1)/2`` from the PSD of an increment series."""
    r = fit_psd_exponent(psd, f_low, f_high)
    return HurstEstimate((r.slope + 1.0) / 2.0, r.stderr_slope / 2.0, method="psd")


def _ens_values(ensemble):
    vals = np.atleast_2d(np.asarray(getattr(ensemble, "values", ensemble), dtype=float))
    grid = getattr(ensemble, "grid", None)
    return vals, grid


def hurst_from_variance(
    ensemble,
    *,
    mode: str = "windowed",
    times=None,
    window: int = 64,
    max_lag: int = 8,
    min_paths: int = 100,
    profile=None,
) -> HurstEstimate:
    """Hurst exponent from ensemble variance scaling.

    ``mode="global"`` fits ``log Var[M(t)]`` against ``log t`` over all
    ``t > 0`` and halves the slope.  ``mode="windowed"`` (default) fits the
    increment variance ``Var[M(t+kΔ) - M(t)] ∝ (kΔ)^2H`` for lags
    ``k = 1..max_lag`` inside sliding windows of ``window`` points with 50%
    overlap, giving a local ``H(t)`` series whose mean is ``h_mean``.  The
    windowed form tracks time-dependent profiles; the global fit mixes the
    exponent with the ``log t`` dependence of ``H(t)``.
    """
    vals, grid = _ens_values(ensemble)
    if vals.shape[0] < min_paths:
        raise EstimationError(f"need at least {min_paths} paths, got {vals.shape[0]}")
    t = grid.times if grid is not None else (np.arange(vals.shape[1]) if times is None else np.asarray(times))
    if mode == "global":
        var = np.mean(vals**2, axis=0)
        keep = t > 0
        if not np.all(var[keep] > 0):
            raise EstimationError("variance vanishes at t > 0 (all-zero paths?)")
        r = fit_power_law(t[keep], var[keep])
        return HurstEstimate(r.slope / 2.0, r.stderr_slope / 2.0, method="variance_scaling",
                             prefactor=math.exp(r.intercept))
    if mode != "windowed":
        raise DomainError(f"unknown mode {mode!r}")
    n = vals.shape[1]
    if window > n or max_lag >= window:
        raise EstimationError("window must fit the series and exceed max_lag")
    dt = float(t[1] - t[0])
    lags = np.arange(1, max_lag + 1)
    centers, hs, errs = [], [], []
    for start in range(0, n - window + 1, window // 2):
        seg = vals[:, start:start + window]
        v = np.array([np.mean((seg[:, k:] - seg[:, :-k]) ** 2) for k in lags])
        if not np.all(v > 0):
            raise EstimationError("increment variance vanishes (all-zero paths?)")
        r = fit_power_law(lags * dt, v)
        centers.append(float(t[start] + 0.5 * (window - 1) * dt))
        hs.append(r.slope / 2.0)
        errs.append(r.stderr_slope / 2.0)
    hs = np.array(hs)
    stat = float(np.std(hs, ddof=1) / math.sqrt(hs.size)) if hs.size > 1 else float(errs[0])
    sys_series = None
    sys_err = 0.0
    if profile is not None:
        sys_series = np.abs(np.asarray(profile.derivative(np.array(centers)))) * (window - 1) * dt
        sys_err = float(np.mean(sys_series))
    return HurstEstimate(
        float(hs.mean()), stat, sys_err, "variance_scaling",
        tuple(zip(centers, hs.tolist())), None, tuple(errs),
        None if sys_series is None else tuple(sys_series.tolist()),
    )


def hurst_from_coherence(coherence, window_length: int = 8, kind: str = "ramsey", profile=None,
                         times=None) -> HurstEstimate:
    """Stretched-exponential window fits of ``C(t) = exp(-A t^γ)``.

    ``coherence`` is a ``(t, C)`` pair or a DephasingResult.  Each window
    fits ``ln(-ln C)`` against ``ln t`` (points with ``C > 0.999`` or
    ``C < 1e-4`` excluded); ``H_R = γ/2`` for Ramsey, ``H_E = (γ-2)/2`` for
    echo.  Windows overlap by 50%.  ``sys_err`` per window is
    ``|H'(t)| * window duration`` when ``profile`` is given.
    """
    if hasattr(coherence, "coherence"):
        t, c = np.asarray(coherence.times, float), np.asarray(coherence.coherence, float)
    else:
        t, c = (np.asarray(a, dtype=float) for a in coherence)
    if kind not in ("ramsey", "echo"):
        raise DomainError(f"unknown coherence kind {kind!r}")
    if window_length < 6:
        raise DomainError("window_length must be >= 6")
    if t.size != c.size or t.size < window_length:
        raise DomainError("coherence series shorter than one window")
    if np.any(c >= 1.0 + 1e-15) or np.any(c <= 0.0):
        raise DomainError("coherence must lie in (0, 1]")
    if np.any(t <= 0):
        raise DomainError("coherence times must be positive")
    centers, hs, errs, syss, amps = [], [], [], [], []
    step = max(1, window_length // 2)
    for start in range(0, t.size - window_length + 1, step):
        tw, cw = t[start:start + window_length], c[start:start + window_length]
        if np.any(np.diff(cw) > 0):
            warnings.warn(f"non-monotone coherence in window at t={tw[0]:.4g}; skipped",
                          NumericWarning, stacklevel=2)
            continue
        keep = (cw <= 0.999) & (cw >= 1e-4)
        if keep.sum() < 2:
            continue
        try:
            r = fit_line(np.log(tw[keep]), np.log(-np.log(cw[keep])))
        except FitError:
            continue
        g = r.slope
        h = g / 2.0 if kind == "ramsey" else (g - 2.0) / 2.0
        centers.append(float(np.sqrt(tw[0] * tw[-1])))
        hs.append(h)
        errs.append(r.stderr_slope / 2.0)
        amps.append(math.exp(r.intercept))
        if profile is not None:
            syss.append(abs(float(profile.derivative(centers[-1]))) * float(tw[-1] - tw[0]))
        else:
            syss.append(0.0)
    if not hs:
        raise EstimationError("no usable coherence window")
    hs = np.array(hs)
    stat = float(np.sqrt(np.mean(np.square(errs))))
    return HurstEstimate(
        float(hs.mean()), stat, float(np.mean(syss)), f"{kind}_window",
        tuple(zip(centers, hs.tolist())), float(np.mean(amps)), tuple(errs), tuple(syss),
    )


@dataclass(frozen=True)
class ConsistencyReport:
    passed: bool
    max_difference: float
    threshold: float
    violations: tuple  # (t, |H_R - H_E|) pairs above threshold


def consistency_check(h_r: HurstEstimate, h_e: HurstEstimate,
                      threshold: float = CONSISTENCY_THRESHOLD) -> ConsistencyReport:
    """Pointwise ``|H_R - H_E| < threshold`` on the common time support."""
    if not h_r.h_series or not h_e.h_series:
        d = abs(h_r.h_mean - h_e.h_mean)
        return ConsistencyReport(d < threshold, d, threshold, () if d < threshold else ((math.nan, d),))
    tr, vr = h_r.times, h_r.values
    te, ve = h_e.times, h_e.values
    lo, hi = max(tr.min(), te.min()), min(tr.max(), te.max())
    if lo > hi:
        raise DomainError("Hurst series have disjoint time supports")
    # evaluate at both sets of window centres inside the overlap
    tt = np.unique(np.concatenate([tr, te]))
    tt = tt[(tt >= lo) & (tt <= hi)]
    d = np.abs(np.interp(tt, tr, vr) - np.interp(tt, te, ve))
    bad = d >= threshold
    viol = tuple(zip(tt[bad].tolist(), d[bad].tolist()))
    return ConsistencyReport(not bad.any(), float(d.max()), threshold, viol)


def synthetic_coherence(times, profile, kind: str = "ramsey", chi_end: float = 3.0, offset: float = 0.0):
    """Envelope ``C = exp(-A t^γ(t))`` with ``γ = 2H`` (Ramsey) or ``2H+2`` (echo).

    ``H(t) = profile(t) + offset``; ``A`` is chosen so that ``χ(t_max) = chi_end``.
    These are the curves :func:`hurst_from_coherence` inverts exactly.
    """
    t = np.asarray(times, dtype=float)
    if np.any(t <= 0):
        raise DomainError("times must be positive")
    if kind not in ("ramsey", "echo"):
        raise DomainError(f"unknown coherence kind {kind!r}")
    h = np.asarray(profile(t), dtype=float) + offset
    g = 2.0 * h if kind == "ramsey" else 2.0 * h + 2.0
    amp = chi_end / t[-1] ** g[-1]
    return np.exp(-amp * t**g)


def effective_sample_size(series) -> tuple[float, float]:
    """``(N_eff, σ_H)`` with ``N_eff = N / (1 + 2 Σ ρ(k))`` and ``σ_H = 1/(2√N_eff)``.

    The autocorrelation sum stops at the first non-positive ``ρ(k)``.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2:
        raise DomainError("effective_sample_size needs N >= 2")
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0:
        raise DomainError("zero-variance series")
    nfft = 1 << (2 * n - 1).bit_length()
    fx = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(fx * np.conj(fx), nfft)[:n] / n
    rho = acov / acov[0]
    s = 0.0
    for k in range(1, n):
        if rho[k] <= 0:
            break
        s += rho[k]
    neff = min(float(n), max(1.0, n / (1.0 + 2.0 * s)))
    return neff, 1.0 / (2.0 * math.sqrt(neff))


def write_psd_csv(psd: PsdEstimate, path, meta=None) -> Path:
    m = {"segment_length": psd.segment_length, "overlap_fraction": psd.overlap_fraction,
         "window": psd.window}
    m.update(meta or {})
    return write_csv(path, ["frequency", "power"], [psd.frequencies, psd.power], m)


def write_hurst_csv(est: HurstEstimate, path, meta=None) -> Path:
    if est.h_series:
        t, h = est.times, est.values
        stat = est.stat_series or (est.stat_err,) * len(t)
        sys_ = est.sys_series or (est.sys_err,) * len(t)
    else:
        t, h, stat, sys_ = [math.nan], [est.h_mean], [est.stat_err], [est.sys_err]
    m = {"h_mean": est.h_mean, "stat_err": est.stat_err, "sys_err": est.sys_err}
    m.update(meta or {})
    return write_csv(path, ["t", "H", "stat_err", "sys_err", "method"],
                     [t, h, stat, sys_, [est.method] * len(t)], m)
