"""Hurst profiles, mmfBm/fBm covariance kernels and path generators.

Three covariance variants are available:

``exact_rl``
    Covariance of the Riemann-Liouville integral
    ``M(t) = Γ(H(t)+1/2)^-1 ∫_0^t (t-s)^(H(t)-1/2) dW(s)``, in closed form
    through a Gauss hypergeometric function.
``locally_stationary``
    fBm covariance evaluated at the mean exponent ``(H(u)+H(v))/2``.
``constant_fbm``
    Mandelbrot-Van Ness fBm, ``(u^2H + v^2H - |u-v|^2H)/2``.

Note that RL-fBm and Mandelbrot-Van Ness fBm differ even for constant H: the
RL variance is ``t^2H / (2H Γ(H+1/2)^2)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import lapack

from . import _backend
from .errors import AdiabaticityWarning, DomainError, NumericError, NumericWarning
from .io import write_csv
from .numerics import gamma_fn, hyp2f1, integrate, rng_stream

__all__ = [
    "HurstProfile",
    "TimeGrid",
    "CovarianceModel",
    "CovarianceMatrix",
    "NoisePath",
    "NoiseEnsemble",
    "rl_kernel",
    "covariance",
    "build_covariance_matrix",
    "sample_paths_cholesky",
    "sample_fgn_circulant",
    "fgn_autocovariance",
    "cumulative_paths",
    "variance_theory",
    "variance_quadrature",
    "adiabatic_ratio",
    "write_paths_csv",
]

ADIABATIC_WARN = 0.1
_KINDS = ("constant", "sinusoid", "cosinusoid", "tabulated")


@dataclass(frozen=True)
class HurstProfile:
    """Time-dependent Hurst exponent ``H(t)``.

    Parametric kinds are ``H0 + amplitude * sin(2πt/period)`` (``sinusoid``)
    and the cosine analogue; ``tabulated`` interpolates linearly in
    ``table = ((t0, H0), (t1, H1), ...)``.  Range checks against a concrete
    grid are done with :meth:`validate_on`, since different consumers accept
    different ranges.
    """

    kind: str = "constant"
    H0: float = 0.7
    amplitude: float = 0.0
    period: float = 1.0
    table: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown Hurst profile kind {self.kind!r}")
        if self.kind in ("sinusoid", "cosinusoid") and not self.period > 0:
            raise DomainError("profile period must be positive")
        if self.kind == "tabulated":
            if not self.table or len(self.table) < 2:
                raise DomainError("tabulated profile needs at least two (t, H) pairs")
            tt = np.array([p[0] for p in self.table], dtype=float)
            if np.any(np.diff(tt) <= 0):
                raise DomainError("tabulated profile times must be strictly increasing")
            object.__setattr__(self, "table", tuple((float(a), float(b)) for a, b in self.table))

    @classmethod
    def constant(cls, H: float) -> "HurstProfile":
        return cls("constant", float(H))

    @classmethod
    def sinusoid(cls, H0: float, amplitude: float, period: float) -> "HurstProfile":
        return cls("sinusoid", float(H0), float(amplitude), float(period))

    @classmethod
    def cosinusoid(cls, H0: float, amplitude: float, period: float) -> "HurstProfile":
        return cls("cosinusoid", float(H0), float(amplitude), float(period))

    @classmethod
    def tabulated(cls, t: Sequence[float], H: Sequence[float]) -> "HurstProfile":
        return cls("tabulated", table=tuple(zip(map(float, t), map(float, H))))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant" or (self.kind != "tabulated" and self.amplitude == 0.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full(t.shape, self.H0)
        elif self.kind == "sinusoid":
            out = self.H0 + self.amplitude * np.sin(2.0 * np.pi * t / self.period)
        elif self.kind == "cosinusoid":
            out = self.H0 + self.amplitude * np.cos(2.0 * np.pi * t / self.period)
        else:
            tt, hh = np.array(self.table).T
            out = np.interp(t, tt, hh)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        """``H'(t)``: analytic for parametric kinds, central difference otherwise."""
        t = np.asarray(t, dtype=float)
        w = 2.0 * np.pi / self.period
        if self.kind == "constant":
            out = np.zeros(t.shape)
        elif self.kind == "sinusoid":
            out = self.amplitude * w * np.cos(w * t)
        elif self.kind == "cosinusoid":
            out = -self.amplitude * w * np.sin(w * t)
        else:
            tt = np.array(self.table)[:, 0]
            h = 1e-6 * max(1.0, float(tt[-1] - tt[0]))
            out = (np.asarray(self(t + h)) - np.asarray(self(t - h))) / (2.0 * h)
        return float(out) if out.ndim == 0 else out

    def validate_on(self, times, bounds=(0.5, 1.0), closed=False):
        """Raise :class:`DomainError` unless ``H(t)`` lies inside ``bounds`` on ``times``."""
        h = np.atleast_1d(self(times))
        lo, hi = bounds
        ok = (h >= lo) & (h <= hi) if closed else (h > lo) & (h < hi)
        if not np.all(ok):
            bad = np.flatnonzero(~ok)[0]
            raise DomainError(
                f"H(t)={h[bad]:.4f} at t={np.atleast_1d(times)[bad]:.4g} outside "
                f"{'[' if closed else '('}{lo}, {hi}{']' if closed else ')'}"
            )
        return self

    def describe(self) -> dict:
        d = {"kind": self.kind, "H0": self.H0, "amplitude": self.amplitude, "period": self.period}
        if self.table:
            d["table"] = self.table
        return d


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_start + k*dt``, ``k = 0..n_points-1``."""

    t_start: float = 0.0
    dt: float = 1.0
    n_points: int = 2

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("grid dt must be positive")
        if self.n_points < 2:
            raise DomainError("grid needs at least 2 points")
        if self.t_start < 0:
            raise DomainError("grid t_start must be >= 0")

    @classmethod
    def spanning(cls, t_end: float, n_points: int, t_start: float = 0.0) -> "TimeGrid":
        return cls(t_start, (t_end - t_start) / (n_points - 1), n_points)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_points)

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt * (self.n_points - 1)


@dataclass(frozen=True)
class CovarianceModel:
    variant: str = "locally_stationary"
    profile: HurstProfile = field(default_factory=HurstProfile)

    def __post_init__(self):
        if self.variant not in ("exact_rl", "locally_stationary", "constant_fbm"):
            raise DomainError(f"unknown covariance variant {self.variant!r}")
        if self.variant == "constant_fbm" and not self.profile.is_constant:
            raise DomainError("constant_fbm requires a constant Hurst profile")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NoisePath:
    """One sampled trajectory (``kind="path"``) or increment series."""

    grid: TimeGrid
    values: np.ndarray
    seed: int
    hurst: HurstProfile
    kind: str = "path"
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != (self.grid.n_points,):
            raise DomainError("path length must equal grid.n_points")


@dataclass(frozen=True)
class NoiseEnsemble:
    """Independent paths stacked row-wise, ``values.shape == (n_paths, n_points)``."""

    grid: TimeGrid | None
    values: np.ndarray
    seed: int
    hurst: HurstProfile
    kind: str = "path"
    warnings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.atleast_2d(self.values)))
        if self.grid is not None and self.values.shape[1] != self.grid.n_points:
            raise DomainError("ensemble width must equal grid.n_points")

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n_paths

    def __getitem__(self, k) -> NoisePath:
        return NoisePath(self.grid, self.values[k], self.seed, self.hurst, self.kind, k)

    def variance(self) -> np.ndarray:
        """Ensemble variance about the known zero mean at each grid time."""
        return np.mean(self.values**2, axis=0)


def rl_kernel(t, s, profile: HurstProfile):
    """Memory kernel ``(t-s)^(H(t)-1/2)`` for ``t > s``, zero otherwise."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0) or np.any(s < 0):
        raise DomainError("rl_kernel requires non-negative times")
    lag = t - s
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(lag > 0, np.abs(lag) ** (np.asarray(profile(t)) - 0.5), 0.0)
    return float(out) if out.ndim == 0 else out


def _rl_cov(u, v, hu, hv):
    if u == 0.0 or v == 0.0:
        return 0.0
    if u > v:
        u, v, hu, hv = v, u, hv, hu
    gu, gv = gamma_fn(hu + 0.5), gamma_fn(hv + 0.5)
    if u == v:
        return u ** (2 * hu) / (2 * hu * gu * gv)
    f = hyp2f1(0.5 - hv, 1.0, hu + 1.5, u / v)
    return u ** (hu + 0.5) * v ** (hv - 0.5) / ((hu + 0.5) * gu * gv) * f


def covariance(u: float, v: float, model: CovarianceModel) -> float:
    """``E[M(u) M(v)]`` under the selected variant."""
    u, v = float(u), float(v)
    if u < 0 or v < 0:
        raise DomainError("covariance requires non-negative times")
    p = model.profile
    if model.variant == "exact_rl":
        return _rl_cov(u, v, p(u), p(v))
    if model.variant == "locally_stationary":
        h2 = p(u) + p(v)
    else:
        h2 = 2.0 * p.H0
    return 0.5 * (u**h2 + v**h2 - abs(u - v) ** h2)


def adiabatic_ratio(profile: HurstProfile, times) -> np.ndarray:
    """``|H'(t)| t / H(t)`` on ``times``; the locally stationary kernel needs this << 1."""
    t = np.asarray(times, dtype=float)
    return np.abs(np.asarray(profile.derivative(t))) * t / np.asarray(profile(t))


def _cholesky(mat, jitter_ladder):
    diag_max = float(np.max(np.diag(mat)))
    info = 0
    for rel in jitter_ladder:
        a = mat + (rel * diag_max) * np.eye(mat.shape[0])
        c, info = lapack.dpotrf(a, lower=1, clean=1)
        if info == 0:
            return c, rel
    raise NumericError(
        f"Cholesky failed at leading minor {info} after jitter {jitter_ladder[-1]:.0e} x max diagonal"
    )


_JITTER_LADDER = (1e-12, 1e-11, 1e-10, 1e-9, 1e-8)


@dataclass
class CovarianceMatrix:
    """Covariance on a grid plus its Cholesky factor on the ``t > 0`` block."""

    grid: TimeGrid
    model: CovarianceModel | None
    matrix: np.ndarray
    jitter: float
    factor: np.ndarray
    active: np.ndarray
    warnings: tuple = ()


def build_covariance_matrix(
    grid: TimeGrid, model: CovarianceModel, jitter: float | None = None
) -> CovarianceMatrix:
    """Covariance matrix ``C_ij = C(t_i, t_j)``; rows at ``t = 0`` are zero.

    ``jitter`` is relative to the largest diagonal entry (default 1e-12) and
    is escalated up to 1e-8 before the factorization is declared failed.
    """
    t = grid.times
    p = model.profile
    active = t > 0
    ta = t[active]
    msgs = []
    if model.variant == "constant_fbm":
        p.validate_on(ta, (0.0, 1.0))
        h2 = 2.0 * p.H0
        u, v = np.meshgrid(ta, ta, indexing="ij")
        sub = 0.5 * (u**h2 + v**h2 - np.abs(u - v) ** h2)
    elif model.variant == "locally_stationary":
        p.validate_on(ta)
        h = np.asarray(p(ta))
        u, v = np.meshgrid(ta, ta, indexing="ij")
        h2 = h[:, None] + h[None, :]
        sub = 0.5 * (u**h2 + v**h2 - np.abs(u - v) ** h2)
        ratio = float(np.max(adiabatic_ratio(p, ta)))
        if ratio > ADIABATIC_WARN:
            msg = f"adiabaticity: max |H'|t/H = {ratio:.3g} exceeds {ADIABATIC_WARN}"
            msgs.append(msg)
            warnings.warn(msg, AdiabaticityWarning, stacklevel=2)
    else:
        p.validate_on(ta)
        sub = _backend.kernels().rl_covariance_matrix(ta, np.asarray(p(ta), dtype=float))
    sub = 0.5 * (sub + sub.T)
    full = np.zeros((t.size, t.size))
    idx = np.flatnonzero(active)
    full[np.ix_(idx, idx)] = sub
    ladder = _JITTER_LADDER if jitter is None else tuple(
        j for j in (jitter,) + _JITTER_LADDER if j >= jitter
    )
    factor, used = _cholesky(sub, ladder)
    return CovarianceMatrix(grid, model, full, used, factor, active, tuple(msgs))


def sample_paths_cholesky(
    matrix,
    n_paths: int,
    seed: int,
    *,
    grid: TimeGrid | None = None,
    hurst: HurstProfile | None = None,
    stream_id: int = 0,
) -> NoiseEnsemble:
    """Draw ``M = L z`` for ``n_paths`` independent standard normal vectors ``z``.

    ``matrix`` is a :class:`CovarianceMatrix` or a plain symmetric array;
    rows with zero diagonal are pinned to zero.  For a plain array the
    returned ensemble carries ``grid`` if given (its size must match).
    """
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    msgs = ()
    if isinstance(matrix, CovarianceMatrix):
        L, active = matrix.factor, matrix.active
        grid = matrix.grid
        if matrix.model is not None:
            hurst = matrix.model.profile
        msgs = matrix.warnings
    else:
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.shape[0] != m.shape[1] or not np.array_equal(m, m.T):
            raise DomainError("covariance matrix must be square and symmetric")
        active = np.diag(m) > 0
        L, _ = _cholesky(m[np.ix_(active, active)], _JITTER_LADDER)
    rng = rng_stream(seed, stream_id)
    z = rng.standard_normal((n_paths, L.shape[0]))
    vals = np.zeros((n_paths, active.size))
    vals[:, active] = z @ L.T
    return NoiseEnsemble(grid, vals, seed, hurst or HurstProfile(), "path", msgs)


def fgn_autocovariance(k, H: float, sigma: float = 1.0):
    """``γ(k) = σ²/2 (|k+1|^2H - 2|k|^2H + |k-1|^2H)`` for integer lags."""
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2.0 * H
    return 0.5 * sigma**2 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def sample_fgn_circulant(
    H: float,
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    *,
    sigma: float = 1.0,
    strict: bool = False,
    stream_id: int = 0,
    batch: int = 256,
) -> NoiseEnsemble:
    """Stationary fGn increments by circulant embedding (Davies-Harte).

    Each increment has variance ``σ² dt^2H`` so that the cumulative sum is
    fBm with ``Var[B(t)] = σ² t^2H``.  Negative embedding eigenvalues are
    clipped to zero; a clipped spectral mass above 1e-6 of the total is a
    warning, or an error when ``strict``.
    """
    if not 0.0 < H < 1.0:
        raise DomainError("circulant fGn requires 0 < H < 1")
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    n = grid.n_points
    m = 2 * n
    lags = np.concatenate([np.arange(n + 1), np.arange(n - 1, 0, -1)])
    row = fgn_autocovariance(lags, H)
    lam = np.fft.fft(row).real
    neg = lam < 0
    clipped = float(-lam[neg].sum() / np.abs(lam).sum()) if neg.any() else 0.0
    msgs = []
    if clipped > 1e-6:
        msg = f"circulant embedding clipped {clipped:.3e} of spectral mass"
        if strict:
            raise NumericError(msg)
        msgs.append(msg)
        warnings.warn(msg, NumericWarning, stacklevel=2)
    lam = np.where(neg, 0.0, lam)
    scale = np.sqrt(lam / m)
    amp = sigma * grid.dt**H
    rng = rng_stream(seed, stream_id)
    out = np.empty((n_paths, n))
    for start in range(0, n_paths, batch):
        stop = min(n_paths, start + batch)
        z = rng.standard_normal((stop - start, 2, m))
        y = np.fft.fft(scale * (z[:, 0] + 1j * z[:, 1]), axis=1)
        out[start:stop] = amp * y.real[:, :n]
    prof = HurstProfile.constant(H)
    return NoiseEnsemble(grid, out, seed, prof, "increments", tuple(msgs))


def cumulative_paths(increments: NoiseEnsemble) -> NoiseEnsemble:
    """Integrate an increment ensemble into paths starting at ``M(t_0) = 0``.

    The k-th increment spans ``[t_k, t_{k+1}]``; the last one is dropped.
    """
    inc = increments.values
    vals = np.zeros_like(inc)
    np.cumsum(inc[:, :-1], axis=1, out=vals[:, 1:])
    return NoiseEnsemble(increments.grid, vals, increments.seed, increments.hurst, "path",
                         increments.warnings)


def variance_theory(t, profile: HurstProfile, sigma: float = 1.0):
    """Leading-order variance ``σ² t^2H(t) / (2H(t) Γ(H(t)+1/2)²)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("variance_theory requires t > 0")
    h = np.asarray(profile(t), dtype=float)
    out = sigma**2 * t ** (2 * h) / (2 * h * gamma_fn(h + 0.5) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def variance_quadrature(t: float, profile: HurstProfile, sigma: float = 1.0) -> float:
    """``σ² ∫_0^t (t-s)^(2H(s)-1) / Γ(H(s)+1/2)² ds`` by quadrature."""
    def f(s):
        h = profile(s)
        return (t - s) ** (2 * h - 1) / gamma_fn(h + 0.5) ** 2

    return sigma**2 * integrate(f, 0.0, float(t))


def write_paths_csv(ensemble, path, long_format: bool = True, meta=None) -> list[Path]:
    """Write paths as ``path_id,t,value`` (long) or one ``t,value`` file per path."""
    path = Path(path)
    t = ensemble.grid.times
    vals = ensemble.values
    meta = dict(meta or {})
    meta.setdefault("warnings", list(ensemble.warnings))
    if long_format:
        npaths, n = vals.shape
        ids = np.repeat(np.arange(npaths), n)
        write_csv(path, ["path_id", "t", "value"], [ids, np.tile(t, npaths), vals.ravel()], meta)
        return [path]
    written = []
    for k, row in enumerate(vals):
        p = path.with_name(f"{path.stem}_{k:04d}{path.suffix or '.csv'}")
        written.append(write_csv(p, ["t", "value"], [t, row], meta))
    return written
