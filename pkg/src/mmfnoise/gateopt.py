"""Gate error, the relaxation/dephasing cost and optimal gate time.

The cost is ``E(t_g) = t_g/T1 + χ(t_g)/3`` with ``χ = A_R t^2H`` and
``A_R = α² c(H)`` (or χ interpolated from a computed dephasing curve).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainError, OptimizationError
from .io import write_csv
from .numerics import gamma_fn

__all__ = [
    "c_of_h",
    "GateModel",
    "GateOptimum",
    "gate_error",
    "total_cost",
    "table_gate_time",
    "golden_section",
    "optimal_gate_time",
    "dd_suppression",
    "dd_suppression_quadrature",
    "noise_coupling_from_fit",
    "write_sweep_csv",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def c_of_h(H: float, omega_min_t: float | None = None) -> float:
    """``c(H) = 1/(2H(2H-1)Γ²(H+1/2))``, times ``1 - (ω_min t)^-(2H-1)`` for H > 3/4.

    ``H = 3/4`` exactly uses the uncorrected branch.
    """
    H = float(H)
    if not H > 0.5:
        raise DomainError("c(H) has a pole at H = 1/2; need H > 1/2")
    if not H < 1.0:
        raise DomainError("c(H) requires H < 1")
    base = 1.0 / (2.0 * H * (2.0 * H - 1.0) * gamma_fn(H + 0.5) ** 2)
    if H <= 0.75:
        return base
    if omega_min_t is None or not omega_min_t > 1.0:
        raise DomainError("H > 3/4 branch requires omega_min_t > 1")
    return base * (1.0 - omega_min_t ** (-(2.0 * H - 1.0)))


@dataclass(frozen=True)
class GateModel:
    """``t1`` in ns; χ either ``A_R t^2H`` or interpolated from ``chi_source``.

    ``chi_source`` is a pair ``(t, χ)`` or an object with ``times`` and
    ``chi`` attributes; ``amplitude`` overrides ``α² c(H)`` (units ns^-2H).
    """

    t1: float
    alpha_coupling: float = 0.5
    hurst: float = 0.7
    chi_source: object = None
    amplitude: float | None = None
    omega_min_t: float | None = None

    def __post_init__(self):
        if not self.t1 > 0:
            raise DomainError("t1 must be positive (ns)")
        if self.alpha_coupling < 0:
            raise DomainError("alpha_coupling must be >= 0")
        if self.chi_source is None and not 0.5 < self.hurst < 1.0:
            raise DomainError("closed-form chi requires 1/2 < H < 1")
        if self.amplitude is not None and self.amplitude < 0:
            raise DomainError("amplitude must be >= 0 (ns^-2H)")

    @property
    def a_r(self) -> float:
        if self.amplitude is not None:
            return float(self.amplitude)
        return self.alpha_coupling**2 * c_of_h(self.hurst, self.omega_min_t)

    @property
    def has_closed_form(self) -> bool:
        return self.chi_source is None

    def _source(self):
        src = self.chi_source
        if hasattr(src, "chi"):
            return np.asarray(src.times, float), np.asarray(src.chi, float)
        t, c = src
        return np.asarray(t, float), np.asarray(c, float)

    def chi(self, t_g):
        t = np.asarray(t_g, dtype=float)
        if np.any(t <= 0):
            raise DomainError("gate time must be positive")
        if self.chi_source is None:
            out = self.a_r * t ** (2.0 * self.hurst)
        else:
            ts, cs = self._source()
            if np.any(t < ts[0]) or np.any(t > ts[-1]):
                raise DomainError(f"t_g outside chi_source support [{ts[0]:.4g}, {ts[-1]:.4g}]")
            out = np.interp(t, ts, cs)
        return float(out) if out.ndim == 0 else out

    def support(self):
        if self.chi_source is None:
            return 0.0, math.inf
        ts, _ = self._source()
        return float(ts[0]), float(ts[-1])


def gate_error(t_g, model: GateModel):
    """Dephasing contribution ``χ(t_g)/3``."""
    return model.chi(t_g) / 3.0


def total_cost(t_g, model: GateModel):
    """``t_g/T1 + χ(t_g)/3``."""
    out = np.asarray(t_g, dtype=float) / model.t1 + np.asarray(gate_error(t_g, model))
    return float(out) if out.ndim == 0 else out


def table_gate_time(model: GateModel) -> float:
    """``(3 T1^-1 / (2H α² c(H)))^(1/(2H-1))``.

    This is the stationary point of ``t/T1 - χ(t)/3``.  The cost with both
    terms positive is increasing for H > 1/2, so this value is not a
    minimizer of :func:`total_cost`.
    """
    H = model.hurst
    a = model.a_r
    if a == 0.0:
        return math.inf
    return (3.0 / (model.t1 * 2.0 * H * a)) ** (1.0 / (2.0 * H - 1.0))


def golden_section(f: Callable[[float], float], lo: float, hi: float, *, log: bool = True,
                   xtol: float = 1e-10, max_iter: int = 500):
    """Minimize a unimodal ``f`` on ``[lo, hi]`` (in ``log x`` when ``log``).

    Returns ``(x, f(x), interior)``; ``interior`` is False when the minimum
    sits on the bracket boundary.
    """
    to = (lambda x: math.log(x)) if log else (lambda x: x)
    back = (lambda u: math.exp(u)) if log else (lambda u: u)
    a, b = to(lo), to(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(back(c)), f(back(d))
    for _ in range(max_iter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(back(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(back(d))
    u = 0.5 * (a + b)
    x = back(u)
    span = to(hi) - to(lo)
    edge = 1e-6 * abs(span)
    interior = (u - to(lo) > edge) and (to(hi) - u > edge)
    return x, f(x), interior


@dataclass(frozen=True)
class GateOptimum:
    t_opt: float | None
    method: str
    closed_form: float | None
    numeric: float | None
    interior: bool
    agreement: float | None = None  # numeric / closed_form


def _bracket(model: GateModel):
    lo, hi = model.support()
    if model.has_closed_form:
        H = model.hurst
        scale = (3.0 / model.t1) ** (1.0 / (2.0 * H - 1.0))
        return 1e-3 * scale, 1e3 * scale
    return lo, hi


def optimal_gate_time(model: GateModel, method: str = "auto", widen: int = 3) -> GateOptimum:
    """Optimal gate time by the closed form and/or golden-section search.

    ``method="closed_form"`` returns the closed-form expression only; ``"numeric"``
    minimizes :func:`total_cost` and raises :class:`OptimizationError` when
    no interior minimum exists; ``"auto"`` evaluates both when the closed
    form applies and reports the numeric search without raising.
    """
    if method not in ("auto", "closed_form", "numeric"):
        raise DomainError(f"unknown method {method!r}")
    closed = table_gate_time(model) if model.has_closed_form else None
    if method == "closed_form":
        if closed is None:
            raise DomainError("closed form requires the phenomenological (A_R, H) pair")
        return GateOptimum(closed, "closed_form", closed, None, True)
    lo, hi = _bracket(model)
    f = lambda x: float(total_cost(x, model))
    x, fx, interior = golden_section(f, lo, hi)
    k = 0
    while not interior and model.has_closed_form and k < widen:
        lo, hi = lo * 1e-3, hi * 1e3
        x, fx, interior = golden_section(f, lo, hi)
        k += 1
    if not interior:
        if method == "numeric" or closed is None:
            raise OptimizationError(
                f"no interior minimum of the cost on [{lo:.3g}, {hi:.3g}] ns; "
                f"minimum at the boundary t={x:.3g}", best=(x, fx))
        return GateOptimum(closed, "closed_form", closed, None, False)
    agree = x / closed if closed else None
    return GateOptimum(x, "numeric", closed, x, True, agree)


def dd_suppression(n: int, H: float) -> float:
    """``(n/2)^-2H``."""
    if n < 2 or n % 2:
        raise DomainError("n must be an even integer >= 2")
    return (n / 2.0) ** (-2.0 * H)


def dd_suppression_quadrature(n: int, H: float, t: float = 1.0, omega_min: float | None = None) -> float:
    """χ_CPMG(n)/χ_Ramsey at fixed t for the power-law spectrum ``ω^-(2H-1)``."""
    from .bath import FilterKind, PowerLawNoise, dephasing_chi
    from .mmfbm import HurstProfile

    noise = PowerLawNoise(1.0, HurstProfile.constant(H))
    tt = np.array([float(t)])
    c = dephasing_chi(tt, noise, FilterKind.cpmg(n), omega_min).chi[0]
    r = dephasing_chi(tt, noise, FilterKind.ramsey(), omega_min).chi[0]
    return c / r


def noise_coupling_from_fit(a_r: float, H: float, omega_min_t: float | None = None) -> float:
    """Invert ``A_R = α² c(H)`` for α."""
    if a_r < 0:
        raise DomainError("A_R must be >= 0")
    return math.sqrt(a_r / c_of_h(H, omega_min_t))


def write_sweep_csv(model: GateModel, t_grid, path, t_opt: float | None = None, meta=None) -> Path:
    t = np.asarray(t_grid, dtype=float)
    relax = t / model.t1
    deph = np.asarray(gate_error(t, model), dtype=float)
    total = relax + deph
    mark = np.zeros(t.size, dtype=bool)
    if t_opt is not None and np.isfinite(t_opt):
        mark[int(np.argmin(np.abs(np.log(t) - math.log(t_opt))))] = True
    else:
        mark[int(np.argmin(total))] = True
    return write_csv(path, ["t_g", "relaxation_term", "dephasing_term", "total", "is_optimal"],
                     [t, relax, deph, total, mark], meta)
