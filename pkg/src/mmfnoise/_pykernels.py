"""Pure numpy implementation of the hot kernels.

Used when the compiled extension is unavailable or when
``MMFNOISE_BACKEND=python`` is set.  Results agree with
:mod:`mmfnoise._ckernels` to rounding.
"""
import numpy as np

from .errors import NumericError
from .numerics import gamma_fn, hyp2f1, rgamma


def _series_vec(a, b, c, z, max_terms=20000):
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for n in range(max_terms):
        term = np.where(active, term * (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z, 0.0)
        total = total + term
        active &= ~((np.abs(term) * z <= 1e-17 * np.abs(total) * (1.0 - z)) | (term == 0.0))
        if not active.any():
            return total
    raise NumericError("2F1 series did not converge in covariance fill")


def _hyp2f1_b1(a, c, z):
    """Vectorized 2F1(a, 1; c; z) for arrays a, c, z with 0 < z < 1."""
    out = np.empty_like(z)
    lo = z <= 0.5
    if lo.any():
        out[lo] = _series_vec(a[lo], 1.0, c[lo], z[lo])
    hi = ~lo
    if hi.any():
        ah, ch, zh = a[hi], c[hi], z[hi]
        d = ch - ah - 1.0
        degenerate = np.abs(d - np.round(d)) < 1e-3
        res = np.empty_like(zh)
        good = ~degenerate
        if good.any():
            ag, cg, zg, dg = ah[good], ch[good], zh[good], d[good]
            w = 1.0 - zg
            rg = np.vectorize(rgamma, otypes=[float])
            gc = gamma_fn(cg)
            first = gc * rg(cg - ag) * rg(cg - 1.0) / rg(dg)
            second = gc * rg(ag) / rg(-dg)
            res[good] = first * _series_vec(ag, 1.0, 1.0 - dg, w) + second * w**dg * _series_vec(
                cg - ag, cg - 1.0, 1.0 + dg, w
            )
        for k in np.flatnonzero(degenerate):
            res[k] = hyp2f1(ah[k], 1.0, ch[k], zh[k])
        out[hi] = res
    return out


def rl_covariance_matrix(t, h):
    """Exact Riemann-Liouville covariance on strictly positive times."""
    t = np.ascontiguousarray(t, dtype=float)
    h = np.ascontiguousarray(h, dtype=float)
    n = t.size
    g = gamma_fn(h + 0.5)
    out = np.empty((n, n))
    out[np.diag_indices(n)] = t ** (2.0 * h) / (2.0 * h * g * g)
    iu, ju = np.triu_indices(n, 1)
    if iu.size:
        first_min = t[iu] <= t[ju]
        im = np.where(first_min, iu, ju)
        iM = np.where(first_min, ju, iu)
        tm, tM, hm, hM = t[im], t[iM], h[im], h[iM]
        vals = np.empty(iu.size)
        same = tm == tM
        vals[same] = tm[same] ** (2.0 * hm[same]) / (2.0 * hm[same] * g[im[same]] * g[iM[same]])
        d = ~same
        if d.any():
            f = _hyp2f1_b1(0.5 - hM[d], hm[d] + 1.5, tm[d] / tM[d])
            vals[d] = (
                tm[d] ** (hm[d] + 0.5) * tM[d] ** (hM[d] - 0.5) / ((hm[d] + 0.5) * g[im[d]] * g[iM[d]]) * f
            )
        out[iu, ju] = vals
        out[ju, iu] = vals
    return out


def volterra_weights(t, gam, norm):
    """Lower-triangular weight matrix W[i, j] = norm[i] * w_ij (j < i)."""
    t = np.asarray(t, dtype=float)
    n = t.size
    ti = t[:, None]
    e = (2.0 * np.asarray(gam, dtype=float) + 1.0)[:, None]
    lag0 = ti - t[None, :-1]
    lag1 = ti - t[None, 1:]
    causal = lag0 > 0
    with np.errstate(invalid="ignore"):
        a0 = np.where(causal, np.abs(lag0) ** e, 0.0)
        a1 = np.where(lag1 > 0, np.abs(lag1) ** e, 0.0)
        dt = np.diff(t)[None, :]
        w = np.where(causal, np.sqrt(np.maximum(a0 - a1, 0.0) / (e * dt)), 0.0)
    w *= np.asarray(norm, dtype=float)[:, None]
    return w.reshape(n, n - 1)


def volterra_increments(t, gam, norm, dw):
    """Causal sums I[p, i] = norm[i] * sum_{j<i} w_ij dW[p, j]."""
    w = volterra_weights(t, gam, norm)
    return np.ascontiguousarray(np.asarray(dw, dtype=float) @ w.T)


def euler_linear(inc, dt, lam, sigma, eps0):
    """eps[i+1] = eps[i] - lam*eps[i]*dt[i] + sigma[i]*(I[i+1] - I[i])."""
    inc = np.asarray(inc, dtype=float)
    npaths, n = inc.shape
    out = np.empty((npaths, n))
    e = np.full(npaths, float(eps0))
    out[:, 0] = e
    for i in range(n - 1):
        e = e - lam * e * dt[i] + sigma[i] * (inc[:, i + 1] - inc[:, i])
        out[:, i + 1] = e
    return out
