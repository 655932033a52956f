"""Compiled inner loops over CSR data.

Loss codes are shared with :mod:`distcocoa.objectives`:
0 hinge, 1 smoothed hinge, 2 logistic. All dual quantities are expressed
through ``b = y * alpha`` which lives in ``[0, 1]`` for every loss here.
"""

import math

import numpy as np
from numba import njit

HINGE = 0
SMOOTH_HINGE = 1
LOGISTIC = 2

_NEWTON_TOL = 1e-10
_NEWTON_MAXITER = 200


@njit(cache=True, nogil=True)
def _row_dot(indptr, indices, data, i, w):
    s = 0.0
    for p in range(indptr[i], indptr[i + 1]):
        s += data[p] * w[indices[p]]
    return s


@njit(cache=True, nogil=True)
def _row_axpy(indptr, indices, data, i, a, w):
    for p in range(indptr[i], indptr[i + 1]):
        w[indices[p]] += a * data[p]


@njit(cache=True, nogil=True)
def _xlogx(b):
    if b <= 0.0:
        return 0.0
    return b * math.log(b)


@njit(cache=True, nogil=True)
def loss_value(code, gamma, z):
    """Loss as a function of the signed margin ``z = y * w.x``."""
    if code == HINGE:
        return max(0.0, 1.0 - z)
    if code == SMOOTH_HINGE:
        if z >= 1.0:
            return 0.0
        if z <= 1.0 - gamma:
            return 1.0 - z - 0.5 * gamma
        return (1.0 - z) * (1.0 - z) / (2.0 * gamma)
    # log(1 + exp(-z)) without overflow
    if z > 0:
        return math.log1p(math.exp(-z))
    return -z + math.log1p(math.exp(z))


@njit(cache=True, nogil=True)
def conj_value(code, gamma, b):
    """``l*(-alpha)`` in terms of ``b = y * alpha``; +inf outside the domain."""
    if b < 0.0 or b > 1.0:
        return np.inf
    if code == HINGE:
        return -b
    if code == SMOOTH_HINGE:
        return -b + 0.5 * gamma * b * b
    return _xlogx(b) + _xlogx(1.0 - b)


@njit(cache=True, nogil=True)
def fenchel_young(code, gamma, z, b):
    """``l(m) + l*(-alpha) + alpha * m`` with ``z = y m``, ``b = y alpha``."""
    return loss_value(code, gamma, z) + conj_value(code, gamma, b) + b * z


@njit(cache=True, nogil=True)
def _logistic_argmax(yalpha, ym, q, lam_n):
    # maximize -ym (b - ya) - q (b - ya)^2 / (2 lam_n) - ent(b) over b in (0, 1);
    # derivative is strictly decreasing, +inf at 0 and -inf at 1
    c = q / lam_n
    lo = 0.0
    hi = 1.0
    b = min(max(yalpha, 1e-12), 1.0 - 1e-12)
    for _ in range(_NEWTON_MAXITER):
        g = -ym - (b - yalpha) * c - math.log(b) + math.log1p(-b)
        if abs(g) <= _NEWTON_TOL:
            break
        if g > 0.0:
            lo = b
        else:
            hi = b
        h = -c - 1.0 / (b * (1.0 - b))
        nb = b - g / h
        if not (lo < nb < hi):
            nb = 0.5 * (lo + hi)
        if nb == b:
            break
        b = nb
    return b


@njit(cache=True, nogil=True)
def coordinate_step(code, gamma, lam_n, y, alpha, m, q):
    """Exact maximizer of the single-coordinate dual subproblem.

    ``m`` is ``x.w`` at the current primal image, ``q = ||x||^2``.
    Returns the increment ``delta`` to ``alpha``.
    """
    ya = y * alpha
    ym = y * m
    if code == HINGE:
        if q <= 0.0:
            b = 1.0
        else:
            b = ya + lam_n * (1.0 - ym) / q
    elif code == SMOOTH_HINGE:
        b = (lam_n * (1.0 - ym) + ya * q) / (q + gamma * lam_n)
    else:
        b = _logistic_argmax(ya, ym, q, lam_n)
    if b < 0.0:
        b = 0.0
    elif b > 1.0:
        b = 1.0
    return y * b - alpha


@njit(cache=True, nogil=True)
def local_sdca(indptr, indices, data, y, sqnorm, block, alpha_blk, w, picks,
               code, gamma, lam_n):
    """Sequential coordinate steps on one block, refreshing a local w copy.

    ``picks`` holds positions into ``block``. Returns (delta_alpha, delta_w).
    """
    nk = block.shape[0]
    d = w.shape[0]
    wl = w.copy()
    a = alpha_blk.copy()
    dalpha = np.zeros(nk)
    dw = np.zeros(d)
    for h in range(picks.shape[0]):
        j = picks[h]
        i = block[j]
        m = _row_dot(indptr, indices, data, i, wl)
        delta = coordinate_step(code, gamma, lam_n, y[i], a[j], m, sqnorm[i])
        if delta != 0.0:
            a[j] += delta
            dalpha[j] += delta
            s = delta / lam_n
            _row_axpy(indptr, indices, data, i, s, wl)
            _row_axpy(indptr, indices, data, i, s, dw)
    return dalpha, dw


@njit(cache=True, nogil=True)
def stale_steps(indptr, indices, data, y, sqnorm, block, alpha_blk, w, picks,
                code, gamma, lam_n):
    """Coordinate steps all evaluated at the same fixed w (mini-batch CD)."""
    nk = block.shape[0]
    d = w.shape[0]
    dalpha = np.zeros(nk)
    dw = np.zeros(d)
    for h in range(picks.shape[0]):
        j = picks[h]
        i = block[j]
        m = _row_dot(indptr, indices, data, i, w)
        delta = coordinate_step(code, gamma, lam_n, y[i], alpha_blk[j], m,
                                sqnorm[i])
        if delta != 0.0:
            dalpha[j] += delta
            _row_axpy(indptr, indices, data, i, delta / lam_n, dw)
    return dalpha, dw


@njit(cache=True, nogil=True)
def block_gap(indptr, indices, data, y, block, alpha_blk, w, code, gamma, n):
    """Local duality gap: (1/n) sum of Fenchel-Young residuals over a block."""
    s = 0.0
    for j in range(block.shape[0]):
        i = block[j]
        m = _row_dot(indptr, indices, data, i, w)
        s += fenchel_young(code, gamma, y[i] * m, y[i] * alpha_blk[j])
    return s / n


@njit(cache=True, nogil=True)
def pegasos_batch(indptr, indices, data, y, block, w, picks, eta, lam):
    """Sum of per-point Pegasos steps taken from the same fixed w."""
    dw = np.zeros(w.shape[0])
    for h in range(picks.shape[0]):
        i = block[picks[h]]
        for c in range(dw.shape[0]):
            dw[c] -= eta * lam * w[c]
        if y[i] * _row_dot(indptr, indices, data, i, w) < 1.0:
            _row_axpy(indptr, indices, data, i, eta * y[i], dw)
    return dw


@njit(cache=True, nogil=True)
def pegasos_local(indptr, indices, data, y, block, w, picks, lam, t0):
    """Sequential Pegasos steps on a private w copy; step 1/(lam (t0 + h))."""
    wl = w.copy()
    for h in range(picks.shape[0]):
        i = block[picks[h]]
        eta = 1.0 / (lam * (t0 + h + 1))
        viol = y[i] * _row_dot(indptr, indices, data, i, wl) < 1.0
        shrink = 1.0 - eta * lam
        for c in range(wl.shape[0]):
            wl[c] *= shrink
        if viol:
            _row_axpy(indptr, indices, data, i, eta * y[i], wl)
    return wl - w


@njit(cache=True, nogil=True)
def pegasos_local_const(indptr, indices, data, y, block, w, picks, eta, lam):
    """Sequential Pegasos steps on a private w copy with a fixed step size."""
    wl = w.copy()
    shrink = 1.0 - eta * lam
    for h in range(picks.shape[0]):
        i = block[picks[h]]
        viol = y[i] * _row_dot(indptr, indices, data, i, wl) < 1.0
        for c in range(wl.shape[0]):
            wl[c] *= shrink
        if viol:
            _row_axpy(indptr, indices, data, i, eta * y[i], wl)
    return wl - w
