"""Pure-Python/NumPy implementation of the hot kernels.

Mirrors ``_core.pyx`` function by function; ``_kernels`` picks one of the
two at import time.  Piecewise functions are passed flattened: ``breaks``
(m,), ``offs`` (m + 2,) segment term offsets, and per-term ``coef``,
``expo``, ``logp`` so that segment ``k`` is
``sum(coef[i] * t**expo[i] * log(t)**logp[i] for i in offs[k]:offs[k+1])``.
"""
import math
from bisect import bisect_left

import numpy as np
from scipy.special import comb

BACKEND = "python"


def seg_index(breaks, t):
    return bisect_left(breaks, t)


def seg_eval(offs, coef, expo, logp, k, t):
    lt = math.log(t)
    acc = 0.0
    for i in range(offs[k], offs[k + 1]):
        term = coef[i] * t ** expo[i]
        if logp[i]:
            term *= lt ** logp[i]
        acc += term
    return acc


def pl_eval_scalar(breaks, offs, coef, expo, logp, t):
    return seg_eval(offs, coef, expo, logp, bisect_left(breaks, t), t)


def pl_eval(breaks, offs, coef, expo, logp, t):
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    idx = np.searchsorted(breaks, flat, side="left")
    out = np.zeros_like(flat)
    lt = np.log(flat)
    for k in np.unique(idx):
        sel = idx == k
        x = lt[sel]
        acc = np.zeros_like(x)
        for i in range(offs[k], offs[k + 1]):
            term = coef[i] * flat[sel] ** expo[i]
            if logp[i]:
                term = term * x ** logp[i]
            acc += term
        out[sel] = acc
    return out.reshape(t.shape)


def seg_root(offs, coef, expo, logp, k, y, lo, hi, rtol):
    """Bisection in log t for an increasing segment function on [lo, hi]."""
    a = math.log(lo)
    b = math.log(hi)
    tol = math.log1p(rtol)
    while b - a > tol:
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if seg_eval(offs, coef, expo, logp, k, math.exp(mid)) < y:
            a = mid
        else:
            b = mid
    return math.exp(0.5 * (a + b))


def _weights(k):
    return [(-1) ** (k - i) * float(comb(k, i, exact=True)) for i in range(k + 1)]


def kdiff(a3, k, m):
    """k-th forward difference with step ``m`` cells along axis 1 of ``a3``.

    Zero extension; the output is longer by ``k * m`` along that axis.
    """
    P, N, Q = a3.shape
    out = np.zeros((P, N + k * m, Q))
    for i, w in enumerate(_weights(k)):
        off = (k - i) * m
        out[:, off:off + N, :] += w * a3
    return out


def kdiff_power_sums(a3, k, shifts, p):
    """Sum of ``|kdiff(a3, k, m)|**p`` for every ``m`` in ``shifts``."""
    out = np.empty(len(shifts))
    for i, m in enumerate(shifts):
        d = np.abs(kdiff(a3, k, int(m)))
        out[i] = np.sum(d ** p) if p != 1.0 else np.sum(d)
    return out
