"""Bessel functions of the first kind, integer order.

Power series for ``|x| <= 12``; above that, Miller's downward recurrence
normalised with the Neumann sum ``J_0 + 2 sum_k J_2k = 1``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import OrderTooLarge

__all__ = ["bessel_j", "bessel_j_orders", "MAX_ORDER"]

MAX_ORDER = 64
_SERIES_LIMIT = 12.0
_RESCALE = 1e250


def _series(nmax: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_nmax from the ascending series; accurate to ~1e-13 for |x| <= 12."""
    out = np.empty((nmax + 1,) + x.shape)
    q = -0.25 * x * x
    half = 0.5 * x
    lead = np.ones_like(x)  # (x/2)^n / n!
    for n in range(nmax + 1):
        term = lead.copy()
        acc = lead.copy()
        for k in range(1, 80):
            term = term * q / (k * (n + k))
            acc += term
            if k > 8 and np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(acc), 1e-300)):
                break
        out[n] = acc
        lead = lead * half / (n + 1)
    return out


def _miller(nmax: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_nmax by downward recurrence; requires x > 0."""
    xmax = float(np.max(x))
    start = int(max(nmax, xmax) + 12.0 * xmax ** (1.0 / 3.0) + 40.0)
    start += start % 2
    out = np.zeros((nmax + 1,) + x.shape)
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        # j_cur holds J_k (unnormalised); produce J_{k-1}
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        m = k - 1
        if m <= nmax:
            out[m] = j_cur
        if m > 0 and m % 2 == 0:
            norm += 2.0 * j_cur
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            f = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur = j_cur * f
            j_next = j_next * f
            norm = norm * f
            out *= f
    norm += j_cur
    return out / norm


def bessel_j_orders(nmax: int, x) -> np.ndarray:
    """Array of ``J_n(x)`` for ``n = 0..nmax``; shape ``(nmax + 1,) + x.shape``."""
    if nmax > MAX_ORDER:
        raise OrderTooLarge(f"order {nmax} exceeds {MAX_ORDER}")
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty((nmax + 1,) + x.shape)
    small = ax <= _SERIES_LIMIT
    if np.any(small):
        out[:, small] = _series(nmax, ax[small])
    if np.any(~small):
        out[:, ~small] = _miller(nmax, ax[~small])
    # J_n(-x) = (-1)^n J_n(x)
    if np.any(x < 0):
        out[1::2] = np.where(x < 0, -out[1::2], out[1::2])
    return out


def bessel_j(n: int, x):
    """``J_n(x)`` for integer ``|n| <= 64``, using ``J_{-n} = (-1)^n J_n``."""
    n = int(n)
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    if n > MAX_ORDER:
        raise OrderTooLarge(f"order {n} exceeds {MAX_ORDER}")
    x_arr = np.asarray(x, dtype=float)
    val = sign * bessel_j_orders(n, x_arr)[n]
    return float(val) if val.ndim == 0 else val
