"""Minimal double-double (two-float) arithmetic on numpy arrays.

A value is carried as a pair ``(hi, lo)`` with ``hi + lo`` the intended
number and ``|lo| <= ulp(hi)/2``.  Only the handful of operations needed
for compensated series summation are provided.  The error-free transforms
are Dekker/Knuth; no FMA is assumed.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    # requires |a| >= |b| elementwise
    s = a + b
    return s, b - (s - a)


def two_prod(a, b):
    p = a * b
    ta = _SPLITTER * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLITTER * b
    bh = tb - (tb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(xh, xl, yh, yl):
    s, e = two_sum(xh, yh)
    e = e + xl + yl
    return quick_two_sum(s, e)


def dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    e = e + xh * yl + xl * yh
    return quick_two_sum(p, e)


def dd_mul_scalar(xh, xl, c):
    p, e = two_prod(xh, c)
    e = e + xl * c
    return quick_two_sum(p, e)


def dd_to_float(xh, xl):
    return xh + xl


def dd_from_mpf(values):
    """Convert an iterable of mpmath numbers to (hi, lo) float arrays."""
    hi = np.empty(len(values))
    lo = np.empty(len(values))
    for i, v in enumerate(values):
        h = float(v)
        hi[i] = h
        lo[i] = float(v - h)
    return hi, lo
