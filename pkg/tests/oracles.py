"""Independent reference implementations used to freeze expected values.

Everything here is deliberately built on different machinery than the
package: raw arbitrary-precision series, mpmath adaptive quadrature, and
scalar nested quadrature.  Slow but trustworthy.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from mpmath import mp
from scipy import integrate


def ml_series_reference(alpha: float, beta: float, z: float, extra_dps: int = 35) -> float:
    """E_{alpha,beta}(z) summed term by term in adaptive precision.

    For rational alpha = p/q each residue class k = m q + r satisfies
    Gamma(p(m+1)+c) = Gamma(pm+c) * prod_i (pm+c+i), so classes are summed
    with pure multiplications after one seed Gamma; this makes thousands of
    digits of cancellation affordable.
    """
    x = abs(z)
    if z < 0 and x > 1.0:
        lnx = math.log(x)
        kpeak = x ** (1.0 / alpha) / alpha
        ln_peak = max(
            k * lnx - math.lgamma(alpha * k + beta)
            for k in np.unique(np.maximum(1, (kpeak * np.exp(np.linspace(-2, 1, 40))).astype(int)))
        )
        ln_peak = max(ln_peak, 0.0)
    else:
        ln_peak, kpeak = 0.0, max(1.0, x ** (1.0 / alpha) / alpha if x > 0 else 1.0)
    dps = int(ln_peak / math.log(10)) + extra_dps
    if dps > 4000:
        raise RuntimeError("series reference infeasible at this argument")
    fr = Fraction(alpha).limit_denominator(64)
    rational = abs(float(fr) - alpha) < 1e-13
    with mp.workdps(dps):
        zz = mp.mpf(z)
        tiny = mp.mpf(10) ** (-dps - 6)
        if rational:
            # alpha treated as exactly p/q: the class stride p must be
            # coherent with the seed arguments, else the deep cancellation
            # across classes is destroyed
            p, q = fr.numerator, fr.denominator
            zq = zz**q
            total = mp.mpf(0)
            for r in range(q):
                c = mp.mpf(p) * r / q + mp.mpf(beta)
                term = zz**r / mp.gamma(c)
                m = 0
                cls = mp.mpf(0)
                while True:
                    cls += term
                    denom = mp.mpf(1)
                    for i in range(p):
                        denom *= p * m + c + i
                    term = term * zq / denom
                    m += 1
                    if m * q > kpeak + 10 and abs(term) < tiny:
                        break
                    if m > 10_000_000:
                        raise RuntimeError("runaway series")
                total += cls
        else:
            total = mp.mpf(0)
            zk = mp.mpf(1)
            k = 0
            while True:
                total += zk / mp.gamma(mp.mpf(alpha) * k + mp.mpf(beta))
                zk *= zz
                k += 1
                if k > kpeak + 10 and abs(zk) / mp.gamma(mp.mpf(alpha) * k + mp.mpf(beta)) < tiny:
                    break
                if k > 200_000:
                    raise RuntimeError("runaway series")
        return float(total)


def ml_bernstein_reference(alpha: float, beta: float, x: float, dps: int = 40) -> float:
    """E_{alpha,beta}(-x), x > 0, via mpmath adaptive quadrature of the
    completely-monotone representation (0 < alpha <= beta <= 1 only)."""
    assert 0 < alpha <= beta <= 1 and not (alpha == 1 and beta == 1) and x > 0
    with mp.workdps(dps):
        a, b, xx = mp.mpf(alpha), mp.mpf(beta), mp.mpf(x)
        u = xx ** (1 / a)

        def K(s):
            num = mp.sin((b - a) * mp.pi) + s**a * mp.sin(b * mp.pi)
            den = mp.pi * (s ** (2 * a) + 2 * s**a * mp.cos(a * mp.pi) + 1)
            return s ** (a - b) * num / den

        val = mp.quad(lambda s: mp.e ** (-s * u) * K(s), [0, 1, mp.inf])
        return float(xx ** ((1 - b) / a) * val)


def ml_reference(alpha: float, beta: float, z: float) -> float:
    """Best-available reference: series when affordable, else Bernstein quadrature."""
    try:
        return ml_series_reference(alpha, beta, z)
    except RuntimeError:
        if z < 0 and 0 < alpha <= beta <= 1 and not (alpha == 1 and beta == 1):
            return ml_bernstein_reference(alpha, beta, -z)
        raise


def erfc_oracle(x: float) -> float:
    """erfc via Maclaurin series (|x| <= 3) or Lentz continued fraction."""
    with mp.workdps(40):
        xx = mp.mpf(x)
        if abs(xx) <= 3:
            s = mp.mpf(0)
            term = xx
            n = 0
            while abs(term) > mp.mpf(10) ** -45:
                s += term / (2 * n + 1)
                n += 1
                term = term * (-(xx**2)) / n
            return float(1 - 2 / mp.sqrt(mp.pi) * s)
        # descending continued fraction:
        # erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        f = mp.mpf(0)
        for n in range(200, 0, -1):
            f = (n / mp.mpf(2)) / (xx + f)
        return float(mp.e ** (-(xx**2)) / mp.sqrt(mp.pi) / (xx + f))


def brute_force_j2(spec, t: float, eps: float, cutoff: float) -> float:
    """Doubly truncated variance integral by nested adaptive quadrature.

    Independent of the cumulative-table/spline pipeline in the package: the
    radial inner integral and the outer time integral are both done with
    scipy's adaptive rules and the scalar Mittag-Leffler evaluator.
    """
    from fracheat import MLOrder, mittag_leffler

    a, lam, d = spec.alpha, spec.lambda_, spec.d
    order = MLOrder(a, a)
    surface = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[d]

    def inner(s):
        def f(rho):
            e = mittag_leffler(order, -lam * s**a * rho * rho)
            return e * e * rho ** (d - 1)

        val, _ = integrate.quad(f, 0.0, cutoff, limit=200, epsrel=1e-8)
        return val

    def outer(s):
        return s ** (2.0 * a - 2.0) * inner(s)

    val, _ = integrate.quad(outer, eps, t, limit=100, epsrel=1e-6)
    return spec.sigma**2 * (2.0 * math.pi) ** -d * surface * val
