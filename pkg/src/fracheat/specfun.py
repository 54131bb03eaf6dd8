"""Gamma, erfc and Mittag-Leffler functions on the real line.

The two-parameter function E_{a,b}(z) = sum_k z^k / Gamma(a k + b) is the
workhorse of every other module; the main use case is z <= 0.  The power
series is mathematically global but numerically treacherous on the negative
axis: the terms grow to ~exp(|z|^(1/a)) before they cancel, so a single
representation cannot cover the whole line.  Evaluation is organised as a
ladder of methods, each with an a-posteriori error estimate, escalating
until the requested tolerance is met:

1. plain double-precision series;
2. compensated double-double series (coefficients pre-tabulated once per
   (a, b) in high precision);
3. for 0 < a <= b <= 1, the completely-monotone Bernstein-density
   representation, integrated in log space (see ``ml_via_spectral_integral``);
4. exponential-plus-algebraic asymptotics for large |z|;
5. arbitrary-precision fallback.

Everything here is pure and reentrant; tables are immutable after creation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import rgamma

from ._dd import dd_add, dd_from_mpf, dd_mul_scalar, quick_two_sum, two_prod
from .errors import (
    ConvergenceError,
    DomainError,
    OverflowRangeError,
    PoleError,
    QuadratureError,
)

__all__ = [
    "MLOrder",
    "EvalPolicy",
    "DEFAULT_POLICY",
    "gamma_fn",
    "erfc_fn",
    "mittag_leffler",
    "ml_one_param",
    "ml_negative_axis",
    "spectral_kernel_K",
    "ml_via_spectral_integral",
    "gamma_ratio_seq",
]

_GAMMA_OVERFLOW = 171.61447887182298  # Gamma(x) overflows double beyond this

# ladder capacity constants (natural-log units of the series term peak)
_DOUBLE_NATS = 34.0
_DD_NATS = 66.0
_MP_MAX_NATS = 2400.0
_SPECTRAL_FLOOR = 1e-8  # certified relative accuracy of the Bernstein path


@dataclass(frozen=True)
class MLOrder:
    """Parameter pair (alpha, beta) of the two-parameter Mittag-Leffler function.

    alpha must lie in (0, 2] and beta must be positive.  The spectral
    (completely monotone) representation additionally requires
    0 < alpha <= beta <= 1; see ``in_monotone_window``.
    """

    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise DomainError(f"alpha must be in (0, 2], got {self.alpha}")
        if not (self.beta > 0.0):
            raise DomainError(f"beta must be positive, got {self.beta}")

    def in_monotone_window(self) -> bool:
        """True when E_{alpha,beta}(-x) is completely monotone (Pollard/Schneider)."""
        return 0.0 < self.alpha <= self.beta <= 1.0


@dataclass(frozen=True)
class EvalPolicy:
    """Evaluation knobs: series tolerance, term budget, method switch point.

    ``method_switch_threshold`` is the |z| above which the integral or
    asymptotic representation is preferred; ``None`` resolves to 30 for
    alpha >= 1 and 10 for alpha < 1.
    """

    series_tol: float = 1e-12
    max_terms: int = 400
    method_switch_threshold: float | None = None

    def __post_init__(self):
        if not (self.series_tol > 0.0):
            raise DomainError("series_tol must be positive")
        if self.max_terms < 16:
            raise DomainError("max_terms must be at least 16")

    def threshold_for(self, alpha: float) -> float:
        if self.method_switch_threshold is not None:
            return self.method_switch_threshold
        return 30.0 if alpha >= 1.0 else 10.0


DEFAULT_POLICY = EvalPolicy()


def gamma_fn(x: float) -> float:
    """Gamma function on the reals, poles and overflow made explicit."""
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x > _GAMMA_OVERFLOW:
        raise OverflowRangeError(f"Gamma({x}) exceeds double range")
    return math.gamma(x)


def erfc_fn(x: float) -> float:
    """Complementary error function."""
    return math.erfc(x)


def gamma_ratio_seq(alpha: float, k: int, kind: str) -> float:
    """Gamma-ratio sequences Gamma(k+1)/Gamma(alpha k + 1) and /Gamma(alpha k + alpha).

    Both are strictly decreasing in k for alpha > 1; they are the bounded
    monotone weights that make the term-by-term comparison with the
    exponential series work.
    """
    if alpha <= 1.0:
        raise DomainError(f"gamma_ratio_seq requires alpha > 1, got {alpha}")
    if k < 0 or k != int(k):
        raise DomainError("k must be a non-negative integer")
    if kind == "rho":
        denom = alpha * k + 1.0
    elif kind == "r":
        denom = alpha * k + alpha
    else:
        raise DomainError(f"kind must be 'rho' or 'r', got {kind!r}")
    return math.exp(math.lgamma(k + 1.0) - math.lgamma(denom))


# --------------------------------------------------------------------------
# series machinery
# --------------------------------------------------------------------------


def _ln_term_peak(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Estimate max_k [k ln x - lgamma(alpha k + beta)], the cancellation depth."""
    x = np.maximum(x, 1.0 + 1e-12)
    lnx = np.log(x)
    kstar = np.maximum(x ** (1.0 / alpha) / alpha, 1.0)
    # sample k on a log grid around the stationary point
    f = np.linspace(-2.5, 1.2, 60)
    kgrid = kstar[..., None] * np.exp(f)
    from scipy.special import gammaln

    vals = kgrid * lnx[..., None] - gammaln(alpha * kgrid + beta)
    return np.maximum(vals.max(axis=-1), 0.0)


def _series_double(alpha, beta, z, max_terms, tol):
    """Double-precision series; returns (val, est_abs_err, truncated mask)."""
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        term = np.full(z.shape, rgamma(beta))
        s = term.copy()
        peak = np.abs(term)
        zk = np.ones_like(z)
        small_run = np.zeros(z.shape, dtype=int)
        done = np.zeros(z.shape, dtype=bool)
        nterms = max_terms
        for k in range(1, max_terms):
            zk = zk * z
            term = zk * rgamma(alpha * k + beta)
            upd = ~done
            s[upd] += term[upd]
            at = np.abs(term)
            decreasing = at < peak
            peak = np.maximum(peak, at)
            small = (at <= tol * np.abs(s)) & decreasing
            small_run = np.where(small & upd, small_run + 1, 0)
            done = done | (small_run >= 2)
            if done.all():
                nterms = k + 1
                break
        bad = ~np.isfinite(s)
        s[bad] = 0.0
        peak[bad] = np.inf
        est = peak * 2.3e-16 * math.sqrt(nterms)
        return s, est, ~done


@lru_cache(maxsize=64)
def _rgamma_dd_table(alpha: float, beta: float, n: int):
    """1/Gamma(alpha k + beta), k < n, to double-double accuracy (via mpmath)."""
    from mpmath import mp

    with mp.workdps(40):
        vals = [1 / mp.gamma(mp.mpf(alpha) * k + mp.mpf(beta)) for k in range(n)]
    return dd_from_mpf(vals)


def _series_dd(alpha, beta, z, max_terms, tol):
    """Compensated double-double series; returns (val, est_abs_err, truncated)."""
    z = np.asarray(z, dtype=float)
    gh, gl = _rgamma_dd_table(float(alpha), float(beta), max_terms)
    sh = np.full(z.shape, gh[0])
    sl = np.full(z.shape, gl[0])
    ph = np.ones_like(z)
    pl = np.zeros_like(z)
    peak = np.abs(sh)
    small_run = np.zeros(z.shape, dtype=int)
    done = np.zeros(z.shape, dtype=bool)
    nterms = max_terms
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_terms):
            # power update: (ph, pl) *= z
            p, e = two_prod(ph, z)
            e = e + pl * z
            ph, pl = quick_two_sum(p, e)
            # term = power * (1/Gamma), both parts
            th, tl = dd_mul_scalar(ph, pl, gh[k])
            t2h, t2l = dd_mul_scalar(ph, pl, gl[k])
            th, tl = dd_add(th, tl, t2h, t2l)
            upd = ~done
            nsh, nsl = dd_add(sh, sl, th, tl)
            sh = np.where(upd, nsh, sh)
            sl = np.where(upd, nsl, sl)
            at = np.abs(th)
            decreasing = at < peak
            peak = np.maximum(peak, at)
            small = (at <= 1e-2 * tol * np.abs(sh)) & decreasing
            small_run = np.where(small & upd, small_run + 1, 0)
            done = done | (small_run >= 2)
            if done.all():
                nterms = k + 1
                break
    s = sh + sl
    bad = ~np.isfinite(s)
    s[bad] = 0.0
    peak[bad] = np.inf
    est = peak * 1.6e-32 * math.sqrt(nterms)
    return s, est, ~done


def _asymptotic_neg(alpha, beta, x, kmax=70):
    """Large-x expansion of E_{a,b}(-x): algebraic tail plus, for a >= 1, the
    oscillatory-decaying exponential contribution.  Returns (val, est_abs_err).

    Coefficients 1/Gamma(b - a k) that land on Gamma poles vanish exactly and
    are skipped.  The error estimate is the first omitted / first
    non-decreasing algebraic term, plus a conservative bound on the finite-x
    corrections to the exponential pair (empirically ~3/u of its amplitude).
    """
    x = np.asarray(x, dtype=float)
    s = np.zeros_like(x)
    est = np.full_like(x, np.inf)
    prev = np.full_like(x, np.inf)
    nz = np.zeros(x.shape, dtype=int)
    active = np.ones(x.shape, dtype=bool)
    xk = np.ones_like(x)
    xinv = 1.0 / x
    for k in range(1, kmax):
        xk = xk * xinv
        c = float(rgamma(beta - alpha * k))
        if c == 0.0:
            continue
        t = ((-1.0) ** (k - 1)) * xk * c
        at = np.abs(t)
        diverged = active & (nz > 0) & (at >= prev)
        est = np.where(diverged, prev, est)
        active = active & ~diverged
        s = np.where(active, s + t, s)
        est = np.where(active, at, est)
        prev = np.where(active, at, prev)
        nz = nz + active
        settled = active & (at < 1e-17 * np.abs(s))
        active = active & ~settled
        if not active.any():
            break
    est = np.where(nz == 0, 0.0, est)  # every coefficient vanished: tail is exactly 0
    if alpha > 1.0:
        u = x ** (1.0 / alpha)
        th = math.pi / alpha
        amp = (2.0 / alpha) * x ** ((1.0 - beta) / alpha) * np.exp(u * math.cos(th))
        s = s + amp * np.cos(u * math.sin(th) + math.pi * (1.0 - beta) / alpha)
        est = est + np.abs(amp) * np.minimum(1.0, 3.0 / u)
    elif alpha == 1.0:
        expp = x ** (1.0 - beta) * np.exp(-x) * math.cos(math.pi * (1.0 - beta))
        s = s + expp
        if beta != 1.0:
            est = est + np.abs(expp) * np.minimum(1.0, 3.0 / x)
    return s, est


def _spectral_neg(alpha, beta, x, h=0.035):
    """E_{a,b}(-x) through the Bernstein density K_{a,b} (Pollard/Schneider).

    With u = x^(1/a) the representation reads
        E_{a,b}(-x) = x^((1-b)/a) * int_0^inf exp(-s u) K_{a,b}(s) ds.
    Substituting v = ln(s u) makes the integrand analytic with
    double-exponential right decay and exponential left decay, so the
    trapezoid rule converges geometrically and one v-grid is shared by all
    x.  The density develops a sharp resonance near s = 1 as alpha -> 1;
    the step is refined accordingly.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rho_left = alpha - beta + 1.0 if beta > alpha else alpha + 1.0
    width = math.sqrt(max(2.0 * (1.0 + math.cos(alpha * math.pi)), 1e-30))
    hh = min(h, width / 8.0) if width < 8.0 * h else h
    v = np.arange(-48.0 / rho_left, 4.4 + hh, hh)
    ev = np.exp(v)
    u = x ** (1.0 / alpha)
    out = np.empty_like(x)
    # chunk to bound the (n_x, n_v) work matrix
    chunk = max(1, int(2**24 // ev.size))
    for i in range(0, x.size, chunk):
        sl = slice(i, min(i + chunk, x.size))
        smat = ev[None, :] / u[sl, None]
        integrand = np.exp(-ev)[None, :] * _kernel_K_raw(alpha, beta, smat) * smat
        out[sl] = hh * integrand.sum(axis=1)
    return x ** ((1.0 - beta) / alpha) * out


def _kernel_K_raw(alpha, beta, s):
    num = math.sin((beta - alpha) * math.pi) + s**alpha * math.sin(beta * math.pi)
    den = math.pi * (s ** (2.0 * alpha) + 2.0 * s**alpha * math.cos(alpha * math.pi) + 1.0)
    return s ** (alpha - beta) * num / den


@lru_cache(maxsize=16)
def _rational_order(alpha: float):
    from fractions import Fraction

    fr = Fraction(alpha).limit_denominator(50)
    if abs(float(fr) - alpha) < 1e-13:
        return fr.numerator, fr.denominator
    return None


def _mp_series(alpha, beta, z, max_terms, target_dps=None):
    """Arbitrary-precision series evaluation (scalar).

    For rational alpha = p/q the coefficients within each residue class
    k = m q + r obey Gamma(p(m+1)+c) = Gamma(pm+c) * prod_i (pm+c+i), so the
    class is summed with pure multiplications after one seed Gamma; this is
    what makes deep cancellation (hundreds of digits) affordable.
    """
    from mpmath import mp

    x = abs(z)
    lp = float(_ln_term_peak(alpha, beta, np.array([x]))[0]) if z < 0 else 0.0
    if lp > _MP_MAX_NATS:
        raise ConvergenceError(
            f"series for E_{{{alpha},{beta}}}({z}) needs more than "
            f"{int(lp / math.log(10))} digits; no evaluation path applies"
        )
    dps = target_dps or int(lp / math.log(10)) + 40
    kpeak = x ** (1.0 / alpha) / alpha if x > 1 else 1.0
    budget = max(max_terms, int(6 * kpeak) + 400, 2000)
    rat = _rational_order(float(alpha))
    with mp.workdps(dps):
        zz = mp.mpf(z)
        if rat is None:
            s = mp.mpf(0)
            zk = mp.mpf(1)
            k = 0
            while k < budget:
                s += zk / mp.gamma(mp.mpf(alpha) * k + mp.mpf(beta))
                zk *= zz
                k += 1
                if k > kpeak + 8 and abs(zk) / mp.gamma(mp.mpf(alpha) * k + mp.mpf(beta)) < mp.mpf(10) ** (-dps - 4):
                    break
            else:
                raise ConvergenceError("mp series budget exhausted")
        else:
            # alpha treated as exactly p/q; the seed arguments must be
            # coherent with the integer class stride p or the cross-class
            # cancellation is destroyed
            p, q = rat
            s = mp.mpf(0)
            zq = zz**q
            for r in range(q):
                c = mp.mpf(p) * r / q + mp.mpf(beta)
                term = zz**r / mp.gamma(c)
                m = 0
                cls = mp.mpf(0)
                while True:
                    cls += term
                    denom = mp.mpf(1)
                    base = p * m + c
                    for i in range(p):
                        denom *= base + i
                    term = term * zq / denom
                    m += 1
                    if m * q > kpeak + 8 and abs(term) < mp.mpf(10) ** (-dps - 4):
                        break
                    if m * q > budget:
                        raise ConvergenceError("mp series budget exhausted")
                s += cls
        result = float(s)
        # verify the precision actually covered the cancellation
        if result != 0.0 and lp - math.log(abs(result)) > (dps - 12) * math.log(10):
            return _mp_series(alpha, beta, z, max_terms, target_dps=dps + int(-math.log10(abs(result))) + 30)
        return result


# --------------------------------------------------------------------------
# the evaluation ladder
# --------------------------------------------------------------------------


def _eval_negative(alpha, beta, x, tol, max_terms, threshold):
    """Evaluate E_{a,b}(-x) for a 1-D array x > 0 via the method ladder."""
    x = np.asarray(x, dtype=float).ravel()
    out = np.full(x.shape, np.nan)
    todo = np.ones(x.shape, dtype=bool)
    monotone = 0.0 < alpha <= beta <= 1.0 and not (alpha == 1.0 and beta == 1.0)

    # spectral representation is the designated path for large arguments in
    # the completely-monotone window
    if monotone and tol >= _SPECTRAL_FLOOR:
        big = todo & (x > threshold)
        if big.any():
            out[big] = _spectral_neg(alpha, beta, x[big])
            todo &= ~big
    if not todo.any():
        return out

    # plain double series
    v, est, trunc = _series_double(alpha, beta, -x, max_terms, tol)
    ok = todo & ~trunc & (est <= tol * np.abs(v))
    out[ok] = v[ok]
    todo &= ~ok
    if not todo.any():
        return out

    # double-double series where the cancellation depth allows
    lp = _ln_term_peak(alpha, beta, np.where(todo, x, 1.0))
    dd_mask = todo & (lp <= _DD_NATS)
    if dd_mask.any():
        v, est, trunc = _series_dd(alpha, beta, -x[dd_mask], max_terms, tol)
        ok = ~trunc & (est <= tol * np.abs(v))
        idx = np.flatnonzero(dd_mask)[ok]
        out[idx] = v[ok]
        todo[idx] = False
    if not todo.any():
        return out

    # asymptotics, accepted only on their own error estimate
    sel = np.flatnonzero(todo)
    v, est = _asymptotic_neg(alpha, beta, x[sel])
    ok = est <= tol * np.abs(v)
    out[sel[ok]] = v[ok]
    todo[sel[ok]] = False
    if not todo.any():
        return out

    # spectral fallback for monotone-window stragglers below the switch point
    if monotone and tol >= _SPECTRAL_FLOOR:
        out[todo] = _spectral_neg(alpha, beta, x[todo])
        todo &= False
    if not todo.any():
        return out

    # arbitrary precision, point by point
    for i in np.flatnonzero(todo):
        out[i] = _mp_series(alpha, beta, -float(x[i]), max_terms)
    return out


def _eval_positive(alpha, beta, z, tol, max_terms):
    """Series evaluation for z >= 0 (no cancellation; growth-limited)."""
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    v, est, trunc = _series_double(alpha, beta, zz, max_terms, tol)
    if np.any(np.isinf(est)):
        raise OverflowRangeError(f"E_{{{alpha},{beta}}} overflows for argument {z}")
    if np.any(trunc):
        raise ConvergenceError(
            f"series did not meet tolerance within {max_terms} terms for z={z}"
        )
    return v


def mittag_leffler(order: MLOrder, z: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.

    On the negative axis the evaluation ladder guarantees a relative error
    of ``policy.series_tol`` in the series/extended-precision regime; in the
    spectral regime (monotone window, |z| above the switch threshold) the
    certified floor is 1e-8.
    """
    a, b = order.alpha, order.beta
    z = float(z)
    if z == 0.0:
        return float(rgamma(b))
    if z > 0.0:
        return float(_eval_positive(a, b, z, policy.series_tol, policy.max_terms)[0])
    x = np.array([-z])
    return float(
        _eval_negative(a, b, x, policy.series_tol, policy.max_terms, policy.threshold_for(a))[0]
    )


def ml_one_param(alpha: float, z: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """One-parameter function E_alpha(z) = E_{alpha,1}(z) (pure delegation)."""
    return mittag_leffler(MLOrder(alpha, 1.0), z, policy)


def ml_negative_axis(order: MLOrder, x, rel_tol: float = 1e-8, max_terms: int = 400) -> np.ndarray:
    """Vectorized E_{alpha,beta}(-x) for x >= 0 (bulk evaluation for grids).

    This is the entry point used by the kernel and variance machinery; it
    shares the scalar ladder but amortizes table construction across the
    whole array.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise DomainError("ml_negative_axis expects x >= 0")
    shape = x.shape
    x = x.ravel()
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = rgamma(order.beta)
    if (~zero).any():
        thr = DEFAULT_POLICY.threshold_for(order.alpha)
        out[~zero] = _eval_negative(order.alpha, order.beta, x[~zero], rel_tol, max_terms, thr)
    return out.reshape(shape)


def spectral_kernel_K(order: MLOrder, s) -> float | np.ndarray:
    """Bernstein density K_{alpha,beta}(s) of the completely monotone E_{a,b}(-x).

        K(s) = s^(a-b) [sin((b-a)pi) + s^a sin(b pi)]
               / (pi [s^(2a) + 2 s^a cos(a pi) + 1]),     s > 0,

    nonnegative exactly on 0 < alpha <= beta <= 1.  At alpha = beta = 1 the
    underlying measure degenerates to the point mass at s = 1 and no density
    exists.
    """
    if not order.in_monotone_window():
        raise DomainError(
            f"spectral kernel requires 0 < alpha <= beta <= 1, got {order}"
        )
    if order.alpha == 1.0 and order.beta == 1.0:
        raise DomainError("alpha = beta = 1: Bernstein measure is a point mass, no density")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0.0):
        raise DomainError("spectral kernel requires s > 0")
    val = _kernel_K_raw(order.alpha, order.beta, s_arr)
    return float(val) if np.isscalar(s) or s_arr.ndim == 0 else val


def ml_via_spectral_integral(order: MLOrder, x: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """E_{alpha,beta}(-x) by quadrature over the Bernstein density (x > 0).

    Fully independent of the series path; the two must agree to 1e-5 on the
    monotone window.  A step-halving check certifies the quadrature and
    raises ``QuadratureError`` when the refinement disagrees.
    """
    if not order.in_monotone_window():
        raise DomainError(
            f"spectral integral requires 0 < alpha <= beta <= 1, got {order}"
        )
    if order.alpha == 1.0 and order.beta == 1.0:
        raise DomainError("alpha = beta = 1: Bernstein measure is a point mass, no density")
    if not x > 0.0:
        raise DomainError(f"spectral integral requires x > 0, got {x}")
    coarse = float(_spectral_neg(order.alpha, order.beta, np.array([x]), h=0.05)[0])
    fine = float(_spectral_neg(order.alpha, order.beta, np.array([x]), h=0.025)[0])
    if abs(fine - coarse) > 1e-7 * max(abs(fine), 1e-300):
        raise QuadratureError(
            f"spectral quadrature failed to stabilize for {order}, x={x}: "
            f"{coarse} vs {fine}"
        )
    return fine
