"""Lattice white noise, the Brownian sheet, and Monte-Carlo field simulation.

The stochastic convolution is discretized as

    I2(t, x) ~= sigma * sum_m w_m * (psi_m (*) dB_{n_t - m})(x),

where dB are independent cell increments with variance dt * dx^d, psi_m is
the lag kernel (2pi)^-d int e^{i u y} E_{alpha,alpha}(-lambda s_m^alpha
|y|^2) dy at the panel-midpoint lag, cell-averaged in space, and w_m is the
exact panel average of s^(alpha-1) (product integration: for alpha < 1 the
point value at the last panel would diverge, the average integrates the
singularity exactly as dt^alpha / (alpha dt)).

Randomness is counter-based and fully reproducible: sample k of a run with
seed S draws from Philox keyed by SeedSequence(S, spawn_key=(k,)); cell
values are successive counters of that stream (numpy ziggurat gaussians,
bit-stable for a fixed numpy release).  Results therefore never depend on
scheduling or worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, DivergenceWarning, StabilityWarning
from .kernel import EquationSpec, axis_window, radial_profile
from .specfun import MLOrder, ml_negative_axis
from .transforms import SpectralGrid

__all__ = [
    "LatticeSpec",
    "FieldSample",
    "VarianceEstimate",
    "white_noise_increments",
    "sample_brownian_sheet",
    "simulate_field",
    "estimate_moments",
    "lattice_point_variance",
]

_KERNEL_ELEMENT_BUDGET = 40_000_000


@dataclass(frozen=True)
class LatticeSpec:
    """Space-time lattice: n_t panels on [0, t_final], n_x cells per axis on
    [-domain_half_width, domain_half_width]."""

    d: int
    t_final: float
    n_t: int
    domain_half_width: float
    n_x: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DomainError(f"simulation supports d in {{1, 2}}, got {self.d}")
        if self.n_t < 8:
            raise DomainError("n_t must be at least 8")
        if self.n_x < 32 or self.n_x % 2 != 0:
            raise DomainError("n_x must be an even integer >= 32")
        if not (self.t_final > 0.0 and self.domain_half_width > 0.0):
            raise DomainError("t_final and domain_half_width must be positive")
        if self.n_t * (2 * self.n_x) ** self.d > _KERNEL_ELEMENT_BUDGET:
            raise DomainError("lattice exceeds the kernel-cache memory budget")

    @property
    def dt(self) -> float:
        return self.t_final / self.n_t

    @property
    def dx(self) -> float:
        return 2.0 * self.domain_half_width / self.n_x

    def cell_centers(self) -> np.ndarray:
        j = np.arange(self.n_x)
        return -self.domain_half_width + (j + 0.5) * self.dx

    def space_shape(self) -> tuple:
        return (self.n_x,) * self.d


@dataclass
class FieldSample:
    """One realization of Y(t_final, .) on the lattice, split into its parts."""

    spec: EquationSpec
    lattice: LatticeSpec
    seed: int
    values: np.ndarray
    i1_part: np.ndarray
    i2_part: np.ndarray


@dataclass(frozen=True)
class VarianceEstimate:
    """Empirical moments of Y(t_final, point) over independent samples.

    std_error_of_variance is the Gaussian-theory value s^2 sqrt(2/(n-1)),
    exact here because Y is a linear functional of Gaussian noise.
    """

    mean: float
    variance: float
    std_error_of_variance: float
    n_samples: int

    @property
    def std_error_of_mean(self) -> float:
        return math.sqrt(self.variance / self.n_samples)


def _stream(seed: int, index: int | None = None) -> np.random.Generator:
    if index is None:
        ss = np.random.SeedSequence(seed)
    else:
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def white_noise_increments(lattice: LatticeSpec, seed: int) -> np.ndarray:
    """Independent N(0, dt * dx^d) cell increments, shape (n_t, n_x, [n_x])."""
    sd = math.sqrt(lattice.dt * lattice.dx**lattice.d)
    rng = _stream(seed)
    return sd * rng.standard_normal((lattice.n_t,) + lattice.space_shape())


def sample_brownian_sheet(lattice: LatticeSpec, seed: int) -> np.ndarray:
    """Brownian sheet on the positive orthant: B(i dt, j dx) by cumulative sums.

    Node (i, j, [k]) carries B at time i*dt and space coordinates j*dx
    (and k*dx), i.e. the lattice spans [0, t_final] x [0, 2*half_width]^d.
    B vanishes on every face touching the origin and the increments
    reproduce the product covariance min(s,t) * prod min(x_i, y_i).
    """
    inc = white_noise_increments(lattice, seed)
    sheet = inc
    for ax in range(1 + lattice.d):
        sheet = np.cumsum(sheet, axis=ax)
    out = np.zeros(tuple(s + 1 for s in sheet.shape))
    out[(slice(1, None),) * sheet.ndim] = sheet
    return out


# --------------------------------------------------------------------------
# lag kernels
# --------------------------------------------------------------------------


def _padded_axis(lattice: LatticeSpec) -> np.ndarray:
    n = 2 * lattice.n_x
    dy = 2.0 * math.pi / (n * lattice.dx)
    return (np.arange(n) - n // 2) * dy


@lru_cache(maxsize=8)
def _lag_kernels(spec: EquationSpec, lattice: LatticeSpec) -> np.ndarray:
    """Real-space lag kernels w_m * psi_m on the padded offset lattice.

    Shape (n_t, 2 n_x, [2 n_x]); row m-1 belongs to the lag panel
    [(m-1) dt, m dt].  Offsets run over ((k - n_x) * dx for k in 0..2n_x),
    exactly the range needed for linear convolution of the n_x-cell noise.
    """
    alpha, lam = spec.alpha, spec.lambda_
    dt, dx = lattice.dt, lattice.dx
    n_pad = 2 * lattice.n_x
    y = _padded_axis(lattice)
    cutoff = math.pi / dx

    if alpha < 1.0 and math.sqrt(lam) * (0.5 * dt) ** (alpha / 2.0) < dx:
        warnings.warn(
            "last-panel lag kernel is narrower than the spatial cell; "
            "refine n_t/n_x to resolve the (t-r)^(alpha-1) singularity",
            StabilityWarning,
            stacklevel=3,
        )

    # one Mittag-Leffler table serves every lag
    umax = math.sqrt(lam * lattice.t_final**alpha) * math.sqrt(spec.d) * cutoff
    uu = np.linspace(0.0, umax * (1.0 + 1e-12), 16384)
    ml_tab = CubicSpline(uu, ml_negative_axis(MLOrder(alpha, alpha), uu**2, rel_tol=2e-7))

    sinc1 = np.sinc(y * dx / (2.0 * math.pi))  # cell average: box filter per axis
    if spec.d == 1:
        r = np.abs(y)
        cell = sinc1
    else:
        r = np.sqrt(y[:, None] ** 2 + y[None, :] ** 2)
        cell = sinc1[:, None] * sinc1[None, :]

    m = np.arange(1, lattice.n_t + 1)
    s_mid = (m - 0.5) * dt
    w = ((m * dt) ** alpha - ((m - 1) * dt) ** alpha) / (alpha * dt)

    rows = np.empty((lattice.n_t,) + (n_pad,) * spec.d)
    norm = (n_pad * (y[1] - y[0]) / (2.0 * math.pi)) ** spec.d
    for i in range(lattice.n_t):
        scale = math.sqrt(lam * s_mid[i] ** alpha)
        gv = ml_tab(scale * r) * cell
        field = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(gv))) * norm
        rows[i] = w[i] * field.real
    return rows


def _check_grid(spec: EquationSpec, lattice: LatticeSpec, grid: SpectralGrid | None):
    if grid is None:
        return
    if grid.d != spec.d:
        raise DomainError("grid dimension does not match the equation spec")
    if grid.points_per_axis != 2 * lattice.n_x or not math.isclose(
        grid.cutoff, math.pi / lattice.dx, rel_tol=1e-9
    ):
        raise DomainError(
            "simulation grid must match the lattice: points_per_axis = 2*n_x "
            f"and cutoff = pi/dx = {math.pi / lattice.dx:.6g}"
        )


def _i1_on_centers(spec: EquationSpec, lattice: LatticeSpec) -> np.ndarray:
    """I1(t_final, .) at the cell centers via a half-cell phase-shifted FFT."""
    n_x = lattice.n_x
    n_pad = 2 * n_x
    y = _padded_axis(lattice)
    cutoff = math.pi / lattice.dx
    prof = radial_profile(spec, lattice.t_final, math.sqrt(spec.d) * cutoff)
    if spec.d == 1:
        r = np.abs(y)
    else:
        r = np.sqrt(y[:, None] ** 2 + y[None, :] ** 2)
    gv = prof(r).astype(complex)
    if abs(float(prof(np.array([cutoff]))[0])) > 1e-10:
        w1 = axis_window(y, cutoff)
        for ax in range(spec.d):
            shape = [1] * spec.d
            shape[ax] = y.size
            gv = gv * w1.reshape(shape)
    shift = np.exp(1j * y * (lattice.dx / 2.0))
    for ax in range(spec.d):
        shape = [1] * spec.d
        shape[ax] = y.size
        gv = gv * shift.reshape(shape)
    norm = (n_pad * (y[1] - y[0]) / (2.0 * math.pi)) ** spec.d
    field = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(gv))) * norm
    sl = slice(n_x - n_x // 2, n_x + n_x // 2)
    return np.ascontiguousarray(field.real[(sl,) * spec.d])


def simulate_field(
    spec: EquationSpec, lattice: LatticeSpec, grid: SpectralGrid | None = None, seed: int = 0
) -> FieldSample:
    """Simulate Y(t_final, .) = I1 + I2 on the lattice, deterministically in seed.

    I2 is the FFT convolution of the per-lag kernels with the white-noise
    increments, zero-padded to twice the cell count so the circular wrap
    never touches physical offsets.  sigma = 0 yields i2_part identically 0.
    """
    _check_grid(spec, lattice, grid)
    if spec.d != lattice.d:
        raise DomainError("lattice dimension does not match the equation spec")
    i1 = _i1_on_centers(spec, lattice)
    n_x, n_t = lattice.n_x, lattice.n_t
    space_axes = tuple(range(1, 1 + spec.d))
    if spec.sigma == 0.0:
        i2 = np.zeros_like(i1)
    else:
        rows = _lag_kernels(spec, lattice)
        noise = white_noise_increments(lattice, seed)
        pad = np.zeros((n_t,) + (2 * n_x,) * spec.d)
        pad[(slice(None),) + (slice(0, n_x),) * spec.d] = noise
        khat = np.fft.rfftn(np.fft.ifftshift(rows, axes=space_axes), axes=space_axes)
        bhat = np.fft.rfftn(pad, axes=space_axes)
        acc = np.sum(khat[::-1] * bhat, axis=0)
        conv = np.fft.irfftn(acc, s=(2 * n_x,) * spec.d, axes=tuple(range(spec.d)))
        i2 = spec.sigma * np.ascontiguousarray(conv[(slice(0, n_x),) * spec.d])
    return FieldSample(spec, lattice, seed, i1 + i2, i1, i2)


def _point_index(lattice: LatticeSpec, point) -> tuple:
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if pt.shape != (lattice.d,):
        raise DomainError(f"point must be a {lattice.d}-vector")
    centers = lattice.cell_centers()
    idx = []
    for c in pt:
        i = int(np.argmin(np.abs(centers - c)))
        if abs(centers[i] - c) > 1e-9 * lattice.dx:
            raise DomainError(
                f"point coordinate {c} is not a cell center; nearest is {centers[i]:.12g}"
            )
        idx.append(i)
    return tuple(idx)


def _point_kernel(spec: EquationSpec, lattice: LatticeSpec, point) -> np.ndarray:
    """K[m-1, cells] = (w_m psi_m)(point - z_cell), time-flipped for pairing."""
    rows = _lag_kernels(spec, lattice)
    idx = _point_index(lattice, point)
    n_x = lattice.n_x
    offs = [idx[ax] - np.arange(n_x) + n_x for ax in range(lattice.d)]
    if lattice.d == 1:
        k = rows[:, offs[0]]
    else:
        k = rows[:, offs[0][:, None], offs[1][None, :]]
    return k[::-1].copy()  # noise slice j pairs lag m = n_t - j


def lattice_point_variance(spec: EquationSpec, lattice: LatticeSpec, point) -> float:
    """Exact variance of the simulated I2(t_final, point).

    This is the deterministic value the empirical Monte-Carlo variance
    estimates; it converges to the spectral variance integral from below as
    the lattice is refined (Cauchy-Schwarz on the panel averages, spectral
    truncation at the Nyquist cutoff).
    """
    k = _point_kernel(spec, lattice, point)
    return spec.sigma**2 * float(np.sum(k * k)) * lattice.dt * lattice.dx**lattice.d


def _moment_chunk(args) -> np.ndarray:
    kflip, sd, seed, start, stop, shape = args
    out = np.empty(stop - start)
    for i in range(start, stop):
        noise = _stream(seed, i).standard_normal(shape)
        out[i - start] = float(np.sum(kflip * noise)) * sd
    return out


def estimate_moments(
    spec: EquationSpec,
    lattice: LatticeSpec,
    grid: SpectralGrid | None,
    point,
    n_samples: int,
    seed: int,
    n_workers: int = 1,
) -> VarianceEstimate:
    """Empirical mean/variance of Y(t_final, point) over derived substreams.

    Sample k uses the stream keyed by (seed, k), so any partition of the
    index range over workers reproduces identical values.  A spec that is
    not classified Mild still runs, with a divergence warning: the lattice
    variance then grows without bound under refinement.
    """
    from .mildness import classify

    _check_grid(spec, lattice, grid)
    if n_samples < 2:
        raise DomainError("n_samples must be at least 2")
    verdict = classify(spec.alpha, spec.d)
    if verdict.status != "Mild":
        warnings.warn(
            f"spec (alpha={spec.alpha}, d={spec.d}) is {verdict.status}: "
            "the estimated variance does not converge under lattice refinement",
            DivergenceWarning,
            stacklevel=2,
        )
    idx = _point_index(lattice, point)
    i1_val = float(_i1_on_centers(spec, lattice)[idx])
    if spec.sigma == 0.0:
        # every sample equals I1 at the point: zero variance exactly
        return VarianceEstimate(i1_val, 0.0, 0.0, n_samples)
    else:
        kflip = _point_kernel(spec, lattice, point) * spec.sigma
        sd = math.sqrt(lattice.dt * lattice.dx**lattice.d)
        shape = (lattice.n_t,) + lattice.space_shape()
        if n_workers <= 1:
            vals = _moment_chunk((kflip, sd, seed, 0, n_samples, shape))
        else:
            bounds = np.linspace(0, n_samples, n_workers + 1, dtype=int)
            tasks = [
                (kflip, sd, seed, int(a), int(b), shape)
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                parts = list(pool.map(_moment_chunk, tasks))
            vals = np.concatenate(parts)
        vals = vals + i1_val
    mean = float(np.mean(vals))
    var = float(np.var(vals, ddof=1))
    se_var = var * math.sqrt(2.0 / (n_samples - 1))
    return VarianceEstimate(mean, var, se_var, n_samples)
