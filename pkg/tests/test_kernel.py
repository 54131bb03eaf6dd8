"""Tests for the deterministic solution kernels I1 and the lag kernel."""

import math

import numpy as np
import pytest

from fracheat.errors import DomainError, DomainTooSmallError
from fracheat.kernel import (
    EquationSpec,
    KernelField,
    TruncationReport,
    classical_kernel,
    default_spectral_grid,
    i1_field,
    lambda_kernel,
    mass_integral,
)
from fracheat.specfun import MLOrder, mittag_leffler


class TestEquationSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            EquationSpec(2.0, 1.0, 1.0, 1)  # alpha strictly below 2
        with pytest.raises(DomainError):
            EquationSpec(0.0, 1.0, 1.0, 1)
        with pytest.raises(DomainError):
            EquationSpec(1.0, 0.0, 1.0, 1)
        with pytest.raises(DomainError):
            EquationSpec(1.0, 1.0, 1.0, 0)
        EquationSpec(1.0, 1.0, -2.0, 3)  # sigma may be any real


class TestLambdaKernel:
    def test_classical_reduction(self):
        spec = EquationSpec(1.0)
        assert lambda_kernel(spec, 1.0, 1.0) == pytest.approx(0.3678794411714423, rel=1e-10)

    def test_zero_frequency_head(self):
        for alpha in (0.5, 1.0, 1.5):
            spec = EquationSpec(alpha)
            assert lambda_kernel(spec, 1.0, 0.0) == pytest.approx(
                1.0 / math.gamma(alpha), rel=1e-12
            )

    def test_specfun_composition(self):
        spec = EquationSpec(0.5, 1.0, 1.0, 1)
        t, r = 0.25, 2.0
        want = t**-0.5 * mittag_leffler(MLOrder(0.5, 0.5), -1.0 * t**0.5 * r)
        assert lambda_kernel(spec, t, r) == pytest.approx(want, rel=1e-10)

    def test_time_domain(self):
        with pytest.raises(DomainError):
            lambda_kernel(EquationSpec(0.5), 0.0, 1.0)


class TestClassicalKernel:
    def test_values(self):
        spec1 = EquationSpec(1.0, 1.0, 1.0, 1)
        assert classical_kernel(spec1, 1.0, [0.0]) == pytest.approx(
            0.28209479177387814, rel=1e-13
        )
        spec2 = EquationSpec(1.0, 1.0, 1.0, 2)
        assert classical_kernel(spec2, 1.0, [0.0, 0.0]) == pytest.approx(
            0.07957747154594767, rel=1e-13
        )
        assert classical_kernel(spec1, 1.0, [2.0]) == pytest.approx(
            0.10377687435514868, rel=1e-13
        )

    def test_requires_alpha_one(self):
        with pytest.raises(DomainError):
            classical_kernel(EquationSpec(1.5), 1.0, [0.0])


class TestI1Field:
    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("t,lam", [(0.5, 0.5), (1.0, 1.0), (2.0, 0.5), (1.0, 0.5), (2.0, 1.0)])
    def test_classical_consistency(self, d, t, lam):
        spec = EquationSpec(1.0, lam, 1.0, d)
        field = i1_field(spec, t)
        ax = field.x_axis
        if d == 1:
            ref = np.array([classical_kernel(spec, t, [x]) for x in ax])
        else:
            # radial closed form evaluated on the tensor grid
            r2 = ax[:, None] ** 2 + ax[None, :] ** 2
            ref = (4.0 * math.pi * lam * t) ** -1.0 * np.exp(-r2 / (4.0 * lam * t))
        assert np.max(np.abs(field.values - ref)) <= 1e-6

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    @pytest.mark.parametrize("d", [1, 2])
    def test_mass_conservation(self, alpha, d):
        spec = EquationSpec(alpha, 1.0, 1.0, d)
        field = i1_field(spec, 1.0)
        assert mass_integral(field) == pytest.approx(1.0, abs=1e-4)

    def test_mass_d2_superdiffusive_short_time(self):
        field = i1_field(EquationSpec(1.5, 1.0, 1.0, 2), 0.5)
        assert mass_integral(field) == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_boundary_decay(self, alpha):
        field = i1_field(EquationSpec(alpha, 1.0, 1.0, 1), 1.0)
        peak = np.max(np.abs(field.values))
        assert field.boundary_max() <= 1e-6 * peak

    @pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0])
    @pytest.mark.parametrize("d", [1, 2])
    def test_positivity_subdiffusive(self, alpha, d):
        # complete monotonicity of the symbol makes I1 a probability density;
        # the taper preserves nonnegativity exactly (NOT asserted for alpha > 1)
        spec = EquationSpec(alpha, 1.0, 1.0, d)
        field = i1_field(spec, 1.0)
        assert float(field.values.min()) >= -1e-8

    def test_d3_supported(self):
        spec = EquationSpec(1.5, 1.0, 1.0, 3)
        field = i1_field(spec, 1.0)
        assert field.values.shape == (128, 128, 128)
        assert np.all(np.isfinite(field.values))  # J1 = I1^2 finite on the grid

    def test_refuses_unresolvable_time(self):
        # a grid sized for t = 1 cannot hold the near-delta kernel at tiny t
        spec = EquationSpec(1.0)
        grid = default_spectral_grid(spec, 1.0)
        with pytest.raises(DomainError):
            i1_field(spec, 1e-16, grid)

    def test_custom_axis_evaluation(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        grid = default_spectral_grid(spec, 1.0)
        ax = np.linspace(-2.0, 2.0, 41)
        field = i1_field(spec, 1.0, grid, ax)
        ref = np.array([classical_kernel(spec, 1.0, [x]) for x in ax])
        assert np.max(np.abs(field.values - ref)) <= 1e-6

    def test_truncation_report(self):
        f_gauss = i1_field(EquationSpec(1.0), 1.0)
        assert not f_gauss.truncation_report.windowed
        f_slow = i1_field(EquationSpec(0.5), 1.0)
        assert f_slow.truncation_report.windowed
        assert f_slow.truncation_report.truncated


class TestMassIntegral:
    def test_zero_field(self):
        spec = EquationSpec(1.0)
        f = KernelField(spec, 1.0, np.linspace(-1, 1, 8), np.zeros(8), TruncationReport(1, 0, False, False, 0))
        assert mass_integral(f) == 0.0

    def test_classical_gaussian_mass(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        ax = np.linspace(-12.0, 12.0, 3001)
        vals = np.array([classical_kernel(spec, 1.0, [x]) for x in ax])
        f = KernelField(spec, 1.0, ax, vals, TruncationReport(1, 0, False, False, 0))
        assert mass_integral(f) == pytest.approx(1.0, abs=1e-6)

    def test_domain_too_small(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        ax = np.linspace(-2.0, 2.0, 101)
        vals = np.array([classical_kernel(spec, 1.0, [x]) for x in ax])
        f = KernelField(spec, 1.0, ax, vals, TruncationReport(1, 0, False, False, 0))
        with pytest.raises(DomainTooSmallError):
            mass_integral(f)


class TestDefaultGrid:
    def test_alpha_one_uses_decay_criterion(self):
        grid = default_spectral_grid(EquationSpec(1.0), 1.0)
        # E_1(-R^2) = 1e-10 at R = sqrt(10 ln 10)
        assert grid.cutoff == pytest.approx(math.sqrt(10.0 * math.log(10.0)), rel=1e-3)

    def test_slow_decay_hits_cap(self):
        spec = EquationSpec(0.5)
        grid = default_spectral_grid(spec, 1.0)
        n, L = grid.points_per_axis, 8.0
        assert grid.cutoff == pytest.approx(n * math.pi / (4.0 * L), rel=1e-12)
