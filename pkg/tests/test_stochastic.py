"""Tests for lattice noise, the Brownian sheet, and Monte-Carlo simulation."""

import math

import numpy as np
import pytest

from fracheat.errors import DomainError, DivergenceWarning, StabilityWarning
from fracheat.kernel import EquationSpec
from fracheat.mildness import closed_form_j2_alpha1
from fracheat.stochastic import (
    FieldSample,
    LatticeSpec,
    estimate_moments,
    lattice_point_variance,
    sample_brownian_sheet,
    simulate_field,
    white_noise_increments,
)
from fracheat.stochastic import _i1_on_centers


class TestLatticeSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            LatticeSpec(3, 1.0, 16, 8.0, 64)
        with pytest.raises(DomainError):
            LatticeSpec(1, 1.0, 4, 8.0, 64)
        with pytest.raises(DomainError):
            LatticeSpec(1, 1.0, 16, 8.0, 31)
        with pytest.raises(DomainError):
            LatticeSpec(2, 1.0, 4096, 8.0, 1024)  # memory budget
        lat = LatticeSpec(1, 2.0, 16, 8.0, 64)
        assert lat.dt == 0.125
        assert lat.dx == 0.25
        assert lat.cell_centers()[0] == pytest.approx(-8.0 + 0.125)


class TestWhiteNoise:
    def test_mean_and_variance(self):
        lat = LatticeSpec(1, 1.0, 512, 8.0, 256)  # 131072 cells
        inc = white_noise_increments(lat, 123)
        n = inc.size
        cell_var = lat.dt * lat.dx
        # mean within 5 standard errors of zero
        se_mean = math.sqrt(cell_var / n)
        assert abs(inc.mean()) <= 5.0 * se_mean
        # per-cell variance within 5 standard errors of dt*dx^d
        se_var = cell_var * math.sqrt(2.0 / (n - 1))
        assert abs(inc.var() - cell_var) <= 5.0 * se_var

    def test_determinism(self):
        lat = LatticeSpec(1, 1.0, 16, 4.0, 32)
        a = white_noise_increments(lat, 7)
        b = white_noise_increments(lat, 7)
        assert np.array_equal(a, b)
        c = white_noise_increments(lat, 8)
        assert not np.array_equal(a, c)

    def test_dx_halving_scales_variance(self):
        # halving dx divides each increment variance by 2^d
        lat_coarse = LatticeSpec(2, 1.0, 8, 4.0, 32)
        lat_fine = LatticeSpec(2, 1.0, 8, 4.0, 64)
        v_c = white_noise_increments(lat_coarse, 1).var()
        v_f = white_noise_increments(lat_fine, 1).var()
        n = 8 * 64 * 64
        tol = 5.0 * math.sqrt(2.0 / n) * 4.0  # relative, generous
        assert v_c / v_f == pytest.approx(4.0, rel=tol)


class TestBrownianSheet:
    def test_zero_on_origin_faces(self):
        lat = LatticeSpec(1, 1.0, 16, 4.0, 32)
        sheet = sample_brownian_sheet(lat, 3)
        assert np.all(sheet[0, :] == 0.0)
        assert np.all(sheet[:, 0] == 0.0)

    def test_covariance_structure(self):
        # lattice with nodes at t in {1, 2}, x in {1, 3}
        lat = LatticeSpec(1, 2.0, 16, 1.6, 32)  # dt = 0.125, dx = 0.1
        it1, ix1 = 8, 10  # (1.0, 1.0)
        it2, ix2 = 16, 30  # (2.0, 3.0)
        n = 2000
        b11 = np.empty(n)
        b23 = np.empty(n)
        for k in range(n):
            sheet = sample_brownian_sheet(lat, 50_000 + k)
            b11[k] = sheet[it1, ix1]
            b23[k] = sheet[it2, ix2]
        # Var[B(1,1)] = 1*1
        se = math.sqrt(2.0 / (n - 1))
        assert abs(b11.var(ddof=1) - 1.0) <= 5.0 * se
        # Cov(B(1,1), B(2,3)) = min(1,2)*min(1,3) = 1
        cov = float(np.mean(b11 * b23))
        se_cov = math.sqrt((1.0 * 12.0 + 1.0) / n)  # Var products bound
        assert abs(cov - 1.0) <= 5.0 * se_cov
        # Var[B(2,3)] = 2*3 = 6
        se6 = 6.0 * math.sqrt(2.0 / (n - 1))
        assert abs(b23.var(ddof=1) - 6.0) <= 5.0 * se6


class TestSimulateField:
    def test_sigma_zero(self):
        spec = EquationSpec(1.0, 1.0, 0.0, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        s = simulate_field(spec, lat, None, 11)
        assert np.all(s.i2_part == 0.0)
        assert np.array_equal(s.values, s.i1_part)

    def test_same_seed_bit_identical(self):
        spec = EquationSpec(1.5, 1.0, 1.0, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        a = simulate_field(spec, lat, None, 5)
        b = simulate_field(spec, lat, None, 5)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.i2_part, b.i2_part)

    def test_parts_sum(self):
        spec = EquationSpec(0.8, 1.0, 0.5, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        s = simulate_field(spec, lat, None, 5)
        assert np.array_equal(s.values, s.i1_part + s.i2_part)

    def test_d_mismatch(self):
        with pytest.raises(DomainError):
            simulate_field(EquationSpec(1.0, 1.0, 1.0, 2), LatticeSpec(1, 1.0, 16, 8.0, 64))

    @pytest.mark.parametrize(
        "alpha,d,n_seeds", [(1.0, 1, 400), (1.5, 1, 400), (1.5, 2, 300)]
    )
    def test_mean_identity(self, alpha, d, n_seeds):
        # E[Y(t, x)] = I1(t, x): empirical mean within 5 SE at 3 probe points
        spec = EquationSpec(alpha, 1.0, 1.0, d)
        lat = (
            LatticeSpec(1, 1.0, 32, 8.0, 64)
            if d == 1
            else LatticeSpec(2, 1.0, 16, 6.0, 32)
        )
        centers = lat.cell_centers()
        probes_1d = [centers[lat.n_x // 2], centers[lat.n_x // 2 + 3], centers[lat.n_x // 4]]
        probes = [[p] * d for p in probes_1d]
        i1 = _i1_on_centers(spec, lat)
        sums = np.zeros(3)
        sqs = np.zeros(3)
        for k in range(n_seeds):
            s = simulate_field(spec, lat, None, 900_000 + k)
            for j, p in enumerate(probes_1d):
                idx = (int(np.argmin(np.abs(centers - p))),) * d
                v = s.values[idx]
                sums[j] += v
                sqs[j] += v * v
        for j, p in enumerate(probes_1d):
            idx = (int(np.argmin(np.abs(centers - p))),) * d
            mean = sums[j] / n_seeds
            var = (sqs[j] - n_seeds * mean**2) / (n_seeds - 1)
            se = math.sqrt(var / n_seeds)
            assert abs(mean - i1[idx]) <= 5.0 * se, (alpha, d, p)


class TestEstimateMoments:
    def test_sigma_zero_variance_exactly_zero(self):
        spec = EquationSpec(1.0, 1.0, 0.0, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        est = estimate_moments(spec, lat, None, [lat.cell_centers()[32]], 50, 1)
        assert est.variance == 0.0

    def test_worker_count_invariance(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        pt = [lat.cell_centers()[32]]
        a = estimate_moments(spec, lat, None, pt, 60, 99, n_workers=1)
        b = estimate_moments(spec, lat, None, pt, 60, 99, n_workers=3)
        assert a.mean == b.mean and a.variance == b.variance

    def test_divergence_warning_for_not_mild(self):
        spec = EquationSpec(0.5, 1.0, 1.0, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        with pytest.warns(DivergenceWarning):
            estimate_moments(spec, lat, None, [lat.cell_centers()[32]], 10, 1)

    def test_point_must_be_cell_center(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        with pytest.raises(DomainError):
            estimate_moments(spec, lat, None, [0.0], 10, 1)  # centers are offset by dx/2

    def test_se_scaling_with_samples(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        lat = LatticeSpec(1, 1.0, 16, 8.0, 64)
        pt = [lat.cell_centers()[32]]
        a = estimate_moments(spec, lat, None, pt, 100, 5)
        b = estimate_moments(spec, lat, None, pt, 400, 5)
        # reported SE tracks n^(-1/2)
        ratio = a.std_error_of_variance / b.std_error_of_variance
        expected = (a.variance / b.variance) * math.sqrt(399.0 / 99.0)
        assert ratio == pytest.approx(expected, rel=1e-12)


class TestVarianceAgainstClosedForm:
    def test_refinement_monotone_toward_closed_form(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        cf = closed_form_j2_alpha1(spec, 1.0)
        vals = []
        for n in (64, 128, 256):
            lat = LatticeSpec(1, 1.0, n, 8.0, n)
            pt = [lat.cell_centers()[n // 2]]
            vals.append(lattice_point_variance(spec, lat, pt))
        assert vals[0] < vals[1] < vals[2] < cf
        assert abs(vals[2] - cf) < abs(vals[0] - cf)
        assert abs(vals[2] - cf) / cf < 0.10  # documented lattice-bias budget

    def test_monte_carlo_matches_lattice_variance(self):
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        lat = LatticeSpec(1, 1.0, 128, 8.0, 128)
        pt = [lat.cell_centers()[64]]
        est = estimate_moments(spec, lat, None, pt, 600, 2024)
        pred = lattice_point_variance(spec, lat, pt)
        assert abs(est.variance - pred) <= 5.0 * est.std_error_of_variance

    def test_variance_grows_with_horizon(self):
        # J2 ~ sqrt(t) for alpha = 1, d = 1
        spec = EquationSpec(1.0, 1.0, 1.0, 1)
        vals = []
        for t in (0.25, 0.5, 1.0):
            lat = LatticeSpec(1, t, 64, 8.0, 64)
            vals.append(lattice_point_variance(spec, lat, [lat.cell_centers()[32]]))
        assert vals[0] < vals[1] < vals[2]
        assert vals[2] / vals[0] == pytest.approx(2.0, rel=0.05)


class TestStabilityWarning:
    def test_underresolved_subdiffusive_kernel_warns(self):
        spec = EquationSpec(0.5, 1.0, 1.0, 1)
        lat = LatticeSpec(1, 1.0, 8, 16.0, 32)  # dx = 1.0 > width of last panel
        with pytest.warns(StabilityWarning):
            simulate_field(spec, lat, None, 1)
