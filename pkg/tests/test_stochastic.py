"""Lattice field sampling, chaos normalization, and the solvers.

Module-level checks run on small lattices with weak coupling so that the
Monte Carlo noise stays manageable; the heavy strong-coupling scaling runs
live in the acceptance suite.
"""

from fractions import Fraction

import numpy as np
import pytest

from sinegordon.stochastic import (
    GAUSS, QUARTIC, TorusLattice, calibrate_width, chaos_mean,
    convergence_study, correlation_slopes, dipole_counterterm, DipoleConfig,
    renorm_constant, renorm_slope, sample_phi, sigma2, solve_pde,
    translation_correlation, wick_exponential, covariance_table,
)

LAT = TorusLattice(64, dt=2.0**-9)


class TestField:
    def test_min_width_is_nyquist(self):
        assert LAT.min_eps() == 2.0 / 64
        with pytest.raises(ValueError):
            LAT.mode_variances(1.0 / 64)

    def test_empirical_variance_matches_mode_sum(self):
        eps = 2.0**-4
        target = sigma2(LAT, eps)
        vals = []
        for s in range(48):
            phi = sample_phi(LAT, eps, seed=11, sample=s).real_space()
            vals.append(float(np.mean(phi**2)))
        vals = np.array(vals)
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(vals.mean() - target) <= 3 * se

    def test_log_covariance_shape(self):
        # two-point function ~ -(1/2pi) log|z| for eps << |z| << 1
        eps = 2.0**-4
        tab = covariance_table(LAT, eps)
        r1, r2 = 4, 8   # cells: |z| = 1/16 and 1/8
        diff = tab[0, r1] - tab[0, r2]
        expect = np.log(2.0) / (2 * np.pi)
        assert abs(diff - expect) < 0.2 * expect

    def test_seed_reproducibility_bitexact(self):
        a = sample_phi(LAT, 2.0**-4, seed=5, sample=3).real_space()
        b = sample_phi(LAT, 2.0**-4, seed=5, sample=3).real_space()
        assert a.tobytes() == b.tobytes()
        c = sample_phi(LAT, 2.0**-4, seed=6, sample=3).real_space()
        assert a.tobytes() != c.tobytes()

    def test_stationarity_of_the_update(self):
        fld = sample_phi(LAT, 2.0**-4, seed=9)
        before = float(np.mean(fld.real_space() ** 2))
        rng = np.random.default_rng(0)
        for _ in range(32):
            white = np.fft.fft2(rng.standard_normal((64, 64))) / 64
            fld.advance(white, LAT.dt)
        after = float(np.mean(fld.real_space() ** 2))
        assert abs(after - before) < 0.5 * before + 0.2


class TestRenormConstant:
    def test_exact_formula(self):
        c = renorm_constant(LAT, 2.0**-4, Fraction(2))
        assert np.isclose(c, np.exp(np.pi * sigma2(LAT, 2.0**-4)))

    def test_beta_zero_limit(self):
        assert renorm_constant(LAT, 2.0**-4, Fraction(1, 10**6)) == \
            pytest.approx(1.0, abs=1e-4)

    def test_monotone_in_width(self):
        cs = [renorm_constant(LAT, e, Fraction(5))
              for e in [2.0**-3, 2.0**-4, 2.0**-5]]
        assert cs[0] < cs[1] < cs[2]

    def test_slope_matches_coupling(self):
        lat = TorusLattice(256)
        for bsq in (Fraction(2), Fraction(5)):
            slope = renorm_slope(lat, [2.0**-k for k in range(3, 8)], bsq)
            assert abs(slope - (-float(bsq) / 4)) < 0.05 * float(bsq) / 4


class TestChaos:
    def test_modulus_and_conjugation(self):
        phi = sample_phi(LAT, 2.0**-4, seed=2).real_space()
        c = renorm_constant(LAT, 2.0**-4, Fraction(2))
        xp = wick_exponential(phi, Fraction(2), c, sign=+1)
        xm = wick_exponential(phi, Fraction(2), c, sign=-1)
        assert np.allclose(np.abs(xp), c)
        assert np.array_equal(xm, np.conj(xp))

    def test_unit_mean(self):
        stats = chaos_mean(LAT, 2.0**-4, Fraction(2), seed=21, n_fields=64)
        assert stats.within_3se

    def test_weak_coupling_reciprocity(self):
        lat = TorusLattice(128)
        rep = correlation_slopes(lat, 2.0**-6, Fraction(1), seed=3,
                                 n_fields=48)
        assert rep.opposite_slope < 0 < rep.same_slope
        assert abs(rep.opposite_slope + rep.same_slope) < 0.15
        assert abs(rep.product_slope) < 0.1

    def test_scale_separation_guard(self):
        with pytest.raises(ValueError):
            correlation_slopes(LAT, 2.0**-3, Fraction(1), seed=0,
                               shifts=[2, 4])

    def test_translation_correlation_definition(self):
        rng = np.random.default_rng(4)
        f = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        g = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        tab = translation_correlation(f, g)
        direct = np.mean(f * np.roll(np.roll(g, -2, axis=0), -3, axis=1))
        assert np.isclose(tab[2, 3], direct)


class TestDipolePieces:
    def test_counterterm_vanishes_at_origin(self):
        lat = TorusLattice(32, dt=2.0**-8)
        cfg = DipoleConfig(eps=2.0**-4, dt=2.0**-8, t_burn=0.02,
                           t_measure=0.06, n_counter=2,
                           lambdas=(2.0**-2,), stride=1)
        c = dipole_counterterm(lat, cfg, seed=1)
        assert c[0, 0] == 0
        assert c.shape == (32, 32)

    def test_coupling_window_enforced(self):
        lat = TorusLattice(32, dt=2.0**-8)
        from sinegordon.stochastic import dipole_moment
        for bad in (Fraction(3), Fraction(6)):
            cfg = DipoleConfig(beta_sq=bad, eps=2.0**-4, dt=2.0**-8)
            with pytest.raises(ValueError):
                dipole_moment(lat, cfg, seed=0)

    def test_lambda_floor_enforced(self):
        lat = TorusLattice(32, dt=2.0**-8)
        from sinegordon.stochastic import dipole_moment
        cfg = DipoleConfig(eps=2.0**-4, dt=2.0**-8, lambdas=(2.0**-5,))
        with pytest.raises(ValueError):
            dipole_moment(lat, cfg, seed=0)


class TestPDE:
    def test_beta_zero_is_heat_flow(self):
        lat = TorusLattice(32, dt=2.0**-8)
        x = np.arange(32) / 32
        v0 = np.cos(2 * np.pi * x)[:, None] * np.ones((1, 32))
        res = solve_pde(lat, 2.0**-4, Fraction(1, 10**12), seed=0,
                        t_end=0.05, v0=v0)
        t = res.times[-1]
        exact = v0 * np.exp(-0.5 * (2 * np.pi) ** 2 * t)
        assert np.max(np.abs(res.final - exact)) < 1e-6

    def test_trajectory_real_and_reproducible(self):
        lat = TorusLattice(32, dt=2.0**-8)
        r1 = solve_pde(lat, 2.0**-4, Fraction(2), seed=7, t_end=0.05)
        r2 = solve_pde(lat, 2.0**-4, Fraction(2), seed=7, t_end=0.05)
        assert r1.max_imag < 1e-12
        assert r1.final.tobytes() == r2.final.tobytes()

    def test_convergence_guard_rails(self):
        lat = TorusLattice(32, dt=2.0**-8)
        with pytest.raises(ValueError):
            convergence_study(lat, Fraction(2), [2.0**-3], [0])
        with pytest.raises(ValueError):
            convergence_study(lat, Fraction(2), [2.0**-3, 2.0**-3.5], [0])

    def test_quartic_width_calibration(self):
        lat = TorusLattice(64)
        eps = 2.0**-4
        w = calibrate_width(lat, eps, QUARTIC)
        assert np.isclose(sigma2(lat, w, QUARTIC), sigma2(lat, eps, GAUSS),
                          rtol=1e-10)
