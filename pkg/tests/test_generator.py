import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from builders import TABLE_H, degenerate_table
from lpqsample.generator import (
    Generator,
    StabilityViolation,
    analysis,
    autocorrelation,
    biorthogonality_residual,
    bracket_range,
    bspline,
    circular_convolve,
    cross_correlation,
    dual_coeffs,
    dual_eval,
    fit_decay,
    make_dual,
    semi_discrete_conv,
)
from lpqsample.grid import CoeffArray, Domain, DomainError, GridFunction, boole_weights, quadrature, simpson_weights
from lpqsample.norms import Exponents, amalgam_norm, lpq_seq_norm
from oracles import bspline_autocorr_exact, circulant_solve, cox_de_boor, lattice_sum

D8 = Domain(1, 8, 1 / 8)
LINE16 = Domain(0, 16, 1 / 16)

# Frozen from oracles.simpson_1d (10^4 points) and oracles.circulant_solve (dense LU, L=16).
HAT_A0, HAT_A1 = 2 / 3, 1 / 6
HAT_DUAL = [1.7320508100147274, -0.46410162002945504, 0.12435567010309276, -0.033321060382916046]


class TestBSpline:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_matches_cox_de_boor(self, m):
        t = np.random.default_rng(m).uniform(-1, m + 2, 2000)
        assert np.allclose(bspline(t, m), cox_de_boor(t, m), atol=1e-14, rtol=0)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_continuous_across_knots(self, m):
        for j in range(m + 2):
            left, right = bspline(np.array([j - 1e-13, j]), m)
            assert abs(left - right) < 1e-12

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_zero_outside_support(self, m):
        assert np.all(bspline(np.array([-5, -1e-15, m + 1, m + 1.5, 100]), m) == 0)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_partition_of_unity_oracle(self, m):
        rng = np.random.default_rng(10 + m)
        for t in rng.uniform(-10, 10, 100):
            assert abs(lattice_sum(t, m) - 1) < 1e-14
            ks = np.arange(math.floor(t) - m - 2, math.floor(t) + 3)
            assert abs(bspline(t - ks, m).sum() - 1) < 1e-14

    def test_bad_degree(self):
        with pytest.raises(ValueError):
            Generator.bspline(4)


class TestGenerator:
    def test_tensor_evaluation(self):
        phi = Generator.bspline(2, 2)
        x, y, z = 0.7, 1.4, 2.9
        assert phi(x, y, z) == pytest.approx(float(cox_de_boor([x], 2)[0] * cox_de_boor([y], 2)[0] * cox_de_boor([z], 2)[0]))
        with pytest.raises(DomainError):
            phi(x, y)

    def test_tabulated_interpolates_and_vanishes_outside(self):
        table = degenerate_table(2)
        phi = Generator.tabulated(table, TABLE_H)
        assert phi.box == 3.0 and phi.support_radius == 1.5
        i, j = 5, 11
        assert phi(i * TABLE_H, j * TABLE_H) == pytest.approx(table[i, j], abs=1e-15)
        assert phi(-0.1, 1.0) == 0 and phi(1.0, 3.0) == 0

    def test_from_file_round_trip(self, tmp_path):
        table = degenerate_table(2)
        GridFunction(Domain(1, 3, TABLE_H), table).save(tmp_path / "g.bin")
        phi = Generator.from_spec({"kind": "tabulated", "file": str(tmp_path / "g.bin")}, 1)
        assert np.array_equal(phi.table, table)
        with pytest.raises(DomainError):
            Generator.from_spec({"kind": "tabulated", "file": str(tmp_path / "g.bin")}, 2)
        with pytest.raises(ValueError):
            Generator.from_spec({"kind": "wavelet"}, 1)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_lipschitz_bound_holds(self, m):
        phi = Generator.bspline(m, 1)
        fine = Domain(1, 8, 1 / 64)
        v = phi.tabulate(fine).values
        slope = max(np.abs(np.diff(v, axis=a)).max() for a in (0, 1)) / fine.h
        assert slope <= phi.lipschitz_bound()

    def test_amalgam_norm_finite_and_hat_value(self):
        assert Generator.bspline(1, 1).amalgam_norm(Exponents(1, 1), 1 / 16) == pytest.approx(4.0)
        assert 0 < Generator.bspline(3, 1).amalgam_norm(Exponents(1, 1), 1 / 16) < math.inf


class TestSemiDiscreteConv:
    def test_sifting(self):
        phi = Generator.bspline(1, 1)
        f = semi_discrete_conv(CoeffArray.delta(D8, (3, 3)), phi)
        x = D8.axis()
        expect = np.multiply.outer(cox_de_boor(x - 3, 1), cox_de_boor(x - 3, 1))
        assert np.array_equal(f.values, expect)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_constant_coefficients(self, m):
        f = semi_discrete_conv(CoeffArray(D8, np.ones(D8.lattice_shape)), Generator.bspline(m, 1))
        assert np.allclose(f.values, 1.0, atol=1e-14)

    def test_zero(self):
        assert np.all(semi_discrete_conv(CoeffArray.zeros(D8), Generator.bspline(3, 1)).values == 0)

    def test_brute_force_periodic_sum(self):
        dom = Domain(1, 8, 1 / 4)
        c = CoeffArray.random(dom, np.random.default_rng(4))
        x = dom.axis()
        brute = np.zeros(dom.shape)
        for k1, k2 in itertools.product(range(8), repeat=2):
            for w1, w2 in itertools.product((-8, 0, 8), repeat=2):
                brute += c.values[k1, k2] * np.multiply.outer(cox_de_boor(x - k1 - w1, 2), cox_de_boor(x - k2 - w2, 2))
        got = semi_discrete_conv(c, Generator.bspline(2, 1)).values
        assert np.allclose(got, brute, atol=1e-13)

    def test_support_exceeds_torus(self):
        with pytest.raises(DomainError):
            semi_discrete_conv(CoeffArray.zeros(Domain(1, 5, 1 / 8)), Generator.bspline(3, 1))

    @given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
    def test_linear(self, seed, a, b):
        rng = np.random.default_rng(seed)
        phi = Generator.bspline(3, 1)
        c1, c2 = CoeffArray.random(D8, rng), CoeffArray.random(D8, rng)
        lhs = semi_discrete_conv(a * c1 + b * c2, phi).values
        rhs = a * semi_discrete_conv(c1, phi).values + b * semi_discrete_conv(c2, phi).values
        assert np.allclose(lhs, rhs, atol=1e-12, rtol=0)

    @given(st.integers(0, 2**32 - 1), st.integers(-10, 10), st.integers(-10, 10))
    def test_shift_covariance(self, seed, a1, a2):
        c = CoeffArray.random(D8, np.random.default_rng(seed))
        phi = Generator.bspline(2, 1)
        m = D8.nodes_per_unit
        lhs = semi_discrete_conv(c.shifted((a1, a2)), phi).values
        rhs = np.roll(semi_discrete_conv(c, phi).values, (a1 * m, a2 * m), axis=(0, 1))
        assert np.array_equal(lhs, rhs)

    def test_analysis_is_adjoint(self):
        rng = np.random.default_rng(9)
        phi = Generator.bspline(3, 1)
        c = CoeffArray.random(D8, rng)
        f = GridFunction(D8, rng.normal(size=D8.shape))
        w = simpson_weights(D8)
        lhs = np.sum(w * f.values * semi_discrete_conv(c, phi).values)
        rhs = np.sum(c.values * analysis(f, phi, w).values)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestAutocorrelation:
    def test_hat_oracle(self):
        a = autocorrelation(Generator.bspline(1, 0), 1 / 16)
        assert a.at((0,)) == pytest.approx(HAT_A0, abs=1e-14)
        assert a.at((1,)) == pytest.approx(HAT_A1, abs=1e-14)
        assert a.at((-1,)) == pytest.approx(HAT_A1, abs=1e-14)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_closed_form_and_disjoint_support(self, m):
        a = autocorrelation(Generator.bspline(m, 0), 1 / 16)
        for alpha in range(-m - 3, m + 4):
            expect = bspline_autocorr_exact(m, alpha) if abs(alpha) <= m else 0.0
            assert a.at((alpha,)) == pytest.approx(expect, abs=1e-10)
            if abs(alpha) >= m + 1:
                assert a.at((alpha,)) == 0.0

    @pytest.mark.parametrize("m", [1, 3])
    def test_tensor_factorization(self, m):
        one = autocorrelation(Generator.bspline(m, 0), 1 / 8)
        two = autocorrelation(Generator.bspline(m, 1), 1 / 8)
        generic = autocorrelation(Generator.bspline(m, 1), 1 / 8, tensor=False)
        for a1, a2 in itertools.product(range(-m - 1, m + 2), repeat=2):
            assert two.at((a1, a2)) == pytest.approx(one.at((a1,)) * one.at((a2,)), abs=1e-10)
            assert generic.at((a1, a2)) == pytest.approx(two.at((a1, a2)), abs=1e-10)

    def test_simpson_rule_exact_for_hat_only(self):
        hat = autocorrelation(Generator.bspline(1, 0), 1 / 16, rule="simpson")
        assert hat.at((1,)) == pytest.approx(HAT_A1, abs=1e-15)
        cubic = autocorrelation(Generator.bspline(3, 0), 1 / 16, rule="simpson")
        assert 1e-10 < abs(cubic.at((0,)) - bspline_autocorr_exact(3, 0)) < 1e-8

    def test_boole_weights_exact_to_degree_five(self):
        dom = Domain(0, 8, 1 / 8)
        t = dom.axis()
        w = boole_weights(dom)
        # periodic continuous integrands vanishing at the wrap point; exact integrals by the beta function
        assert np.sum(w * t**2 * (8 - t) ** 2) == pytest.approx(8**5 / 30, rel=1e-13)
        assert np.sum(w * t**3 * (8 - t) ** 2) == pytest.approx(8**6 / 60, rel=1e-13)
        assert np.sum(w) == pytest.approx(8.0, rel=1e-15)

    def test_symmetric(self):
        a = autocorrelation(Generator.bspline(3, 1), 1 / 16)
        assert np.allclose(a.values, a.values[::-1, ::-1], atol=1e-12)

    def test_cross_correlation_swaps(self):
        p1, p3 = Generator.bspline(1, 0), Generator.bspline(3, 0)
        a13 = cross_correlation(p1, p3, 1 / 16)
        a31 = cross_correlation(p3, p1, 1 / 16)
        for alpha in range(-4, 5):
            assert a13.at((alpha,)) == pytest.approx(a31.at((-alpha,)), abs=1e-13)


class TestBracket:
    def test_hat_closed_form(self):
        lo, hi = bracket_range(autocorrelation(Generator.bspline(1, 0), 1 / 16), 64)
        assert lo == pytest.approx(1 / 3, abs=1e-8)
        assert hi == pytest.approx(1.0, abs=1e-8)
        xi = 2 * np.pi * np.arange(64) / 64
        sym = autocorrelation(Generator.bspline(1, 0), 1 / 16).symbol(64)
        assert np.allclose(sym.real, 2 / 3 + np.cos(xi) / 3, atol=1e-14)

    @pytest.mark.parametrize("m,d", [(1, 1), (3, 1), (3, 2)])
    def test_tensor_power(self, m, d):
        lo1, hi1 = bracket_range(autocorrelation(Generator.bspline(m, 0), 1 / 8), 64)
        lo, hi = bracket_range(autocorrelation(Generator.bspline(m, d), 1 / 8), 64)
        assert lo == pytest.approx(lo1 ** (1 + d), rel=1e-10)
        assert hi == pytest.approx(hi1 ** (1 + d), rel=1e-10)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_xi_zero_is_squared_integral(self, m):
        phi = Generator.bspline(m, 1)
        a = autocorrelation(phi, 1 / 16)
        integral = quadrature(phi.tabulate(Domain(1, 8, 1 / 16)))
        assert a.symbol(64)[0, 0].real == pytest.approx(integral**2, abs=1e-8)

    @pytest.mark.parametrize("s", [0.5, 2.0, 3.7])
    def test_scaling(self, s):
        phi = Generator.bspline(3, 1)
        lo, _ = bracket_range(autocorrelation(phi, 1 / 16))
        lo_s, _ = bracket_range(autocorrelation(phi.scaled(s), 1 / 16))
        assert lo_s == pytest.approx(s * s * lo, rel=1e-13)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_degenerate_generator_rejected(self, sign):
        phi = Generator.tabulated(degenerate_table(2, sign), TABLE_H)
        with pytest.raises(StabilityViolation):
            bracket_range(autocorrelation(phi, 1 / 16))
        with pytest.raises(StabilityViolation):
            make_dual(phi, Domain(1, 16, 1 / 16))

    def test_asymmetric_correlation_detected(self):
        from lpqsample.generator import Correlation

        with pytest.raises(ValueError, match="imaginary"):
            bracket_range(Correlation(np.array([0.0, 1.0, 0.5])))


class TestDual:
    def test_self_dual_delta(self):
        a = np.zeros((16, 16))
        a[0, 0] = 1
        assert np.allclose(dual_coeffs(a), a, atol=1e-15)

    def test_hat_matches_circulant_oracle(self):
        dual = make_dual(Generator.bspline(1, 0), LINE16)
        d = dual.dual_coeffs.values
        assert np.allclose(d[:4], HAT_DUAL, atol=1e-12)
        col = np.zeros(16)
        col[0], col[1], col[-1] = HAT_A0, HAT_A1, HAT_A1
        assert np.allclose(d, circulant_solve(col), atol=1e-12)
        a = dual.autocorr.periodized(16)
        # (1/6) d(k-1) + (2/3) d(k) + (1/6) d(k+1) = delta
        delta = np.zeros(16)
        delta[0] = 1
        assert np.allclose(circular_convolve(a, d), delta, atol=1e-14)
        assert dual.residual <= dual.trunc_tol

    def test_hat_decay_rate(self):
        d = make_dual(Generator.bspline(1, 0), LINE16).dual_coeffs.values
        C, r = fit_decay(d)
        assert r == pytest.approx(2 - math.sqrt(3), abs=1e-6)
        k = np.arange(4)
        assert np.all(np.abs(d[k]) <= 1.01 * C * r**k)

    @pytest.mark.parametrize("m", [1, 3])
    def test_biorthogonality(self, m, dom):
        phi = Generator.bspline(m, 1)
        dual = make_dual(phi, dom)
        assert biorthogonality_residual(dual, phi, dom) <= 10 * dual.trunc_tol

    def test_hat_biorthogonality_direct_quadrature(self, dom):
        phi = Generator.bspline(1, 1)
        dual = make_dual(phi, dom)
        fine = dom.refined(4)
        g = dual_eval(dual, phi, fine).values
        w = simpson_weights(fine)
        base = phi.tabulate(fine).values
        m = fine.nodes_per_unit
        assert np.sum(w * base * g) == pytest.approx(1.0, abs=1e-8)
        assert np.sum(w * np.roll(base, m, axis=0) * g) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("m", [1, 3])
    def test_dual_amalgam_bound(self, m, dom):
        phi = Generator.bspline(m, 1)
        dual = make_dual(phi, dom)
        one = Exponents(1, 1)
        fine = dom.refined(4)
        g_norm = amalgam_norm(dual_eval(dual, phi, fine), one)
        bound = lpq_seq_norm(dual.dual_coeffs, one) * phi.amalgam_norm(one, dom.h) * 2**dom.ndim
        assert math.isfinite(g_norm) and g_norm <= bound

    def test_bracket_consistency_guard(self):
        a = np.zeros(16)
        a[0], a[1], a[-1] = 0.5, 0.25, 0.25  # symbol 0.5 + 0.5 cos xi vanishes at pi
        with pytest.raises(StabilityViolation):
            dual_coeffs(a)
        a[0] = 0.6
        with pytest.raises(StabilityViolation):
            dual_coeffs(a, bracket_min=1.0)
