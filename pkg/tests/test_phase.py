"""Transition curves: closed forms, the implicit first-order solve, and
region classification."""

import math

import numpy as np
import pytest

from bclab import (BETA_C, ModelParams, PhaseRegion, classify,
                   critical_constants, cumulant_deriv, first_order_k,
                   free_energy, second_order_k, second_order_k_deriv,
                   thermo_magnetization)


def high_order_fd(fn, x, order, h):
    """Central finite difference of the given order (stencil width order+2)."""
    if order == 1:
        return (fn(x + h) - fn(x - h)) / (2 * h)
    if order == 2:
        return (fn(x + h) - 2 * fn(x) + fn(x - h)) / h**2
    if order == 3:
        return (fn(x + 2 * h) - 2 * fn(x + h) + 2 * fn(x - h) - fn(x - 2 * h)) / (2 * h**3)
    if order == 4:
        return (fn(x + 2 * h) - 4 * fn(x + h) + 6 * fn(x) - 4 * fn(x - h)
                + fn(x - 2 * h)) / h**4
    raise ValueError(order)


class TestSecondOrderCurve:
    def test_tricritical_value(self):
        assert second_order_k(BETA_C) == pytest.approx(3 / (2 * math.log(4)), abs=1e-12)

    def test_value_at_one(self):
        assert second_order_k(1.0) == pytest.approx((math.e + 2) / 4, abs=1e-15)

    def test_two_closed_forms_agree(self):
        # (e^beta + 2)/(4 beta) versus 1/(2 beta c''(0))
        for beta in np.linspace(0.2, 3.0, 29):
            alt = 1.0 / (2 * beta * cumulant_deriv(beta, 0.0, 2))
            assert second_order_k(beta) == pytest.approx(alt, abs=1e-12)

    def test_positive_and_rejects_bad_beta(self):
        assert all(second_order_k(b) > 0 for b in np.linspace(0.05, 5.0, 100))
        with pytest.raises(ValueError):
            second_order_k(0.0)
        with pytest.raises(ValueError):
            second_order_k(-1.0)


class TestSecondOrderCurveDeriv:
    def test_first_deriv_at_one_is_exactly_minus_half(self):
        # (beta e^beta - e^beta - 2)/(4 beta^2) at beta = 1
        assert abs(second_order_k_deriv(1.0, 1) + 0.5) < 1e-12

    def test_first_deriv_at_tricritical(self):
        expected = (4 * math.log(4) - 6) / (4 * math.log(4) ** 2)
        assert second_order_k_deriv(BETA_C, 1) == pytest.approx(expected, abs=1e-14)

    def test_second_deriv_at_tricritical(self):
        b = BETA_C
        expected = (b * b * 4 - 2 * b * 4 + 2 * 4 + 4) / (4 * b**3)
        assert second_order_k_deriv(b, 2) == pytest.approx(expected, abs=1e-13)
        fd = high_order_fd(second_order_k, b, 2, 1e-4)
        assert second_order_k_deriv(b, 2) == pytest.approx(fd, abs=1e-5)

    def test_matches_finite_differences_orders_1_to_4(self):
        # nested differentiation: orders 3 and 4 difference the closed-form
        # order-2 curve, which keeps the conditioning under control at the
        # small-beta end where the derivatives blow up like j!/beta^(j+1)
        for beta in np.linspace(0.5, 2.5, 9):
            for order in (1, 2):
                fd = high_order_fd(second_order_k, beta, order, 1e-4)
                assert second_order_k_deriv(beta, order) == pytest.approx(fd, rel=1e-5)
            for order in (3, 4):
                fd = high_order_fd(lambda b: second_order_k_deriv(b, 2),
                                   beta, order - 2, 1e-4)
                assert second_order_k_deriv(beta, order) == pytest.approx(fd, rel=1e-5)

    def test_order_cap(self):
        second_order_k_deriv(1.0, 12)
        with pytest.raises(ValueError):
            second_order_k_deriv(1.0, 13)
        with pytest.raises(ValueError):
            second_order_k_deriv(1.0, 0)


class TestFirstOrderCurve:
    def test_below_spinodal(self):
        for beta in np.linspace(BETA_C + 0.02, 3.0, 20):
            assert first_order_k(beta) < second_order_k(beta)

    def test_limit_at_tricritical(self):
        gaps = [abs(first_order_k(BETA_C + 10.0**-j) - second_order_k(BETA_C))
                for j in range(2, 7)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-3

    def test_defining_property(self):
        # at K1 the positive wells touch zero; a dense scan is the oracle
        # (400001 points keep the grid-offset error G'' dx^2/2 below 1e-10)
        for beta in (1.5, 2.0, 2.5, 3.0, BETA_C + 1e-2):
            k1 = first_order_k(beta)
            params = ModelParams(beta, k1)
            xs = np.linspace(1e-4, 1.0, 400001)
            gs = np.asarray(free_energy(params, xs))
            assert abs(gs.min()) < 1e-10
            assert xs[gs.argmin()] > 1e-3

    def test_memoized(self):
        assert first_order_k(1.7) == first_order_k(1.7)

    def test_concurrent_callers_agree(self):
        # the memo table races benignly: every writer computes the same value
        from concurrent.futures import ThreadPoolExecutor
        betas = [1.55, 1.9, 2.3, 2.7] * 4
        with ThreadPoolExecutor(max_workers=8) as pool:
            values = list(pool.map(first_order_k, betas))
        for beta, value in zip(betas, values):
            assert value == first_order_k(beta)

    def test_rejects_subcritical_beta(self):
        with pytest.raises(ValueError):
            first_order_k(BETA_C)
        with pytest.raises(ValueError):
            first_order_k(1.0)


class TestClassify:
    def test_examples(self):
        assert classify(ModelParams(1.0, 1.0)) is PhaseRegion.SINGLE_PHASE
        assert classify(ModelParams(1.0, 1.5)) is PhaseRegion.COEXISTENCE
        assert classify(ModelParams(BETA_C, 3 / (2 * math.log(4)))) \
            is PhaseRegion.TRICRITICAL_POINT

    def test_curve_membership(self):
        assert classify(ModelParams(1.0, second_order_k(1.0))) \
            is PhaseRegion.SECOND_ORDER_CURVE
        assert classify(ModelParams(2.0, first_order_k(2.0))) \
            is PhaseRegion.FIRST_ORDER_CURVE
        assert classify(ModelParams(2.0, first_order_k(2.0) - 1e-6)) \
            is PhaseRegion.SINGLE_PHASE

    def test_consistent_with_magnetization(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            beta = rng.uniform(0.5, 2.8)
            kappa = rng.uniform(0.5, 2.0)
            region = classify(ModelParams(beta, kappa))
            m = thermo_magnetization(ModelParams(beta, kappa))
            if region is PhaseRegion.COEXISTENCE:
                assert m > 1e-8
            elif region is PhaseRegion.SINGLE_PHASE:
                assert m < 1e-8


class TestCriticalConstants:
    def test_location(self):
        cc = critical_constants()
        assert cc.beta_c == math.log(4)
        assert cc.k_at_beta_c == second_order_k(BETA_C)

    def test_conjectured_curvature_ordering(self):
        cc = critical_constants()
        assert cc.ell_c < 0 < second_order_k_deriv(BETA_C, 2)
        assert cc.ell_c == pytest.approx(-0.0949786, abs=1e-6)
