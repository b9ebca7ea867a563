import numpy as np
import pytest

import helpers
from stieltjes.calculus import GFunction, as_gfunction
from stieltjes.errors import IllConditioned, NotRegulated, NotUniform
from stieltjes.gfunc import (
    factorize,
    g_modulus,
    is_regulated,
    right_limit_table,
    weierstrass_fit,
)

DELTAS = [0.01, 0.05, 0.1, 0.3, 0.5, 0.9]


def test_modulus_of_g_itself(g1):
    f = as_gfunction(g1)
    rep = g_modulus(f, g1, DELTAS, sample_n=101)
    assert np.all(rep.omega <= np.asarray(DELTAS) + 1e-12)
    assert np.all(np.diff(rep.omega) >= 0)


def test_modulus_constant_zero(g1):
    f = GFunction(evaluator=lambda t: np.full_like(np.asarray(t, float), 2.0))
    rep = g_modulus(f, g1, DELTAS, sample_n=101)
    assert np.max(rep.omega) == 0.0


def test_modulus_sees_invisible_oscillation():
    g = helpers.unit_jump_line()
    f = helpers.sin_recip()
    rep = g_modulus(f, g, [d for d in DELTAS if d < 1.0], sample_n=201)
    # pairs just right of the jump are at g-distance ~0 but oscillate fully
    assert np.all(rep.omega >= 1.9)


def test_family_modulus_is_member_sup(g1):
    half = GFunction(evaluator=lambda t: 0.5 * g1.eval(t), kinks=(0.0,))
    full = as_gfunction(g1)
    rep_half = g_modulus(half, g1, DELTAS, sample_n=81)
    rep_fam = g_modulus([half, full], g1, DELTAS, sample_n=81)
    rep_full = g_modulus(full, g1, DELTAS, sample_n=81)
    assert np.allclose(rep_fam.omega, np.maximum(rep_half.omega, rep_full.omega))


def test_right_limits_of_g(g1):
    f = GFunction(evaluator=g1.eval, kinks=(0.0,))
    table = right_limit_table(f, g1)
    assert table[0.0] == pytest.approx(1.0, abs=1e-9)
    ok, wit = is_regulated(f, g1)
    assert ok and wit == []


def test_sin_recip_not_regulated():
    g = helpers.unit_jump_line()
    f = helpers.sin_recip()
    table = right_limit_table(f, g)
    assert table[0.0] is None
    ok, wit = is_regulated(f, g)
    assert not ok and wit == [0.0]


def test_constant_regulated(g1):
    f = GFunction(evaluator=lambda t: np.full_like(np.asarray(t, float), 1.0))
    ok, _ = is_regulated(f, g1)
    assert ok


class TestFactorize:
    def test_square_of_g(self, g1):
        f = GFunction(
            evaluator=lambda t: g1.eval(t) ** 2,
            kinks=(0.0,),
            right_limits={0.0: g1.eval_right(0.0) ** 2},
        )
        res = factorize(f, g1, recon_tol=1e-9, sample_n=80001)
        # probe the attained g-range only; (0, 1) is the jump gap
        xs = np.concatenate([np.linspace(-1.0, 0.0, 25), np.linspace(1.0, 1.5, 25)])
        assert np.max(np.abs(res.tilde_f(xs) - xs**2)) <= 1e-8
        assert res.recon_error <= 1e-9
        # inside the gap the fill is the straight line from (0,0) to (1,1)
        mid = np.linspace(0.1, 0.9, 9)
        assert np.max(np.abs(res.tilde_f(mid) - mid)) <= 1e-9

    def test_identity_factor(self, g1):
        f = as_gfunction(g1)
        res = factorize(f, g1, recon_tol=1e-9, sample_n=2001)
        xs = np.linspace(-1.0, 2.4, 60)
        assert np.max(np.abs(res.tilde_f(xs) - xs)) <= 1e-9

    def test_gap_fill_is_linear(self, g1):
        f = as_gfunction(g1)
        res = factorize(f, g1, sample_n=2001)
        assert res.gap_list == ((0.0, 1.0),)
        inside = np.linspace(0.1, 0.9, 9)
        assert np.max(np.abs(res.tilde_f(inside) - inside)) <= 1e-9

    def test_rejects_sin_recip(self):
        g = helpers.unit_jump_line()
        with pytest.raises(NotRegulated):
            factorize(helpers.sin_recip(), g)

    def test_rejects_non_g_continuous(self, g1):
        # identity is not constant on the flat of g1, so it cannot factor
        f = GFunction(evaluator=lambda t: np.asarray(t, float) * 1.0)
        with pytest.raises(NotUniform):
            factorize(f, g1)


class TestWeierstrass:
    def test_exact_recovery(self, g1):
        f = GFunction(
            evaluator=lambda t: 3.0 * g1.eval(t) ** 2 - g1.eval(t) + 2.0,
            kinks=(0.0,),
        )
        fit = weierstrass_fit(f, g1, degree=2)
        assert np.allclose(fit.coefficients, [2.0, -1.0, 3.0], atol=1e-10)
        assert fit.sup_error <= 1e-10

    def test_constant_degree_zero(self, g1):
        f = GFunction(evaluator=lambda t: np.full_like(np.asarray(t, float), 7.5))
        fit = weierstrass_fit(f, g1, degree=0)
        assert fit.coefficients[0] == pytest.approx(7.5, abs=1e-12)
        assert fit.sup_error <= 1e-12

    def test_cos_of_g_degree12(self, g1):
        f = GFunction(evaluator=lambda t: np.cos(g1.eval(t)), kinks=(0.0,))
        fit = weierstrass_fit(f, g1, degree=12)
        assert fit.sup_error <= 1e-3

    def test_error_nonincreasing_in_degree(self, g1):
        f = GFunction(evaluator=lambda t: np.cos(g1.eval(t)), kinks=(0.0,))
        errs = [weierstrass_fit(f, g1, degree=d, sample_n=801).sup_error
                for d in range(13)]
        for lo, hi in zip(errs[1:], errs[:-1]):
            assert lo <= hi + 1e-12

    def test_cheb_interp_mode(self):
        # spectral convergence needs a gap-free g-range, so no jumps here
        from stieltjes.derivator import build_derivator

        g = build_derivator([-1.0, 2.0], [-1.0, 2.0])
        f = GFunction(evaluator=lambda t: np.cos(g.eval(t)))
        fit = weierstrass_fit(f, g, degree=10, method="cheb-interp")
        assert fit.sup_error <= 1e-3

    def test_ill_conditioned_on_flat_range(self):
        g = helpers.build_flat() if hasattr(helpers, "build_flat") else None
        from stieltjes.derivator import build_derivator

        g = build_derivator([0.0, 1.0], [0.0, 0.0], jumps=[(0.5, 1.0)])
        f = GFunction(evaluator=lambda t: np.asarray(t, float) * 0.0 + 1.0)
        with pytest.raises(IllConditioned):
            weierstrass_fit(f, g, degree=5)
