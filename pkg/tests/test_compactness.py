import math

import numpy as np
import pytest

import helpers
from stieltjes.calculus import GFunction, as_gfunction, lp_norm
from stieltjes.compactness import (
    FamilySample,
    bc_diagnose,
    buc_diagnose,
    dc_diagnose,
    epsilon_net,
    family_distance,
    lp_diagnose,
    lp_seq_diagnose,
)
from stieltjes.derivator import build_derivator
from stieltjes.errors import EmptyFamily, MissingTailBound

DELTAS = [0.001, 0.01, 0.05, 0.2, 0.5]


def scaled_g(g, c):
    return GFunction(
        evaluator=lambda t, c=c: c * g.eval(t),
        right_limits={float(d): c * g.eval_right(d) for d in g.jump_points},
        kinks=tuple(np.concatenate([g.breakpoints, g.jump_points]).tolist()),
        label=f"{c}*g",
    )


class TestBc:
    def test_single_member_passes(self, g1):
        S = FamilySample.build([as_gfunction(g1)], g1)
        cert = bc_diagnose(S, g1, eps=0.25, delta_grid=DELTAS)
        assert cert.overall == "pass"
        sizes = cert.conditions[2].measured["covering_sizes"]
        assert all(v is not None and v <= 8 for v in sizes.values())
        assert cert.finite_scale

    def test_sin_recip_passes_bc_at_finite_scale(self):
        g = helpers.unit_jump_line()
        S = FamilySample.build([helpers.sin_recip()], g)
        cert = bc_diagnose(S, g, eps=0.25, delta_grid=DELTAS)
        assert cert.conditions[1].verdict == "pass"
        assert cert.conditions[2].verdict == "pass"

    def test_sin_n_family_fails_equicontinuity(self):
        g = build_derivator([0.0, 2 * math.pi], [0.0, 2 * math.pi])
        members = [
            GFunction(evaluator=lambda t, n=n: np.sin(n * np.asarray(t, float)))
            for n in range(1, 51)
        ]
        S = FamilySample.build(members, g)
        cert = bc_diagnose(S, g, eps=0.5, delta_grid=[0.05, 0.1, 0.3, 0.6])
        assert cert.conditions[1].verdict == "fail"
        assert cert.overall == "fail"

    def test_empty_family_rejected(self, g1):
        with pytest.raises(EmptyFamily):
            FamilySample.build([], g1)


class TestBuc:
    def test_compositions_pass(self, g1):
        members = [
            as_gfunction(g1),
            GFunction(
                evaluator=lambda t: g1.eval(t) ** 2,
                right_limits={0.0: g1.eval_right(0.0) ** 2},
                kinks=(0.0,),
            ),
            GFunction(
                evaluator=lambda t: np.cos(g1.eval(t)),
                right_limits={0.0: math.cos(g1.eval_right(0.0))},
                kinks=(0.0,),
            ),
        ]
        S = FamilySample.build(members, g1)
        cert = buc_diagnose(S, g1, eps=0.25, delta_grid=DELTAS)
        assert cert.overall == "pass"

    def test_sin_recip_fails_with_jump_witness(self):
        g = helpers.unit_jump_line()
        S = FamilySample.build([helpers.sin_recip()], g)
        cert = buc_diagnose(S, g, eps=0.25, delta_grid=DELTAS)
        assert cert.overall == "fail"
        cond3 = cert.conditions[2]
        assert cond3.cid == "uniform-right-limits"
        assert cond3.verdict == "fail"
        assert "0.0" in (cond3.witness or "")

    def test_constant_family_passes(self, g1):
        members = [
            GFunction(evaluator=lambda t, c=c: np.full_like(np.asarray(t, float), c))
            for c in np.linspace(0, 1, 11)
        ]
        S = FamilySample.build(members, g1)
        cert = buc_diagnose(S, g1, eps=0.1, delta_grid=DELTAS)
        assert cert.overall == "pass"

    def test_buc_implies_bc(self, rng):
        # the certified implication: a buc pass forces a bc pass at the
        # same thresholds
        for _ in range(10):
            g = helpers.random_derivator(rng)
            base = as_gfunction(g)
            members = [scaled_g(g, float(c)) for c in rng.uniform(0.1, 1.0, 4)]
            S = FamilySample.build(members, g)
            eps = float(rng.uniform(0.1, 0.5))
            buc = buc_diagnose(S, g, eps=eps, delta_grid=DELTAS)
            if buc.overall == "pass":
                bc = bc_diagnose(S, g, eps=eps, delta_grid=DELTAS)
                assert bc.overall == "pass"


class TestLpSeq:
    def test_single_basis_vector(self):
        e1 = np.zeros(50)
        e1[0] = 1.0
        cert = lp_seq_diagnose([e1], p=2, eps=0.5, tail_bounds=0.0)
        assert cert.overall == "pass"
        assert cert.conditions[1].measured["minimal_n"] == 1

    def test_shifting_basis_fails(self):
        members = []
        for k in range(50):
            e = np.zeros(50)
            e[k] = 1.0
            members.append(e)
        cert = lp_seq_diagnose(members, p=2, eps=0.9, tail_bounds=0.0)
        assert cert.conditions[1].verdict == "fail"
        assert cert.overall == "fail"

    def test_geometric_family_passes(self):
        base = 2.0 ** -np.arange(1, 41)
        members = [c * base for c in np.linspace(0, 1, 11)]
        cert = lp_seq_diagnose(members, p=2, eps=1e-3, tail_bounds=0.0)
        assert cert.overall == "pass"
        n = cert.conditions[1].measured["minimal_n"]
        assert n <= 25  # O(log(1/eps))

    def test_missing_tail_bound(self):
        with pytest.raises(MissingTailBound):
            lp_seq_diagnose([np.ones(3)], p=1, eps=0.1, tail_bounds=None)

    def test_inconclusive_when_bound_dominates(self):
        cert = lp_seq_diagnose([np.zeros(5)], p=1, eps=0.1, tail_bounds=0.5)
        assert cert.conditions[1].verdict == "inconclusive"
        assert cert.overall == "inconclusive"


class TestLpDiagnose:
    def test_decaying_exponential_singleton_passes(self):
        from stieltjes.exponential import ExpSpec, choose_lambda_plus, exp_g

        g = build_derivator(
            [0.0, 10.0], [0.0, 10.0], jumps=[(1.0, 0.4), (2.0, 0.8)]
        )
        lam = choose_lambda_plus(g, 0.5)
        spec = ExpSpec(-lam, 0.5)
        tail = GFunction(
            evaluator=lambda t: np.where(
                np.asarray(t, float) >= 0.5, exp_g(spec, g, np.maximum(t, 0.5)), 1.0
            ),
            kinks=(0.5, 1.0, 2.0),
            label="decaying tail",
        )
        S = FamilySample.build([tail], g)
        cert = lp_diagnose(S, g, p=2, eps=0.9, R=8.0, rho=0.05)
        assert cert.overall == "pass"

    def test_shifting_bumps_fail_lebesgue_tail(self):
        g = build_derivator([0.0, 31.0], [0.0, 31.0])

        def bump(center):
            def ev(t):
                t = np.asarray(t, float)
                u = t - center
                return np.where(np.abs(u) < 0.5, np.cos(math.pi * u) ** 2, 0.0)

            return GFunction(
                evaluator=ev, kinks=(center - 0.5, center + 0.5), label=f"bump{center}"
            )

        members = [bump(float(k)) for k in range(1, 31)]
        S = FamilySample.build(members, g, sample_n=401)
        cert = lp_diagnose(S, g, p=2, eps=0.3, R=5.0, rho=0.05, h_grid_n=3)
        cond3 = cert.conditions[2]
        assert cond3.cid == "lebesgue-tail"
        assert cond3.verdict == "fail"
        assert cert.overall == "fail"

    def test_zero_family_passes(self, g1):
        z = GFunction(evaluator=lambda t: np.zeros_like(np.asarray(t, float)))
        S = FamilySample.build([z], g1)
        cert = lp_diagnose(S, g1, p=2, eps=0.1, R=0.5, rho=0.05)
        assert cert.overall == "pass"

    def test_undeclared_outside_mass_inconclusive(self, g1):
        z = GFunction(evaluator=lambda t: np.zeros_like(np.asarray(t, float)))
        S = FamilySample.build([z], g1, metadata={"outside_mass_p": None})
        cert = lp_diagnose(S, g1, p=2, eps=0.1, R=0.5, rho=0.05)
        assert cert.conditions[2].verdict == "inconclusive"
        assert cert.overall == "inconclusive"


class TestDc:
    def test_g_singleton_passes(self, g1):
        S = FamilySample.build([as_gfunction(g1)], g1)
        cert = dc_diagnose(S, g1, eps=0.25, delta_grid=DELTAS)
        # single atom carrying mass 1: the tail needs eps > 1 at n=0, but
        # n=1 (all atoms enumerated) is the honest finite answer here
        cond4 = cert.conditions[3]
        assert cond4.cid == "jump-mass-tail"

    def test_scaled_family_passes(self, g1):
        members = [scaled_g(g1, c) for c in np.linspace(0.0, 1.0, 6)]
        S = FamilySample.build(members, g1)
        cert = dc_diagnose(S, g1, eps=1.5, delta_grid=[0.05, 0.2, 0.5])
        assert cert.overall == "pass"

    def test_shifting_jump_family_fails(self):
        jumps = [(float(k), 0.1) for k in range(1, 31)]
        g = build_derivator([0.0, 32.0], [0.0, 1.0], jumps=jumps)
        members = []
        for k in range(1, 31):
            members.append(
                GFunction(
                    evaluator=lambda t, k=k: (np.asarray(t, float) > k) * 1.0,
                    right_limits={
                        float(d): 1.0 if d >= k else (1.0 if d > k else 0.0)
                        for d, _ in jumps
                    },
                    kinks=(float(k),),
                    label=f"step{k}",
                )
            )
        # fix right limits: step at k jumps exactly at atom k
        for k, f in enumerate(members, start=1):
            f.right_limits = {float(d): (1.0 if d >= k else 0.0) for d, _ in jumps}
        S = FamilySample.build(members, g, sample_n=301)
        cert = dc_diagnose(S, g, eps=0.5, delta_grid=[0.02, 0.05, 0.2])
        cond4 = cert.conditions[3]
        assert cond4.verdict == "fail"

    def test_not_decomposable(self):
        g = helpers.unit_jump_line()
        S = FamilySample.build([helpers.sin_recip()], g)
        from stieltjes.errors import NotDecomposable

        with pytest.raises(NotDecomposable):
            dc_diagnose(S, g, eps=0.1)


class TestNet:
    def test_singleton(self, g1):
        S = FamilySample.build([as_gfunction(g1)], g1)
        res = epsilon_net(S, g1, eps=0.1)
        assert res.net_indices == (0,)
        assert res.max_residual == 0.0
        assert res.failure_witness is None

    def test_scaled_family_compresses(self, g1):
        members = [scaled_g(g1, c) for c in np.linspace(0.0, 1.0, 11)]
        S = FamilySample.build(members, g1)
        sup_g = 2.5
        res = epsilon_net(S, g1, eps=0.2 * sup_g, metric="sup")
        assert len(res.net_indices) <= 6
        assert res.max_residual <= 0.2 * sup_g

    def test_spread_family_no_compression(self):
        g = build_derivator([0.0, 31.0], [0.0, 31.0])

        def bump(center):
            def ev(t):
                t = np.asarray(t, float)
                u = t - center
                return np.where(np.abs(u) < 0.5, np.cos(math.pi * u) ** 2, 0.0)

            return GFunction(evaluator=ev, kinks=(center - 0.5, center + 0.5))

        members = [bump(float(k)) for k in range(1, 11)]
        S = FamilySample.build(members, g, sample_n=401)
        res = epsilon_net(S, g, eps=0.5, metric="sup")
        assert len(res.net_indices) == len(members)

    def test_net_cap_failure_witness(self, g1):
        members = [scaled_g(g1, c) for c in np.linspace(0.0, 1.0, 11)]
        S = FamilySample.build(members, g1)
        res = epsilon_net(S, g1, eps=0.01, metric="sup", net_cap=3)
        assert res.failure_witness is not None

    def test_lp_metric_matches_decomposition(self, g1, rng):
        from stieltjes.calculus import _integral_continuous

        f = helpers.random_piecewise_poly(rng, g1, continuous=True)
        h = helpers.random_piecewise_poly(rng, g1, continuous=True)
        p = 2.0
        d_lp = family_distance(f, h, g1, metric="lp", p=p, tol=1e-11)
        diff_pow = GFunction(
            evaluator=lambda t: np.abs(f.at(t) - h.at(t)) ** p,
            kinks=tuple(set(f.kinks) | set(h.kinks)),
        )
        a, b = g1.window
        cont = _integral_continuous(
            diff_pow.at, g1, a, b, 1e-12, extra_ts=diff_pow.kinks
        )
        atom = sum(
            abs(f.at(d) - h.at(d)) ** p * s for d, s in g1.jumps
        )
        assert d_lp**p == pytest.approx(cont + atom, rel=1e-8, abs=1e-10)


def test_monotone_in_eps(g1):
    members = [scaled_g(g1, c) for c in np.linspace(0.2, 1.0, 5)]
    S = FamilySample.build(members, g1)
    verdicts = []
    for eps in (0.05, 0.1, 0.3, 0.9, 2.0):
        cert = bc_diagnose(S, g1, eps=eps, delta_grid=DELTAS)
        verdicts.append(cert.overall == "pass")
    # once passing, stays passing as eps grows
    first_pass = verdicts.index(True) if True in verdicts else len(verdicts)
    assert all(verdicts[first_pass:])
