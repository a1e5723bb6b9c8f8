"""Solver tests: frozen derived sample sizes, minimality, effect solving,
and unreachable-goal handling."""

import math

import numpy as np
import pytest

from powerkit.designs import InvalidDesignError, build_spec
from powerkit.power import min_n, power_of
from powerkit.solve import min_base
from powerkit.solve import (
    SolveRequest,
    UnreachablePowerError,
    solve,
    solve_effect,
    solve_n,
    solve_power,
)


def spec(test, params, **kw):
    return build_spec(test, params, **kw)


class TestSolveN:
    def test_two_sample_t_methods_pair(self):
        r = solve_n(spec("two_sample_t", dict(delta=1.5, sd=0.5)), 0.8)
        assert r.n_per_arm == (4, 4)
        assert r.n_total == 8
        assert r.achieved_power >= 0.8

    def test_one_proportion_closed_form_value(self):
        # ceil of (z_.975 sqrt(p0 q0) + z_.8 sqrt(p1 q1))^2 / (p1-p0)^2 = 194
        r = solve_n(spec("one_proportion_z", dict(p0=0.5, p1=0.6)), 0.8)
        assert r.n_per_arm == (194,)

    def test_two_proportions_pooled_value(self):
        r = solve_n(spec("two_proportions_z", dict(p0=0.18, p1=0.14)), 0.8)
        assert r.n_per_arm == (1318, 1318)

    def test_correlation_fisher_value(self):
        # ceil(((z_a + z_b)/atanh(r))^2 + 3)
        r = solve_n(spec("correlation", dict(r=0.5)), 0.8)
        assert r.n_per_arm == (30,)

    def test_log_rank_event_and_subject_values(self):
        r = solve_n(spec("log_rank", dict(hr=2.0, pE=0.5, pC=0.7)), 0.9)
        assert r.events_required == 95
        assert r.n_per_arm == (79, 79)
        assert r.achieved_power >= 0.9

    def test_log_rank_no_censoring_halves(self):
        r = solve_n(spec("log_rank", dict(hr=2.0, pE=1.0, pC=1.0)), 0.9)
        assert r.n_per_arm == (48, 48)  # ceil(94.567 / 2)

    def test_log_rank_unequal_allocation_matches_weighted_form(self):
        from powerkit.power import required_events
        from powerkit.distributions import normal_quantile
        k = 2.0
        r = solve_n(spec("log_rank", dict(hr=2.0, pE=0.5, pC=0.7, ratio_k=k)), 0.9)
        za, zb = normal_quantile(0.975), normal_quantile(0.9)
        m = ((k * 2 + 1) / (2 - 1)) ** 2 * (za + zb) ** 2 / k
        assert required_events(2.0, k, 0.05, 0.9) == pytest.approx(m, rel=1e-12)
        denom = k * 0.5 + 0.7
        assert r.n_per_arm == (math.ceil(k * m / denom), math.ceil(m / denom))

    def test_cox_value(self):
        r = solve_n(spec("cox_ph", dict(hr=2.0, exposure_prev=0.5, psi=1.0)), 0.8)
        assert r.n_per_arm == (66,)
        assert r.events_required == 66

    def test_cox_continuous_covariate(self):
        # V = sigma^2: N = ceil((z_a + z_b)^2 / ((ln hr)^2 sigma^2 psi))
        from powerkit.distributions import normal_quantile
        r = solve_n(spec("cox_ph", dict(hr=1.5, sigma=2.0, psi=0.9)), 0.8)
        zsum2 = (normal_quantile(0.975) + normal_quantile(0.8)) ** 2
        expected = math.ceil(zsum2 / (math.log(1.5) ** 2 * 4.0 * 0.9))
        assert r.n_per_arm == (expected,)
        # doubling sigma quarters the requirement (before ceiling)
        r2 = solve_n(spec("cox_ph", dict(hr=1.5, sigma=1.0, psi=0.9)), 0.8)
        assert r2.n_per_arm[0] == pytest.approx(4 * r.n_per_arm[0], abs=4)

    def test_mann_whitney_deflation(self):
        t = solve_n(spec("two_sample_t", dict(delta=0.5, sd=1.0)), 0.8)
        assert t.n_per_arm == (64, 64)
        mw = solve_n(spec("mann_whitney", dict(delta=0.5, sd=1.0)), 0.8)
        assert mw.n_per_arm == (math.ceil(64 / 0.864),) * 2

    def test_goal_must_exceed_alpha(self):
        with pytest.raises(InvalidDesignError):
            solve_n(spec("two_sample_t", dict(delta=0.5, sd=1.0)), 0.04)

    def test_degenerate_effect_unreachable(self):
        with pytest.raises(UnreachablePowerError):
            solve_n(spec("two_sample_t", dict(delta=1e-7, sd=1.0)), 0.8)

    def test_structural_minimum_respected(self):
        r = solve_n(spec("two_sample_t", dict(delta=50.0, sd=1.0)), 0.8)
        assert r.n_per_arm[0] >= min_n("two_sample_t")


class TestMinimality:
    # randomized minimality: power(n) >= goal and power(n-1) < goal
    CASES = [
        ("one_sample_t", lambda r: dict(delta=r.uniform(0.15, 1.5), sd=1.0)),
        ("two_sample_t", lambda r: dict(delta=r.uniform(0.15, 1.5), sd=1.0,
                                        ratio=r.choice([0.5, 1.0, 1.5, 2.0]))),
        ("paired_t", lambda r: dict(delta=r.uniform(0.15, 1.5), sd=1.0)),
        ("one_way_anova", lambda r: dict(k=int(r.integers(2, 6)),
                                         f=r.uniform(0.1, 0.6))),
        ("one_proportion_z", lambda r: dict(p0=r.uniform(0.15, 0.6),
                                            p1=r.uniform(0.62, 0.9))),
        ("two_proportions_z", lambda r: dict(p0=r.uniform(0.1, 0.4),
                                             p1=r.uniform(0.45, 0.8),
                                             ratio=r.choice([0.5, 1.0, 2.0]))),
        ("chi_square", lambda r: dict(w=r.uniform(0.12, 0.6), df=int(r.integers(1, 8)))),
        ("correlation", lambda r: dict(r=r.uniform(0.12, 0.75))),
        ("log_rank", lambda r: dict(hr=r.uniform(1.25, 3.0), pE=r.uniform(0.3, 1.0),
                                    pC=r.uniform(0.3, 1.0))),
        ("cox_ph", lambda r: dict(hr=r.uniform(1.25, 3.0),
                                  exposure_prev=r.uniform(0.2, 0.8),
                                  psi=r.uniform(0.3, 1.0))),
    ]

    @pytest.mark.parametrize("test,gen", CASES, ids=[c[0] for c in CASES])
    def test_minimality_randomized(self, test, gen):
        rng = np.random.default_rng(abs(hash("min" + test)) % 2 ** 31)
        for _ in range(100):
            s = spec(test, gen(rng))
            goal = float(rng.uniform(0.55, 0.95))
            try:
                result = solve_n(s, goal)
            except UnreachablePowerError:
                continue
            base = result.n_per_arm[1] if test == "log_rank" else result.n_per_arm[0]
            assert power_of(s, tuple(result.n_per_arm)) >= goal
            if base > min_base(s):
                assert power_of(s, base - 1) < goal, (s, goal, result)


class TestSolveEffect:
    def test_round_trip_power(self):
        s = spec("two_sample_t", dict(delta=1.5, sd=0.5))
        r = solve_effect(s, 4, 0.8)
        assert r.effect_solved <= 3.0  # consistent with the delta=1.5/sd=0.5 pair
        assert r.achieved_power == pytest.approx(0.8, abs=1e-6)

    def test_effect_shrinks_with_larger_n(self):
        s = spec("two_sample_t", dict(delta=1.0, sd=1.0))
        small = solve_effect(s, 10, 0.8).effect_solved
        large = solve_effect(s, 100, 0.8).effect_solved
        assert large < small

    def test_round_trip_across_tests(self):
        cases = [
            ("one_way_anova", dict(k=3, f=0.3), 30),
            ("one_proportion_z", dict(p0=0.4, p1=0.5), 150),
            ("correlation", dict(r=0.4), 50),
            ("chi_square", dict(w=0.3, df=2), 200),
            ("log_rank", dict(hr=1.8, pE=0.6, pC=0.7), 120),
            ("cox_ph", dict(hr=1.8, exposure_prev=0.5, psi=0.9), 200),
        ]
        for test, params, n in cases:
            s = spec(test, params)
            r = solve_effect(s, n, 0.8)
            assert r.achieved_power == pytest.approx(0.8, abs=1e-6), test

    def test_unreachable_effect_bound(self):
        s = spec("one_proportion_z", dict(p0=0.95, p1=0.96))
        with pytest.raises(UnreachablePowerError):
            solve_effect(s, 5, 0.95)


class TestSolveDispatch:
    def test_request_round_trip(self):
        s = spec("two_sample_t", dict(delta=1.5, sd=0.5))
        r1 = solve(SolveRequest(s, "sample_size", power_goal=0.8))
        assert r1.n_per_arm == (4, 4)
        r2 = solve(SolveRequest(s, "power", n_fixed=4))
        assert r2.achieved_power == pytest.approx(power_of(s, 4))
        r3 = solve(SolveRequest(s, "effect", power_goal=0.8, n_fixed=4))
        assert r3.effect_solved is not None

    def test_request_validation(self):
        s = spec("two_sample_t", dict(delta=1.5, sd=0.5))
        with pytest.raises(InvalidDesignError):
            SolveRequest(s, "sample_size")            # missing power_goal
        with pytest.raises(InvalidDesignError):
            SolveRequest(s, "effect", power_goal=0.8)  # missing n_fixed
        with pytest.raises(InvalidDesignError):
            SolveRequest(s, "banana", power_goal=0.8)

    def test_solve_power_reports_allocation(self):
        s = spec("two_sample_t", dict(delta=0.5, sd=1.0, ratio=2.0))
        r = solve_power(s, 10)
        assert r.n_per_arm == (10, 20)
        assert r.n_total == 30
