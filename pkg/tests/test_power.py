"""Power-formula tests: frozen derived values, identities, and the
monotonicity/size/scale invariants."""

import math

import numpy as np
import pytest

from powerkit.designs import InvalidDesignError, build_spec
from powerkit.power import formula_id, normalize_arms, power_of, required_events


def spec(test, params, **kw):
    return build_spec(test, params, **kw)


class TestTFamily:
    def test_null_effect_gives_alpha(self):
        s = spec("two_sample_t", dict(delta=0.0, sd=0.5))
        assert power_of(s, 30) == pytest.approx(0.05, abs=1e-6)

    def test_methods_request_pair(self):
        # delta=1.5, sd=0.5 (d=3): 4 per arm reaches 0.8, 3 does not
        s = spec("two_sample_t", dict(delta=1.5, sd=0.5))
        assert power_of(s, 4) >= 0.8
        assert power_of(s, 3) < 0.8

    def test_scale_invariance(self):
        a = spec("two_sample_t", dict(delta=1.5, sd=0.5))
        b = spec("two_sample_t", dict(delta=15.0, sd=5.0))
        for n in (3, 10, 40):
            assert power_of(a, n) == power_of(b, n)

    def test_paired_equals_one_sample_bitwise(self):
        pa = spec("paired_t", dict(delta=0.4, sd=1.1))
        os_ = spec("one_sample_t", dict(delta=0.4, sd=1.1))
        for n in (5, 17, 64, 211):
            assert power_of(pa, n) == power_of(os_, n)

    def test_one_sided_exceeds_two_sided(self):
        two = spec("one_sample_t", dict(delta=0.5, sd=1.0))
        one = spec("one_sample_t", dict(delta=0.5, sd=1.0), tails="one")
        assert power_of(one, 30) > power_of(two, 30)

    def test_minimum_n_enforced(self):
        s = spec("two_sample_t", dict(delta=1.0, sd=1.0))
        with pytest.raises(InvalidDesignError):
            power_of(s, 1)


class TestAnovaChi:
    def test_anova_k2_equals_two_sample_t(self):
        # F(1, 2n-2) at t^2 is exactly the two-sided t: identical power
        t = spec("two_sample_t", dict(delta=0.5, sd=1.0))
        a = spec("one_way_anova", dict(k=2, f=0.25))
        for n in (5, 20, 64, 150):
            assert power_of(a, n) == pytest.approx(power_of(t, n), abs=1e-9)

    def test_anova_tails_one_rejected(self):
        with pytest.raises(InvalidDesignError):
            spec("one_way_anova", dict(k=3, f=0.2), tails="one")

    def test_effect_size_conversions(self):
        from powerkit.designs import f_from_eta_squared, f_from_group_means
        # eta2 = f^2 / (1 + f^2): f = 0.25 corresponds to eta2 = 0.0588...
        assert f_from_eta_squared(0.0625 / 1.0625) == pytest.approx(0.25, abs=1e-12)
        # two groups at +/- a around the mean with common sd
        assert f_from_group_means([10.0, 10.5], 1.0) == pytest.approx(0.25, abs=1e-12)
        assert f_from_group_means([1.0, 2.0, 3.0], 2.0) == pytest.approx(
            math.sqrt(2.0 / 3.0) / 2.0, abs=1e-12)
        with pytest.raises(InvalidDesignError):
            f_from_eta_squared(1.2)
        with pytest.raises(InvalidDesignError):
            f_from_group_means([5.0, 5.0], 1.0)

    def test_chi_square_null_limit(self):
        s = spec("chi_square", dict(w=1e-9, df=3))
        assert power_of(s, 500) == pytest.approx(0.05, abs=1e-6)


class TestProportions:
    def test_one_prop_size_at_null_limit(self):
        s = spec("one_proportion_z", dict(p0=0.3, p1=0.3 + 1e-12))
        assert power_of(s, 400) == pytest.approx(0.05, abs=1e-6)

    def test_two_prop_symmetric_in_direction(self):
        up = spec("two_proportions_z", dict(p0=0.4, p1=0.5))
        down = spec("two_proportions_z", dict(p0=0.5, p1=0.4))
        assert power_of(up, 200) == pytest.approx(power_of(down, 200), abs=1e-12)

    def test_two_prop_derived_example_value(self):
        # frozen from the hand-evaluated pooled/unpooled closed form
        s = spec("two_proportions_z", dict(p0=0.18, p1=0.14))
        assert power_of(s, 1318) >= 0.8
        assert power_of(s, 1317) < 0.8


class TestCorrelation:
    def test_power_to_alpha_as_r_vanishes(self):
        s = spec("correlation", dict(r=1e-9))
        assert power_of(s, 50) == pytest.approx(0.05, abs=1e-6)

    def test_sign_symmetry(self):
        pos = spec("correlation", dict(r=0.4))
        neg = spec("correlation", dict(r=-0.4))
        assert power_of(pos, 60) == pytest.approx(power_of(neg, 60), abs=1e-12)


class TestSurvival:
    def test_freedman_equal_allocation_events(self):
        # ((hr+1)/(hr-1))^2 (z_a + z_b)^2 at hr=2, alpha .05, power .9
        events = required_events(2.0, 1.0, 0.05, 0.9)
        assert math.ceil(events) == 95
        assert events == pytest.approx(94.567, abs=5e-3)

    def test_freedman_table_cross_checks(self):
        # two entries cross-checked against the published log-rank tables
        assert math.ceil(required_events(2.0, 1.0, 0.05, 0.9)) == 95
        assert math.ceil(required_events(1.5, 1.0, 0.05, 0.9)) == 263

    def test_hr_inverse_symmetry(self):
        assert required_events(2.0, 1.0, 0.05, 0.9) == pytest.approx(
            required_events(0.5, 1.0, 0.05, 0.9), rel=1e-12)
        # full swap: (hr, k) -> (1/hr, 1/k)
        assert required_events(2.0, 2.0, 0.05, 0.8) == pytest.approx(
            required_events(0.5, 0.5, 0.05, 0.8), rel=1e-12)

    def test_hr_limit_events_floor(self):
        # hr -> inf: ((hr+1)/(hr-1))^2 -> 1, so events -> (z_a + z_b)^2
        zsum2 = required_events(1e9, 1.0, 0.05, 0.9)
        from powerkit.distributions import normal_quantile
        expected = (normal_quantile(0.975) + normal_quantile(0.9)) ** 2
        assert zsum2 == pytest.approx(expected, rel=1e-6)

    def test_log_rank_power_monotone_in_n(self):
        s = spec("log_rank", dict(hr=1.5, pE=0.6, pC=0.7))
        powers = [power_of(s, n) for n in (50, 100, 200, 400)]
        assert powers == sorted(powers)

    def test_survival_size_in_hr_to_one_limit(self):
        lr = spec("log_rank", dict(hr=1.0 + 1e-9, pE=0.6, pC=0.7))
        assert power_of(lr, 200) == pytest.approx(0.05, abs=1e-6)
        cx = spec("cox_ph", dict(hr=1.0 + 1e-9, exposure_prev=0.5, psi=0.9))
        assert power_of(cx, 300) == pytest.approx(0.05, abs=1e-6)

    def test_cox_doubling_psi_halves_n_before_ceiling(self):
        from powerkit.solve import solve_n
        lo = solve_n(spec("cox_ph", dict(hr=1.5, exposure_prev=0.5, psi=0.4)), 0.8)
        hi = solve_n(spec("cox_ph", dict(hr=1.5, exposure_prev=0.5, psi=0.8)), 0.8)
        assert lo.n_total == pytest.approx(2 * hi.n_total, abs=2)

    def test_cox_rho2_one_unreachable(self):
        with pytest.raises(InvalidDesignError):
            spec("cox_ph", dict(hr=2.0, exposure_prev=0.5, psi=1.0, rho2=1.0))

    def test_hr_one_rejected(self):
        with pytest.raises(InvalidDesignError):
            spec("log_rank", dict(hr=1.0, pE=0.5, pC=0.5))


class TestNonparametric:
    def test_are_one_matches_parent(self):
        mw = spec("mann_whitney", dict(delta=0.5, sd=1.0, are=1.0))
        t = spec("two_sample_t", dict(delta=0.5, sd=1.0))
        for n in (10, 64):
            assert power_of(mw, n) == pytest.approx(power_of(t, n), abs=1e-12)

    def test_formula_id_reports_are(self):
        mw = spec("mann_whitney", dict(delta=0.5, sd=1.0))
        assert "are=0.864" in formula_id(mw)
        assert "t.noncentral.two_sample" in formula_id(mw)


class TestMonotonicityProperties:
    """Randomized monotonicity sweeps: power nondecreasing in n, in the
    standardized effect, and in alpha."""

    CASES = [
        ("one_sample_t", lambda r: dict(delta=r.uniform(0.1, 1.2), sd=1.0)),
        ("two_sample_t", lambda r: dict(delta=r.uniform(0.1, 1.2), sd=1.0)),
        ("paired_t", lambda r: dict(delta=r.uniform(0.1, 1.2), sd=1.0)),
        ("one_way_anova", lambda r: dict(k=int(r.integers(2, 6)), f=r.uniform(0.1, 0.5))),
        ("one_proportion_z", lambda r: dict(p0=r.uniform(0.2, 0.6),
                                            p1=r.uniform(0.62, 0.9))),
        ("two_proportions_z", lambda r: dict(p0=r.uniform(0.1, 0.4),
                                             p1=r.uniform(0.45, 0.8))),
        ("chi_square", lambda r: dict(w=r.uniform(0.1, 0.5), df=int(r.integers(1, 8)))),
        ("correlation", lambda r: dict(r=r.uniform(0.1, 0.7))),
        ("mann_whitney", lambda r: dict(delta=r.uniform(0.1, 1.0), sd=1.0)),
        ("paired_wilcoxon", lambda r: dict(delta=r.uniform(0.1, 1.0), sd=1.0)),
        ("kruskal_wallis", lambda r: dict(k=int(r.integers(2, 5)), f=r.uniform(0.1, 0.5))),
        ("log_rank", lambda r: dict(hr=r.uniform(1.2, 3.0), pE=r.uniform(0.3, 0.9),
                                    pC=r.uniform(0.3, 0.9))),
        ("cox_ph", lambda r: dict(hr=r.uniform(1.2, 3.0),
                                  exposure_prev=r.uniform(0.2, 0.8),
                                  psi=r.uniform(0.3, 1.0))),
    ]

    @pytest.mark.parametrize("test,gen", CASES, ids=[c[0] for c in CASES])
    def test_nondecreasing_in_n(self, test, gen):
        rng = np.random.default_rng(abs(hash(test)) % 2 ** 31)
        for _ in range(80):
            s = spec(test, gen(rng))
            lo = 4 if test == "correlation" else 2
            ns = sorted(set(int(v) for v in rng.integers(lo, 400, size=6)))
            powers = [power_of(s, n) for n in ns]
            assert all(b - a >= -1e-9 for a, b in zip(powers, powers[1:])), (s, ns, powers)

    def test_nondecreasing_in_effect_and_alpha(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            d_lo, d_hi = sorted(rng.uniform(0.05, 2.0, size=2))
            n = int(rng.integers(5, 200))
            s_lo = spec("two_sample_t", dict(delta=float(d_lo), sd=1.0))
            s_hi = spec("two_sample_t", dict(delta=float(d_hi), sd=1.0))
            assert power_of(s_hi, n) >= power_of(s_lo, n) - 1e-9
            a_lo, a_hi = sorted(rng.uniform(0.005, 0.2, size=2))
            s_alo = spec("two_sample_t", dict(delta=0.5, sd=1.0), alpha=float(a_lo))
            s_ahi = spec("two_sample_t", dict(delta=0.5, sd=1.0), alpha=float(a_hi))
            assert power_of(s_ahi, n) >= power_of(s_alo, n) - 1e-9


class TestNormalizeArms:
    def test_ratio_expansion(self):
        s = spec("two_sample_t", dict(delta=0.5, sd=1.0, ratio=2.0))
        assert normalize_arms(s, 10) == (10, 20)

    def test_log_rank_scalar_is_control_arm(self):
        s = spec("log_rank", dict(hr=2.0, pE=0.5, pC=0.7, ratio_k=2.0))
        assert normalize_arms(s, 50) == (100, 50)

    def test_anova_expands_to_k_groups(self):
        s = spec("one_way_anova", dict(k=4, f=0.3))
        assert normalize_arms(s, 12) == (12, 12, 12, 12)
