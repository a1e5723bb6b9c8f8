"""Per-test power functions.

Each function maps (validated spec, integer allocation) to exact power
under the test's formula. The t family and ANOVA/chi-square use noncentral
distributions; the z family, correlation, and the survival tests use their
classical normal-approximation closed forms. Every formula is ratified
against the Monte Carlo oracle in the test suite.

Conventions (echoed in formula ids):
- two-proportions z: variance pooled under H0 for the critical value,
  unpooled under H1 for the power shift
- two-sided power includes both rejection tails, so power -> alpha exactly
  as the effect vanishes
- one-sided power is computed in the direction of the stated effect
- survival hazard ratio is experimental over control; the event count is
  symmetric under (hr, k) -> (1/hr, 1/k)
"""

from __future__ import annotations

import math

from .designs import (
    NONPARAMETRIC_PARENT,
    TESTS,
    InvalidDesignError,
    TestSpec,
)
from .distributions import (
    DistParams,
    noncentral_cdf,
    normal_cdf,
    normal_quantile,
    quantile,
)

__all__ = ["power_of", "formula_id", "normalize_arms", "min_n", "required_events"]


def min_n(test: str) -> int:
    """Structural minimum per arm/group (total for one-sample tests)."""
    return TESTS[test].min_n


def normalize_arms(spec: TestSpec, n) -> tuple[int, ...]:
    """Expand a base sample size into the test's integer allocation.

    A scalar n is the first-arm (or per-group) size; the second arm follows
    the design's allocation ratio, rounded up. A tuple is taken as-is.
    """
    info = TESTS[spec.test]
    if isinstance(n, tuple):
        arms = tuple(int(v) for v in n)
    else:
        n1 = int(n)
        if info.n_arms == 1:
            arms = (n1,)
        elif spec.test == "log_rank":
            # arms are (nE, nC); the scalar base is the control arm
            arms = (math.ceil(spec.params.ratio_k * n1), n1)
        elif info.n_arms == 2:
            arms = (n1, math.ceil(spec.params.ratio * n1))
        else:
            arms = (n1,) * spec.params.k
    low = min_n(spec.test)
    for v in arms:
        if v < low:
            raise InvalidDesignError(
                {"n": f"{spec.test} needs at least {low} per arm/group, got {v}"})
    return arms


def _z_crit(alpha: float, tails: str) -> float:
    return normal_quantile(1.0 - alpha / 2.0) if tails == "two" else normal_quantile(1.0 - alpha)


def _t_power(delta_nc: float, df: float, alpha: float, tails: str) -> float:
    if tails == "two":
        crit = quantile("t", 1.0 - alpha / 2.0, DistParams(df))
        return (1.0 - noncentral_cdf("t", crit, DistParams(df, ncp=delta_nc))
                + noncentral_cdf("t", -crit, DistParams(df, ncp=delta_nc)))
    crit = quantile("t", 1.0 - alpha, DistParams(df))
    return 1.0 - noncentral_cdf("t", crit, DistParams(df, ncp=abs(delta_nc)))


def _one_sample_t(spec: TestSpec, arms) -> float:
    n = arms[0]
    return _t_power(spec.params.d * math.sqrt(n), n - 1.0, spec.alpha, spec.tails)


def _two_sample_t(spec: TestSpec, arms) -> float:
    n1, n2 = arms
    nc = spec.params.d * math.sqrt(n1 * n2 / (n1 + n2))
    return _t_power(nc, n1 + n2 - 2.0, spec.alpha, spec.tails)


def _anova(spec: TestSpec, arms) -> float:
    k = spec.params.k
    n_total = sum(arms)
    df1, df2 = k - 1.0, n_total - k
    lam = spec.params.f ** 2 * n_total
    crit = quantile("f", 1.0 - spec.alpha, DistParams(df1, df2))
    return 1.0 - noncentral_cdf("f", crit, DistParams(df1, df2, ncp=lam))


def _chi_square(spec: TestSpec, arms) -> float:
    n_total = arms[0]
    lam = n_total * spec.params.w ** 2
    crit = quantile("chisq", 1.0 - spec.alpha, DistParams(spec.params.df))
    return 1.0 - noncentral_cdf("chisq", crit, DistParams(spec.params.df, ncp=lam))


def _one_proportion(spec: TestSpec, arms) -> float:
    n = arms[0]
    p0, p1 = spec.params.p0, spec.params.p1
    se0 = math.sqrt(p0 * (1.0 - p0) / n)
    se1 = math.sqrt(p1 * (1.0 - p1) / n)
    shift = p1 - p0
    zc = _z_crit(spec.alpha, spec.tails)
    if spec.tails == "two":
        return (normal_cdf((shift - zc * se0) / se1)
                + normal_cdf((-shift - zc * se0) / se1))
    return normal_cdf((abs(shift) - zc * se0) / se1)


def _two_proportions(spec: TestSpec, arms) -> float:
    n1, n2 = arms
    p0, p1 = spec.params.p0, spec.params.p1
    pbar = (n1 * p0 + n2 * p1) / (n1 + n2)
    se0 = math.sqrt(pbar * (1.0 - pbar) * (1.0 / n1 + 1.0 / n2))
    se1 = math.sqrt(p0 * (1.0 - p0) / n1 + p1 * (1.0 - p1) / n2)
    shift = p1 - p0
    zc = _z_crit(spec.alpha, spec.tails)
    if spec.tails == "two":
        return (normal_cdf((shift - zc * se0) / se1)
                + normal_cdf((-shift - zc * se0) / se1))
    return normal_cdf((abs(shift) - zc * se0) / se1)


def _correlation(spec: TestSpec, arms) -> float:
    n = arms[0]
    fz = math.atanh(spec.params.r)
    scale = math.sqrt(n - 3.0)
    zc = _z_crit(spec.alpha, spec.tails)
    if spec.tails == "two":
        return (normal_cdf(scale * fz - zc) + normal_cdf(-scale * fz - zc))
    return normal_cdf(scale * abs(fz) - zc)


def required_events(hr: float, k: float, alpha: float, power_goal: float,
                    tails: str = "two") -> float:
    """Total events required by the Freedman formula, real-valued.

    m = (1/k) * ((k*hr + 1) / (hr - 1))^2 * (z_{1-a} + z_{1-b})^2
    with k = nE/nC; the equal-allocation case reduces to
    ((hr+1)/(hr-1))^2 (z+z)^2.
    """
    za = _z_crit(alpha, tails)
    zb = normal_quantile(power_goal)
    return ((k * hr + 1.0) / (hr - 1.0)) ** 2 * (za + zb) ** 2 / k


def _log_rank(spec: TestSpec, arms) -> float:
    nE, nC = arms
    p = spec.params
    events = nE * p.pE + nC * p.pC
    k = nE / nC
    zc = _z_crit(spec.alpha, spec.tails)
    shift = math.sqrt(events * k) * abs(p.hr - 1.0) / (k * p.hr + 1.0)
    if spec.tails == "two":
        # opposite rejection tail keeps the null limit at alpha exactly
        return normal_cdf(shift - zc) + normal_cdf(-shift - zc)
    return normal_cdf(shift - zc)


def _cox_ph(spec: TestSpec, arms) -> float:
    n_total = arms[0]
    p = spec.params
    zc = _z_crit(spec.alpha, spec.tails)
    shift = abs(math.log(p.hr)) * math.sqrt(
        n_total * p.psi * (1.0 - p.rho2) * p.covariate_variance())
    if spec.tails == "two":
        return normal_cdf(shift - zc) + normal_cdf(-shift - zc)
    return normal_cdf(shift - zc)


def _nonparametric(spec: TestSpec, arms) -> float:
    parent = NONPARAMETRIC_PARENT[spec.test]
    eff = tuple(a * spec.params.are for a in arms)
    if parent == "two_sample_t":
        n1, n2 = eff
        nc = spec.params.d * math.sqrt(n1 * n2 / (n1 + n2))
        return _t_power(nc, n1 + n2 - 2.0, spec.alpha, spec.tails)
    if parent == "paired_t":
        n = eff[0]
        return _t_power(spec.params.d * math.sqrt(n), n - 1.0, spec.alpha, spec.tails)
    # kruskal_wallis over one-way ANOVA
    k = spec.params.k
    n_total = sum(eff)
    df1, df2 = k - 1.0, n_total - k
    lam = spec.params.f ** 2 * n_total
    crit = quantile("f", 1.0 - spec.alpha, DistParams(df1, df2))
    return 1.0 - noncentral_cdf("f", crit, DistParams(df1, df2, ncp=lam))


_POWER_FNS = {
    "one_sample_t": _one_sample_t,
    "two_sample_t": _two_sample_t,
    "paired_t": _one_sample_t,          # identical computation on differences
    "one_way_anova": _anova,
    "one_proportion_z": _one_proportion,
    "two_proportions_z": _two_proportions,
    "chi_square": _chi_square,
    "correlation": _correlation,
    "mann_whitney": _nonparametric,
    "paired_wilcoxon": _nonparametric,
    "kruskal_wallis": _nonparametric,
    "log_rank": _log_rank,
    "cox_ph": _cox_ph,
}


def power_of(spec: TestSpec, n) -> float:
    """Power of the test at the given allocation.

    n may be a scalar base size (other arms follow the allocation ratio)
    or an explicit per-arm tuple.
    """
    arms = normalize_arms(spec, n)
    value = _POWER_FNS[spec.test](spec, arms)
    return min(1.0, max(0.0, value))


def formula_id(spec: TestSpec) -> str:
    """Stable identifier of the closed form used, with its conventions."""
    base = {
        "one_sample_t": "t.noncentral.one_sample",
        "two_sample_t": "t.noncentral.two_sample",
        "paired_t": "t.noncentral.paired",
        "one_way_anova": "f.noncentral.one_way(ncp=f2N)",
        "one_proportion_z": "z.one_prop(crit=null_sd,shift=alt_sd)",
        "two_proportions_z": "z.two_prop(pooled_h0,unpooled_h1)",
        "chi_square": "chisq.noncentral(ncp=Nw2)",
        "correlation": "z.correlation(fisher)",
        "log_rank": "freedman.log_rank(k_weighted)",
        "cox_ph": "schoenfeld_hsieh.cox(vif=1-rho2)",
    }
    if spec.test in NONPARAMETRIC_PARENT:
        parent = base[NONPARAMETRIC_PARENT[spec.test]]
        return f"are.{spec.test}(are={spec.params.are:g},parent={parent})"
    return base[spec.test]
