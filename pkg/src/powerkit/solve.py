"""Solvers: minimal sample size, achieved power, minimal detectable effect.

Sample-size solving exploits monotonicity of power in n: a doubling
bracket from the structural minimum followed by integer bisection, so the
returned n is minimal by construction (power(n) >= goal, power(n-1) < goal
on the base arm). The survival tests instead invert their event-count
closed forms, which yields the same minimal integer for the log-rank power
function; rank tests deflate their parametric parent's answer by the
configured relative efficiency.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any

from .designs import (
    NONPARAMETRIC_PARENT,
    TESTS,
    InvalidDesignError,
    TestSpec,
)
from .distributions import normal_quantile
from .power import formula_id, min_n, normalize_arms, power_of, required_events

__all__ = ["SolveRequest", "SolveResult", "UnreachablePowerError",
           "solve", "solve_n", "solve_power", "solve_effect"]

_N_CAP = 100_000_000
_EFFECT_TOL = 1e-10  # bisection width; well inside the 1e-6 contract


class UnreachablePowerError(ValueError):
    """The requested power cannot be reached (degenerate effect or goal)."""


@dataclass(frozen=True)
class SolveRequest:
    spec: TestSpec
    target: str                      # "sample_size" | "power" | "effect"
    power_goal: float | None = None  # required unless target == "power"
    n_fixed: Any = None              # required unless target == "sample_size"

    def __post_init__(self):
        if self.target not in ("sample_size", "power", "effect"):
            raise InvalidDesignError({"target": f"unknown solve target {self.target!r}"})
        if self.target != "power" and self.power_goal is None:
            raise InvalidDesignError({"power_goal": "missing required parameter"})
        if self.target != "sample_size" and self.n_fixed is None:
            raise InvalidDesignError({"n_fixed": "missing required parameter"})


@dataclass(frozen=True)
class SolveResult:
    test: str
    target: str
    n_per_arm: tuple[int, ...]
    n_total: int
    achieved_power: float
    formula_id: str
    events_required: int | None = None
    effect_solved: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "test": self.test,
            "target": self.target,
            "n_per_arm": list(self.n_per_arm),
            "n_total": self.n_total,
            "achieved_power": self.achieved_power,
            "formula_id": self.formula_id,
        }
        if self.events_required is not None:
            out["events_required"] = self.events_required
        if self.effect_solved is not None:
            out["effect_solved"] = self.effect_solved
        return out


def _check_goal(spec: TestSpec, power_goal: float) -> None:
    if not spec.alpha < power_goal < 1.0:
        raise InvalidDesignError(
            {"power_goal": f"must be in (alpha, 1) = ({spec.alpha}, 1), got {power_goal}"})


def min_base(spec: TestSpec) -> int:
    """Smallest base-arm n whose derived allocation meets every arm's
    structural minimum (an allocation ratio < 1 raises it)."""
    lo = min_n(spec.test)
    ratio = getattr(spec.params, "ratio", None)
    if spec.test == "log_rank":
        ratio = spec.params.ratio_k
    if ratio is None or ratio >= 1.0:
        return lo
    # need ceil(ratio * n1) >= lo, i.e. n1 > (lo - 1) / ratio
    return max(lo, math.floor((lo - 1) / ratio) + 1)


def _search_min_base(spec: TestSpec, power_goal: float) -> int:
    """Smallest base-arm n with power >= goal (doubling bracket + bisection)."""
    lo = min_base(spec)
    if power_of(spec, lo) >= power_goal:
        return lo
    fail, ok = lo, None
    step = max(lo, 1)
    while ok is None:
        step *= 2
        if step > _N_CAP:
            raise UnreachablePowerError(
                f"{spec.test}: power {power_goal} not reachable below n={_N_CAP} "
                "(degenerate effect?)")
        if power_of(spec, step) >= power_goal:
            ok = step
        else:
            fail = step
    while ok - fail > 1:
        mid = (ok + fail) // 2
        if power_of(spec, mid) >= power_goal:
            ok = mid
        else:
            fail = mid
    return ok


def _result_from_arms(spec: TestSpec, target: str, arms: tuple[int, ...],
                      effect_solved: float | None = None) -> SolveResult:
    achieved = power_of(spec, arms)
    events = None
    if spec.test == "log_rank":
        nE, nC = arms
        events = math.ceil(nE * spec.params.pE + nC * spec.params.pC)
    elif spec.test == "cox_ph":
        events = math.ceil(arms[0] * spec.params.psi)
    return SolveResult(
        test=spec.test,
        target=target,
        n_per_arm=arms,
        n_total=sum(arms),
        achieved_power=achieved,
        formula_id=formula_id(spec),
        events_required=events,
        effect_solved=effect_solved,
    )


def _solve_n_log_rank(spec: TestSpec, power_goal: float) -> SolveResult:
    p = spec.params
    events = required_events(p.hr, p.ratio_k, spec.alpha, power_goal, spec.tails)
    denom = p.ratio_k * p.pE + p.pC
    nC = math.ceil(events / denom)
    nE = math.ceil(p.ratio_k * events / denom)
    arms = (nE, nC)
    result = _result_from_arms(spec, "sample_size", arms)
    # report the event requirement itself, not the post-ceiling expectation
    return dataclasses.replace(result, events_required=math.ceil(events))


def _solve_n_cox(spec: TestSpec, power_goal: float) -> SolveResult:
    p = spec.params
    a = spec.alpha / 2.0 if spec.tails == "two" else spec.alpha
    za = normal_quantile(1.0 - a)
    zb = normal_quantile(power_goal)
    denom = (math.log(p.hr) ** 2) * p.covariate_variance() * p.psi * (1.0 - p.rho2)
    n_total = math.ceil((za + zb) ** 2 / denom)
    n_total = max(n_total, min_n("cox_ph"))
    return _result_from_arms(spec, "sample_size", (n_total,))


def _solve_n_nonparametric(spec: TestSpec, power_goal: float) -> SolveResult:
    parent_test = NONPARAMETRIC_PARENT[spec.test]
    parent_fields = {f.name for f in dataclasses.fields(TESTS[parent_test].design_cls)}
    parent_params = {k: v for k, v in dataclasses.asdict(spec.params).items()
                     if k in parent_fields}
    parent_spec = TestSpec(parent_test, TESTS[parent_test].design_cls(**parent_params),
                           alpha=spec.alpha, tails=spec.tails)
    parent_n = _search_min_base(parent_spec, power_goal)
    n = math.ceil(parent_n / spec.params.are)
    return _result_from_arms(spec, "sample_size", normalize_arms(spec, n))


def solve_n(spec: TestSpec, power_goal: float) -> SolveResult:
    """Minimal integer allocation reaching the power goal."""
    _check_goal(spec, power_goal)
    if spec.test == "log_rank":
        return _solve_n_log_rank(spec, power_goal)
    if spec.test == "cox_ph":
        return _solve_n_cox(spec, power_goal)
    if spec.test in NONPARAMETRIC_PARENT:
        return _solve_n_nonparametric(spec, power_goal)
    base = _search_min_base(spec, power_goal)
    return _result_from_arms(spec, "sample_size", normalize_arms(spec, base))


def solve_power(spec: TestSpec, n) -> SolveResult:
    """Achieved power at a fixed allocation."""
    arms = normalize_arms(spec, n)
    return _result_from_arms(spec, "power", arms)


def _with_effect(spec: TestSpec, value: float) -> TestSpec:
    """Rebuild the spec with the scalar effect replaced by `value`."""
    p = spec.params
    if spec.test in ("one_sample_t", "two_sample_t", "paired_t",
                     "mann_whitney", "paired_wilcoxon"):
        new = dataclasses.replace(p, delta=value * p.sd)
    elif spec.test in ("one_way_anova", "kruskal_wallis"):
        new = dataclasses.replace(p, f=value)
    elif spec.test == "chi_square":
        new = dataclasses.replace(p, w=value)
    elif spec.test == "correlation":
        new = dataclasses.replace(p, r=math.copysign(value, p.r))
    elif spec.test in ("one_proportion_z", "two_proportions_z"):
        direction = 1.0 if p.p1 >= p.p0 else -1.0
        new = dataclasses.replace(p, p1=p.p0 + direction * value)
    elif spec.test in ("log_rank", "cox_ph"):
        direction = 1.0 if p.hr > 1.0 else -1.0
        new = dataclasses.replace(p, hr=math.exp(direction * value))
    else:
        raise InvalidDesignError({"test": f"effect solving unsupported for {spec.test}"})
    return dataclasses.replace(spec, params=new)


def _effect_cap(spec: TestSpec) -> float:
    p = spec.params
    if spec.test in ("one_proportion_z", "two_proportions_z"):
        room = (1.0 - p.p0) if p.p1 >= p.p0 else p.p0
        return room - 1e-9
    if spec.test == "correlation":
        return 1.0 - 1e-9
    if spec.test in ("log_rank", "cox_ph"):
        return math.log(1e6)
    return 1e6


def solve_effect(spec: TestSpec, n_fixed, power_goal: float) -> SolveResult:
    """Smallest absolute effect reaching the goal at a fixed allocation.

    The effect scale is the test's scalar effect: standardized d for the
    t/rank family, Cohen's f or w, |r|, |p1 - p0|, or |ln hr|.
    """
    _check_goal(spec, power_goal)
    arms = normalize_arms(spec, n_fixed)

    def p_at(effect: float) -> float:
        return power_of(_with_effect(spec, effect), arms)

    lo, hi = 0.0, _effect_cap(spec)
    if p_at(hi) < power_goal:
        raise UnreachablePowerError(
            f"{spec.test}: power {power_goal} not reachable at n={arms} "
            f"within the effect bound {hi:g}")
    # shrink hi toward the root with plain bisection (power is monotone in effect)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if p_at(mid) >= power_goal:
            hi = mid
        else:
            lo = mid
        if hi - lo <= _EFFECT_TOL * max(1.0, hi):
            break
    solved_spec = _with_effect(spec, hi)
    result = _result_from_arms(solved_spec, "effect", arms, effect_solved=hi)
    return result


def solve(request: SolveRequest) -> SolveResult:
    """Dispatch on the requested unknown."""
    if request.target == "sample_size":
        return solve_n(request.spec, request.power_goal)
    if request.target == "power":
        return solve_power(request.spec, request.n_fixed)
    return solve_effect(request.spec, request.n_fixed, request.power_goal)
