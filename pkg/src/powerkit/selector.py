"""Deterministic mapping from a structured study description to a
recommended test plus the ordered checklist of parameters it needs.

The decision tree covers the supported catalog. Descriptors that are
internally contradictory raise IncoherentDescriptorError; coherent designs
the catalog has no method for (for example paired binary outcomes) raise
UnsupportedDesignError naming the missing method.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .designs import DEFAULT_ALPHA, DEFAULT_ARE, DEFAULT_TAILS, TESTS

OUTCOMES = ("continuous", "binary", "time_to_event", "correlation")
PAIRINGS = ("independent", "paired")
COMPARISONS = ("vs_constant", "between_groups")
ASSUMPTIONS = ("parametric", "nonparametric", "unspecified")


class IncoherentDescriptorError(ValueError):
    """Descriptor fields contradict each other."""


class UnsupportedDesignError(ValueError):
    """Descriptor is coherent but outside the supported catalog."""


@dataclass(frozen=True)
class StudyDescriptor:
    outcome: str
    n_groups: int = 1
    pairing: str = "independent"
    comparison: str = "between_groups"
    distribution_assumption: str = "unspecified"
    covariate_adjusted: bool = False

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise IncoherentDescriptorError(
                f"outcome must be one of {OUTCOMES}, got {self.outcome!r}")
        if self.n_groups < 1:
            raise IncoherentDescriptorError(f"n_groups must be >= 1, got {self.n_groups}")
        if self.pairing not in PAIRINGS:
            raise IncoherentDescriptorError(
                f"pairing must be one of {PAIRINGS}, got {self.pairing!r}")
        if self.comparison not in COMPARISONS:
            raise IncoherentDescriptorError(
                f"comparison must be one of {COMPARISONS}, got {self.comparison!r}")
        if self.distribution_assumption not in ASSUMPTIONS:
            raise IncoherentDescriptorError(
                f"distribution_assumption must be one of {ASSUMPTIONS}, "
                f"got {self.distribution_assumption!r}")
        if self.pairing == "paired" and self.n_groups > 2:
            raise IncoherentDescriptorError(
                "paired designs have at most 2 measurement occasions/groups")
        if self.comparison == "vs_constant" and self.n_groups != 1:
            raise IncoherentDescriptorError(
                "comparison against a constant implies a single group")
        if (self.outcome in ("continuous", "binary") and self.n_groups == 1
                and self.comparison == "between_groups"):
            raise IncoherentDescriptorError(
                "a single group cannot support a between-group comparison; "
                "use comparison='vs_constant'")
        if self.outcome == "correlation" and self.n_groups != 1:
            raise IncoherentDescriptorError("correlation designs use a single sample")
        if self.covariate_adjusted and self.outcome != "time_to_event":
            raise IncoherentDescriptorError(
                "covariate_adjusted applies to time-to-event outcomes only")


@dataclass(frozen=True)
class ChecklistItem:
    name: str
    default: object = None   # None means the user must supply it
    doc: str = ""

    def render(self) -> str:
        if self.default is None:
            return self.name
        return f"{self.name}(default {self.default})"


@dataclass(frozen=True)
class Recommendation:
    test: str
    rationale: str
    required_params: tuple[ChecklistItem, ...]
    alternatives: tuple[str, ...] = ()


def checklist(test: str) -> tuple[ChecklistItem, ...]:
    """Ordered parameter checklist: effect, variability, then level/allocation,
    closing with the power goal. Defaults noted where the engine has one."""
    if test not in TESTS:
        raise KeyError(f"unknown test id {test!r}")
    info = TESTS[test]
    effect = [ChecklistItem(f.name, f.default, f.doc)
              for f in info.param_fields if f.kind == "effect"]
    variability = [ChecklistItem(f.name, f.default, f.doc)
                   for f in info.param_fields if f.kind == "variability"]
    allocation = [ChecklistItem(f.name, f.default, f.doc)
                  for f in info.param_fields if f.kind == "allocation"]
    tail: list[ChecklistItem] = [ChecklistItem("alpha", DEFAULT_ALPHA, "significance level")]
    # survival tests run on a two-sided z by convention and do not surface tails
    if info.sided and test not in ("log_rank", "cox_ph"):
        tail.append(ChecklistItem("tails", DEFAULT_TAILS, "one- or two-sided"))
    tail.append(ChecklistItem("power", None, "target power"))
    return tuple(effect + variability + allocation + tail)


def select(d: StudyDescriptor) -> Recommendation:
    """Walk the decision tree. Total over the supported descriptor space."""
    if d.outcome == "correlation":
        return _rec("correlation",
                    "a single sample with an association between two variables "
                    "is tested with a correlation test")

    if d.outcome == "continuous":
        return _select_continuous(d)

    if d.outcome == "binary":
        return _select_binary(d)

    # time-to-event
    if d.comparison == "vs_constant" or d.n_groups == 1:
        raise UnsupportedDesignError(
            "one-arm time-to-event designs are outside the supported catalog")
    if d.n_groups > 2:
        raise UnsupportedDesignError(
            "time-to-event comparisons across 3+ groups are outside the supported catalog")
    if d.covariate_adjusted:
        return _rec("cox_ph",
                    "two-arm survival with covariate adjustment calls for a Cox "
                    "proportional hazards model",
                    alternatives=("log_rank",))
    return _rec("log_rank",
                "an unadjusted two-arm survival comparison is the classic "
                "log-rank setting",
                alternatives=("cox_ph",))


def _select_continuous(d: StudyDescriptor) -> Recommendation:
    # an unspecified assumption defaults to the parametric branch, with the
    # rank-based counterpart surfaced as the alternative
    nonpar = d.distribution_assumption == "nonparametric"
    if d.n_groups == 1 and d.comparison == "vs_constant":
        if nonpar:
            return _rec("paired_wilcoxon",
                        "a one-sample location test without normality becomes a "
                        "signed-rank test on deviations from the constant",
                        alternatives=("one_sample_t",))
        return _rec("one_sample_t",
                    "one group compared against a fixed value takes a one-sample t test",
                    alternatives=("paired_wilcoxon",))
    if d.n_groups == 2 and d.pairing == "paired":
        if nonpar:
            return _rec("paired_wilcoxon",
                        "paired continuous measurements without normality take the "
                        "Wilcoxon signed-rank test",
                        alternatives=("paired_t",))
        return _rec("paired_t",
                    "two paired measurements per subject take a paired t test",
                    alternatives=("paired_wilcoxon",))
    if d.n_groups == 2:
        if nonpar:
            return _rec("mann_whitney",
                        "two independent groups without normality take the "
                        "Mann-Whitney test",
                        alternatives=("two_sample_t",))
        return _rec("two_sample_t",
                    "two independent groups with a continuous outcome take a "
                    "two-sample t test",
                    alternatives=("mann_whitney",))
    if d.n_groups >= 3:
        if nonpar:
            return _rec("kruskal_wallis",
                        "three or more independent groups without normality take the "
                        "Kruskal-Wallis test",
                        alternatives=("one_way_anova",))
        return _rec("one_way_anova",
                    "three or more independent groups with a continuous outcome "
                    "take a one-way ANOVA",
                    alternatives=("kruskal_wallis",))
    raise IncoherentDescriptorError(f"unroutable continuous descriptor: {d}")


def _select_binary(d: StudyDescriptor) -> Recommendation:
    if d.pairing == "paired" and d.n_groups == 2:
        raise UnsupportedDesignError(
            "paired binary outcomes (McNemar) are outside the supported catalog")
    if d.n_groups == 1 and d.comparison == "vs_constant":
        return _rec("one_proportion_z",
                    "one group's event rate against a reference value takes a "
                    "single-proportion z test")
    if d.n_groups == 2:
        return _rec("two_proportions_z",
                    "two independent groups with a binary outcome take a "
                    "two-proportions z test",
                    alternatives=("chi_square",))
    if d.n_groups >= 3:
        return _rec("chi_square",
                    "three or more groups with a categorical outcome take a "
                    "chi-square test",
                    alternatives=())
    raise IncoherentDescriptorError(f"unroutable binary descriptor: {d}")


def _rec(test: str, why: str, alternatives: tuple[str, ...] = ()) -> Recommendation:
    return Recommendation(
        test=test,
        rationale=why,
        required_params=checklist(test),
        alternatives=alternatives,
    )


def coherent_descriptors():
    """Enumerate the full coherent descriptor space (a few hundred points).

    Yields (descriptor, supported) pairs; supported is False for coherent
    designs the catalog cannot serve.
    """
    for outcome in OUTCOMES:
        for n_groups in (1, 2, 3, 4):
            for pairing in PAIRINGS:
                for comparison in COMPARISONS:
                    for assumption in ASSUMPTIONS:
                        for cov in (False, True):
                            try:
                                d = StudyDescriptor(outcome, n_groups, pairing,
                                                    comparison, assumption, cov)
                            except IncoherentDescriptorError:
                                continue
                            try:
                                select(d)
                                yield d, True
                            except UnsupportedDesignError:
                                yield d, False
                            except IncoherentDescriptorError:
                                continue
