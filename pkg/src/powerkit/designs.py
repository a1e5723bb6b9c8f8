"""Test catalog: design parameter containers, validation, and the registry
that ties test ids to their schemas.

The registry is the single source of truth for parameter names; the CLI
flags, the HTTP schemas, and the selector checklists are all generated
from it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Any

DEFAULT_ALPHA = 0.05
DEFAULT_TAILS = "two"
DEFAULT_ARE = 0.864  # conservative lower bound for rank tests vs their parent

TEST_IDS = (
    "one_sample_t",
    "two_sample_t",
    "paired_t",
    "one_way_anova",
    "one_proportion_z",
    "two_proportions_z",
    "chi_square",
    "correlation",
    "mann_whitney",
    "paired_wilcoxon",
    "kruskal_wallis",
    "log_rank",
    "cox_ph",
)


class InvalidDesignError(ValueError):
    """Parameter set violates its domain. Carries per-field diagnostics."""

    def __init__(self, errors: dict[str, str]):
        self.errors = dict(errors)
        super().__init__("; ".join(f"{k}: {v}" for k, v in self.errors.items()))


def _fail(field_name: str, message: str) -> None:
    raise InvalidDesignError({field_name: message})


@dataclass(frozen=True)
class MeanDesign:
    """Mean-difference design for the t family.

    delta and sd are in outcome units; for paired tests sd is the standard
    deviation of within-pair differences. ratio is n2/n1 and only matters
    for two-sample tests.
    """

    delta: float
    sd: float
    ratio: float = 1.0

    def __post_init__(self):
        if self.sd <= 0:
            _fail("sd", f"must be > 0, got {self.sd}")
        if self.ratio <= 0:
            _fail("ratio", f"must be > 0, got {self.ratio}")

    @property
    def d(self) -> float:
        """Standardized effect delta / sd."""
        return self.delta / self.sd


@dataclass(frozen=True)
class AnovaDesign:
    """One-way ANOVA with k equally sized groups and effect size f."""

    k: int
    f: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            _fail("k", f"must be an integer >= 2, got {self.k}")
        if self.f <= 0:
            _fail("f", f"must be > 0, got {self.f}")


def f_from_eta_squared(eta2: float) -> float:
    """Convert eta-squared to Cohen's f: f = sqrt(eta2 / (1 - eta2))."""
    if not 0.0 < eta2 < 1.0:
        _fail("eta2", f"must be in (0, 1), got {eta2}")
    import math
    return math.sqrt(eta2 / (1.0 - eta2))


def f_from_group_means(means, sd: float) -> float:
    """Convert anticipated group means and a common SD to Cohen's f:
    f = sd(means) / sd, with the population (divide-by-k) spread."""
    import math
    if sd <= 0:
        _fail("sd", f"must be > 0, got {sd}")
    values = [float(m) for m in means]
    if len(values) < 2:
        _fail("means", "need at least two group means")
    grand = sum(values) / len(values)
    spread = math.sqrt(sum((m - grand) ** 2 for m in values) / len(values))
    if spread == 0:
        _fail("means", "group means are all equal (no effect to detect)")
    return spread / sd


@dataclass(frozen=True)
class ProportionDesign:
    """Proportion designs: p0 is the null/control rate, p1 the alternative."""

    p0: float
    p1: float
    ratio: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            _fail("p0", f"must be in (0, 1), got {self.p0}")
        if not 0.0 < self.p1 < 1.0:
            _fail("p1", f"must be in (0, 1), got {self.p1}")
        if self.p0 == self.p1:
            _fail("p1", "must differ from p0 (no effect to detect)")
        if self.ratio <= 0:
            _fail("ratio", f"must be > 0, got {self.ratio}")


@dataclass(frozen=True)
class ChiSquareDesign:
    """Chi-square design over Cohen's w and df."""

    w: float
    df: int

    def __post_init__(self):
        if self.w <= 0:
            _fail("w", f"must be > 0, got {self.w}")
        if int(self.df) != self.df or self.df < 1:
            _fail("df", f"must be an integer >= 1, got {self.df}")


@dataclass(frozen=True)
class CorrelationDesign:
    """Single correlation coefficient tested against zero."""

    r: float

    def __post_init__(self):
        if not 0.0 < abs(self.r) < 1.0:
            _fail("r", f"must satisfy 0 < |r| < 1, got {self.r}")


@dataclass(frozen=True)
class SurvivalDesign:
    """Two-arm survival design.

    hr is the experimental-over-control hazard ratio. pE/pC are the arm
    event probabilities over the study horizon (log-rank subject
    conversion). ratio_k is nE/nC. The Cox fields describe a single
    covariate of interest: exactly one of exposure_prev (binary) or sigma
    (continuous SD), the overall event rate psi, and the squared multiple
    correlation rho2 of the covariate with the other covariates.
    """

    hr: float
    pE: float | None = None
    pC: float | None = None
    ratio_k: float = 1.0
    exposure_prev: float | None = None
    sigma: float | None = None
    psi: float | None = None
    rho2: float = 0.0

    def __post_init__(self):
        if self.hr <= 0:
            _fail("hr", f"must be > 0, got {self.hr}")
        if self.hr == 1.0:
            _fail("hr", "must differ from 1 (no effect to detect)")
        if self.ratio_k <= 0:
            _fail("ratio_k", f"must be > 0, got {self.ratio_k}")
        if not 0.0 <= self.rho2 < 1.0:
            _fail("rho2", f"must be in [0, 1), got {self.rho2}")

    def validate_log_rank(self) -> None:
        if self.pE is None:
            _fail("pE", "missing required parameter")
        if not 0.0 < self.pE <= 1.0:
            _fail("pE", f"must be in (0, 1], got {self.pE}")
        if self.pC is None:
            _fail("pC", "missing required parameter")
        if not 0.0 < self.pC <= 1.0:
            _fail("pC", f"must be in (0, 1], got {self.pC}")

    def validate_cox(self) -> None:
        if (self.exposure_prev is None) == (self.sigma is None):
            _fail("exposure_prev", "exactly one of exposure_prev or sigma must be set")
        if self.exposure_prev is not None and not 0.0 < self.exposure_prev < 1.0:
            _fail("exposure_prev", f"must be in (0, 1), got {self.exposure_prev}")
        if self.sigma is not None and self.sigma <= 0:
            _fail("sigma", f"must be > 0, got {self.sigma}")
        if self.psi is None:
            _fail("psi", "missing required parameter")
        if not 0.0 < self.psi <= 1.0:
            _fail("psi", f"must be in (0, 1], got {self.psi}")

    def covariate_variance(self) -> float:
        if self.exposure_prev is not None:
            return self.exposure_prev * (1.0 - self.exposure_prev)
        return self.sigma * self.sigma


@dataclass(frozen=True)
class MannWhitneyDesign(MeanDesign):
    are: float = DEFAULT_ARE

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.are <= 1.5:
            _fail("are", f"must be in (0, 1.5], got {self.are}")


@dataclass(frozen=True)
class PairedWilcoxonDesign(MeanDesign):
    are: float = DEFAULT_ARE

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.are <= 1.5:
            _fail("are", f"must be in (0, 1.5], got {self.are}")


@dataclass(frozen=True)
class KruskalWallisDesign(AnovaDesign):
    are: float = DEFAULT_ARE

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.are <= 1.5:
            _fail("are", f"must be in (0, 1.5], got {self.are}")


@dataclass(frozen=True)
class TestSpec:
    """A fully identified test: id, parameters, level, sidedness."""

    test: str
    params: Any
    alpha: float = DEFAULT_ALPHA
    tails: str = DEFAULT_TAILS

    def __post_init__(self):
        if self.test not in TEST_IDS:
            _fail("test", f"unknown test {self.test!r}")
        if not 0.0 < self.alpha < 1.0:
            _fail("alpha", f"must be in (0, 1), got {self.alpha}")
        if self.tails not in ("one", "two"):
            _fail("tails", f"must be 'one' or 'two', got {self.tails!r}")
        info = TESTS[self.test]
        if not isinstance(self.params, info.design_cls):
            _fail("params", f"{self.test} requires {info.design_cls.__name__}, "
                            f"got {type(self.params).__name__}")
        if self.tails == "one" and not info.sided:
            _fail("tails", f"{self.test} has no one-sided variant")
        if self.test == "log_rank":
            self.params.validate_log_rank()
        elif self.test == "cox_ph":
            self.params.validate_cox()


@dataclass(frozen=True)
class ParamField:
    name: str
    kind: str            # "effect" | "variability" | "allocation" | "level"
    default: Any = None  # None means required
    doc: str = ""


@dataclass(frozen=True)
class TestInfo:
    design_cls: type
    n_arms: int                 # 1, 2, or -1 for "k groups"
    sided: bool                 # whether a one-sided variant exists
    min_n: int                  # structural minimum per arm/group (or total)
    param_fields: tuple[ParamField, ...]
    label: str


TESTS: dict[str, TestInfo] = {
    "one_sample_t": TestInfo(
        MeanDesign, 1, True, 2,
        (
            ParamField("delta", "effect", doc="difference from the reference mean, outcome units"),
            ParamField("sd", "variability", doc="outcome standard deviation"),
        ),
        "one-sample t test",
    ),
    "two_sample_t": TestInfo(
        MeanDesign, 2, True, 2,
        (
            ParamField("delta", "effect", doc="difference in group means, outcome units"),
            ParamField("sd", "variability", doc="common outcome standard deviation"),
            ParamField("ratio", "allocation", 1.0, "n2/n1 allocation ratio"),
        ),
        "two-sample t test",
    ),
    "paired_t": TestInfo(
        MeanDesign, 1, True, 2,
        (
            ParamField("delta", "effect", doc="mean within-pair difference"),
            ParamField("sd", "variability", doc="standard deviation of the differences"),
        ),
        "paired t test",
    ),
    "one_way_anova": TestInfo(
        AnovaDesign, -1, False, 2,
        (
            ParamField("k", "effect", doc="number of groups"),
            ParamField("f", "effect", doc="Cohen's f"),
        ),
        "one-way ANOVA",
    ),
    "one_proportion_z": TestInfo(
        ProportionDesign, 1, True, 1,
        (
            ParamField("p0", "effect", doc="null proportion"),
            ParamField("p1", "effect", doc="alternative proportion"),
        ),
        "one-proportion z test",
    ),
    "two_proportions_z": TestInfo(
        ProportionDesign, 2, True, 1,
        (
            ParamField("p0", "effect", doc="control-arm proportion"),
            ParamField("p1", "effect", doc="treatment-arm proportion"),
            ParamField("ratio", "allocation", 1.0, "n2/n1 allocation ratio"),
        ),
        "two-proportions z test",
    ),
    "chi_square": TestInfo(
        ChiSquareDesign, 1, False, 1,
        (
            ParamField("w", "effect", doc="Cohen's w"),
            ParamField("df", "effect", doc="degrees of freedom of the table"),
        ),
        "chi-square test",
    ),
    "correlation": TestInfo(
        CorrelationDesign, 1, True, 4,
        (
            ParamField("r", "effect", doc="alternative correlation"),
        ),
        "correlation test",
    ),
    "mann_whitney": TestInfo(
        MannWhitneyDesign, 2, True, 2,
        (
            ParamField("delta", "effect", doc="location shift, outcome units"),
            ParamField("sd", "variability", doc="outcome standard deviation"),
            ParamField("ratio", "allocation", 1.0, "n2/n1 allocation ratio"),
            ParamField("are", "allocation", DEFAULT_ARE, "relative efficiency vs the t test"),
        ),
        "Mann-Whitney test",
    ),
    "paired_wilcoxon": TestInfo(
        PairedWilcoxonDesign, 1, True, 2,
        (
            ParamField("delta", "effect", doc="median within-pair difference"),
            ParamField("sd", "variability", doc="standard deviation of the differences"),
            ParamField("are", "allocation", DEFAULT_ARE, "relative efficiency vs the t test"),
        ),
        "paired Wilcoxon signed-rank test",
    ),
    "kruskal_wallis": TestInfo(
        KruskalWallisDesign, -1, False, 2,
        (
            ParamField("k", "effect", doc="number of groups"),
            ParamField("f", "effect", doc="Cohen's f of the parent ANOVA"),
            ParamField("are", "allocation", DEFAULT_ARE, "relative efficiency vs ANOVA"),
        ),
        "Kruskal-Wallis test",
    ),
    "log_rank": TestInfo(
        SurvivalDesign, 2, True, 1,
        (
            ParamField("hr", "effect", doc="experimental/control hazard ratio"),
            ParamField("pE", "effect", doc="event probability, experimental arm"),
            ParamField("pC", "effect", doc="event probability, control arm"),
            ParamField("ratio_k", "allocation", 1.0, "nE/nC allocation ratio"),
        ),
        "log-rank test",
    ),
    "cox_ph": TestInfo(
        SurvivalDesign, 1, True, 2,
        (
            ParamField("hr", "effect", doc="hazard ratio per unit of the covariate"),
            ParamField("exposure_prev", "effect", None, "binary covariate prevalence (or give sigma)"),
            ParamField("sigma", "effect", None, "continuous covariate SD (or give exposure_prev)"),
            ParamField("psi", "variability", doc="overall event rate"),
            ParamField("rho2", "variability", 0.0, "R^2 of the covariate on the others"),
        ),
        "Cox proportional hazards model",
    ),
}

# rank test -> parametric parent
NONPARAMETRIC_PARENT = {
    "mann_whitney": "two_sample_t",
    "paired_wilcoxon": "paired_t",
    "kruskal_wallis": "one_way_anova",
}

# the scalar that "make the effect bigger/smaller" acts on, per test
EFFECT_FIELD = {
    "one_sample_t": "delta",
    "two_sample_t": "delta",
    "paired_t": "delta",
    "one_way_anova": "f",
    "one_proportion_z": "p1",
    "two_proportions_z": "p1",
    "chi_square": "w",
    "correlation": "r",
    "mann_whitney": "delta",
    "paired_wilcoxon": "delta",
    "kruskal_wallis": "f",
    "log_rank": "hr",
    "cox_ph": "hr",
}


def build_spec(test: str, params: dict[str, Any], alpha: float = DEFAULT_ALPHA,
               tails: str = DEFAULT_TAILS) -> TestSpec:
    """Construct a validated TestSpec from a flat parameter mapping.

    Unknown parameter names and missing required ones raise
    InvalidDesignError with one message per offending field.
    """
    if test not in TESTS:
        raise InvalidDesignError({"test": f"unknown test {test!r}"})
    info = TESTS[test]
    allowed = {f.name for f in fields(info.design_cls)}
    errors: dict[str, str] = {}
    unknown = set(params) - allowed
    for name in sorted(unknown):
        errors[name] = f"unknown parameter for {test} (expected one of {sorted(allowed)})"
    required = {f.name for f in fields(info.design_cls) if f.default is dataclasses.MISSING}
    missing = required - set(params)
    for name in sorted(missing):
        errors[name] = "missing required parameter"
    if errors:
        raise InvalidDesignError(errors)
    design = info.design_cls(**{k: v for k, v in params.items() if k in allowed})
    return TestSpec(test=test, params=design, alpha=alpha, tails=tails)


def design_defaults(test: str) -> dict[str, Any]:
    """Default values the engine applies when a parameter is omitted."""
    info = TESTS[test]
    out: dict[str, Any] = {"alpha": DEFAULT_ALPHA, "tails": DEFAULT_TAILS}
    for f in info.param_fields:
        if f.default is not None:
            out[f.name] = f.default
    return out
