"""Exact p-functions over finite trials, randomized and mid p-values, and
lexicographically cascaded two-sample rank tests with exact permutation
enumeration in rational arithmetic."""

from .order import (
    DEFAULT_PRECISION,
    CompareContext,
    EmptyTupleError,
    LexTuple,
    OrderError,
    Ordering,
    OrdValue,
    Rank,
    Rational,
    Score,
    ShapeMismatchError,
    compare,
    exact_fraction,
    format_ord,
    lex_tuple,
    shape,
    to_rational,
)
from .trial import (
    FiniteTrial,
    ImpreciseTieWarning,
    InvalidPFunctionError,
    InvalidStatisticError,
    InvalidTrialError,
    MissingOutcomeError,
    PFunction,
    PFunctionClass,
    ScaleBelowOneError,
    Statistic,
    TheoremCheckError,
    TrialError,
    Validity,
    check_idempotence,
    classify_pfunction,
    induce_phat,
    induced_measure,
    product_trial,
    pvalue_kinds,
    scale_pfunction,
)
from .randomized import (
    EpsOutOfRangeError,
    RandomizedPFunction,
    ROutOfRangeError,
    build_randomized,
    draw_uniform_r,
    exactness_cdf,
    lex_equivalence_check,
    mid_pvalue,
    midp_validity_check,
    randomized_pvalue,
)
from .ranktests import (
    AttainableSet,
    CascadeStatistic,
    Component,
    DegenerateSpreadError,
    DuplicateObservationsError,
    InvalidCascadeError,
    MonteCarloResult,
    PermutationDistribution,
    RankTestError,
    SizeLimitError,
    TCascadeNotExactError,
    TieGroup,
    TwoSample,
    attainable_pvalues,
    attainable_set,
    exact_perm_pvalue,
    mc_gaussian_pvalue,
    observed_cascade_value,
    permutation_distribution,
    rank_sum,
    scheme_scores,
    score_sum,
    student_t,
    x_ranks,
)
from .files import (
    TrialParseError,
    format_rational,
    load_trial,
    load_two_sample,
    parse_rational,
    parse_trial_document,
    parse_two_sample,
)

__version__ = "0.1.0"
