"""Two-sample rank statistics, lexicographic cascades, and exact permutation p-values.

The rank-sum statistic is the workhorse: rank the pooled observations
ascending, sum the ranks landing in the first group. Because its null
distribution over the C(m+n, m) equally likely group assignments is coarse,
a cascade appends further statistics that are only consulted to break ties
left by the earlier ones, i.e. the cascade value is the tuple of component
values compared lexicographically. Rank-based components (identity ranks,
expected normal order statistics, Gaussian quantiles, Laplace quantiles)
keep the test distribution-free and the enumeration exact; the Student t
component breaks every remaining tie but needs a Gaussian sampling null and
therefore a Monte Carlo p-value.

Per-rank scores are fixed-precision decimals built once per (scheme, pool
size, precision). The upper half of each score vector mirrors the lower
half with flipped sign, so the antisymmetry score(i) = -score(N+1-i) holds
bit for bit and mirror-image tie structure is preserved exactly. Sums of
scores are computed exactly (the decimal context traps inexact rounding);
distinct rank configurations whose sums agree to within the comparison
precision are treated as genuine ties and flagged.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
import random
from dataclasses import dataclass
from decimal import Decimal, Inexact, localcontext
from fractions import Fraction

import mpmath

from .order import (
    CompareContext,
    DEFAULT_PRECISION,
    LexTuple,
    OrdValue,
    Ordering,
    Rank,
    Score,
    compare,
    exact_fraction,
    format_ord,
)
from .trial import TheoremCheckError

DEFAULT_MAX_ENUM = 10_000_000


class RankTestError(Exception):
    """Base class for two-sample rank-test errors."""


class DuplicateObservationsError(RankTestError):
    """Pooled observations must be pairwise distinct."""


class DegenerateSpreadError(RankTestError):
    """The pooled spread S of the t statistic vanished."""


class InvalidCascadeError(RankTestError):
    """The cascade component list violates its construction rules."""


class TCascadeNotExactError(RankTestError):
    """Cascades containing the t component have no exact permutation p-value."""


class SizeLimitError(RankTestError):
    """The enumeration C(m+n, m) exceeds the configured cap."""


class Component(enum.Enum):
    """Cascade building blocks; all but STUDENT_T depend on ranks only."""

    WILCOXON = "wilcoxon"
    FYT = "fyt"
    VDW = "vdw"
    LAPLACE = "laplace"
    STUDENT_T = "t"

    @property
    def rank_based(self) -> bool:
        return self is not Component.STUDENT_T


RANK_SCHEMES = (Component.WILCOXON, Component.FYT, Component.VDW, Component.LAPLACE)


@dataclass(frozen=True)
class CascadeStatistic:
    """Ordered component list evaluated lexicographically.

    At most one STUDENT_T component is allowed and it must come last: the
    rank-based components preceding it stay distribution-free, while the t
    tie-break requires the Gaussian sampling null.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise InvalidCascadeError("a cascade needs at least one component")
        for c in comps:
            if not isinstance(c, Component):
                raise InvalidCascadeError(f"not a cascade component: {c!r}")
        t_positions = [i for i, c in enumerate(comps) if c is Component.STUDENT_T]
        if len(t_positions) > 1:
            raise InvalidCascadeError("at most one t component is allowed")
        if t_positions and t_positions[0] != len(comps) - 1:
            raise InvalidCascadeError("the t component must be the last cascade component")
        object.__setattr__(self, "components", comps)

    @classmethod
    def parse(cls, text: str) -> "CascadeStatistic":
        """Parse a comma-separated component list like "wilcoxon,fyt"."""
        names = [part.strip() for part in text.split(",") if part.strip()]
        by_name = {c.value: c for c in Component}
        unknown = [n for n in names if n not in by_name]
        if unknown:
            raise InvalidCascadeError(f"unknown cascade components: {unknown}")
        return cls(tuple(by_name[n] for n in names))

    @property
    def has_student_t(self) -> bool:
        return Component.STUDENT_T in self.components

    @property
    def rank_components(self) -> tuple:
        return tuple(c for c in self.components if c.rank_based)

    def label(self) -> str:
        return ",".join(c.value for c in self.components)


@dataclass(frozen=True)
class TwoSample:
    """Two groups of pairwise distinct exact observations."""

    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs = tuple(exact_fraction(v) for v in self.xs)
        ys = tuple(exact_fraction(v) for v in self.ys)
        if not xs or not ys:
            raise RankTestError("both groups need at least one observation")
        pooled = xs + ys
        if len(set(pooled)) != len(pooled):
            seen, dup = set(), None
            for v in pooled:
                if v in seen:
                    dup = v
                    break
                seen.add(v)
            raise DuplicateObservationsError(f"observations must be pairwise distinct; {dup} repeats")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def m(self) -> int:
        return len(self.xs)

    @property
    def n(self) -> int:
        return len(self.ys)

    @property
    def pool(self) -> int:
        return self.m + self.n


def x_ranks(sample: TwoSample) -> tuple:
    """Ascending ranks (1-based, over the pooled sample) occupied by the first group."""
    rank_of = {v: i for i, v in enumerate(sorted(sample.xs + sample.ys), start=1)}
    return tuple(sorted(rank_of[v] for v in sample.xs))


def rank_sum(sample: TwoSample) -> int:
    """Sum of the first group's ranks within the pooled ascending ranking."""
    return sum(x_ranks(sample))


# ---------------------------------------------------------------------------
# Per-rank score vectors


def _mpf_fraction(f: Fraction):
    return mpmath.mpf(f.numerator) / f.denominator


def _expected_normal_order_stat(i: int, pool: int):
    # E of the i-th order statistic of `pool` iid standard normals.
    coeff = mpmath.mpf(pool) * math.comb(pool - 1, i - 1)

    def integrand(z):
        return z * mpmath.npdf(z) * mpmath.ncdf(z) ** (i - 1) * mpmath.ncdf(-z) ** (pool - i)

    return coeff * mpmath.quad(integrand, [-mpmath.inf, 0, mpmath.inf])


def _gauss_quantile(p: Fraction):
    return mpmath.sqrt(2) * mpmath.erfinv(2 * _mpf_fraction(p) - 1)


def _laplace_quantile(p: Fraction):
    # Unit Laplace: Q(p) = ln(2p) below the median, -ln(2(1-p)) at or above it.
    if p < Fraction(1, 2):
        return mpmath.log(2 * _mpf_fraction(p))
    if p == Fraction(1, 2):
        return mpmath.mpf(0)
    return -mpmath.log(2 * _mpf_fraction(1 - p))


def _decimal_from_mpf(x, precision: int) -> Decimal:
    return Decimal(mpmath.nstr(x, precision, strip_zeros=False))


@functools.lru_cache(maxsize=None)
def scheme_scores(scheme: Component, pool: int, precision: int = DEFAULT_PRECISION) -> tuple:
    """Per-rank scores for one scheme at one pool size, as exact decimals.

    The vector is strictly increasing in rank (verified) and antisymmetric
    around the mid-rank by construction: only the lower half is computed
    and the upper half is its mirrored negation, so exact tie structure
    between mirror-image rank configurations survives any precision.
    """
    if not scheme.rank_based:
        raise InvalidCascadeError("the t component has no per-rank scores")
    if pool < 1:
        raise RankTestError(f"pool size must be >= 1, got {pool}")
    if scheme is Component.WILCOXON:
        return tuple(Decimal(i) for i in range(1, pool + 1))
    half = pool // 2
    with mpmath.workdps(precision + 15):
        if scheme is Component.FYT:
            lower = [_expected_normal_order_stat(i, pool) for i in range(1, half + 1)]
        elif scheme is Component.VDW:
            lower = [_gauss_quantile(Fraction(i, pool + 1)) for i in range(1, half + 1)]
        else:
            lower = [_laplace_quantile(Fraction(i, pool + 1)) for i in range(1, half + 1)]
        decimals = [_decimal_from_mpf(x, precision) for x in lower]
    if pool % 2:
        decimals.append(Decimal(0))
    # copy_negate is context-free: the upper half mirrors the lower exactly.
    decimals.extend(d.copy_negate() for d in reversed(decimals[:half]))
    for a, b in zip(decimals, decimals[1:]):
        if not a < b:
            raise RankTestError(
                f"{scheme.value} scores not strictly increasing at pool={pool}, precision={precision}"
            )
    return tuple(decimals)


def _exact_decimal_sum(terms, precision: int) -> Decimal:
    # Trap Inexact so a silent rounding of a score sum is impossible.
    with localcontext() as c:
        c.prec = precision + 40
        c.traps[Inexact] = True
        total = Decimal(0)
        for t in terms:
            total += t
    return total


def score_sum(sample: TwoSample, scheme: Component, precision: int = DEFAULT_PRECISION) -> Score:
    """Sum of the scheme's scores over the first group's ranks."""
    scores = scheme_scores(scheme, sample.pool, precision)
    total = _exact_decimal_sum((scores[r - 1] for r in x_ranks(sample)), precision)
    return Score(total, precision)


def student_t(sample: TwoSample, precision: int = DEFAULT_PRECISION) -> Score:
    """t = (mean(xs) - mean(ys)) / S with S the root pooled sum of squares.

    The conventional constant factor is irrelevant for ordering and is
    omitted. Distinct observations make S > 0 whenever m + n >= 3.
    """
    with mpmath.workdps(precision + 10):
        xs = [_mpf_fraction(v) for v in sample.xs]
        ys = [_mpf_fraction(v) for v in sample.ys]
        xbar = mpmath.fsum(xs) / len(xs)
        ybar = mpmath.fsum(ys) / len(ys)
        spread = mpmath.sqrt(
            mpmath.fsum((v - xbar) ** 2 for v in xs) + mpmath.fsum((v - ybar) ** 2 for v in ys)
        )
        if spread == 0:
            raise DegenerateSpreadError("pooled spread S is zero; t is undefined")
        t = (xbar - ybar) / spread
        return Score(_decimal_from_mpf(t, precision), precision)


# ---------------------------------------------------------------------------
# Exact permutation enumeration


def _rank_value(ranks, components, vectors, precision: int) -> LexTuple:
    parts = []
    for comp, vec in zip(components, vectors):
        if comp is Component.WILCOXON:
            parts.append(Rank(sum(ranks)))
        else:
            parts.append(Score(_exact_decimal_sum((vec[r - 1] for r in ranks), precision), precision))
    return LexTuple(tuple(parts))


def _rank_vectors(cascade: CascadeStatistic, pool: int, precision: int) -> tuple:
    return tuple(
        scheme_scores(c, pool, precision) if c is not Component.WILCOXON else None
        for c in cascade.components
    )


def _check_enum_size(m: int, n: int, max_enum: int) -> int:
    total = math.comb(m + n, m)
    if total > max_enum:
        raise SizeLimitError(f"C({m + n},{m}) = {total} exceeds the enumeration cap {max_enum}")
    return total


def observed_cascade_value(sample: TwoSample, cascade: CascadeStatistic, precision: int = DEFAULT_PRECISION) -> LexTuple:
    """The cascade value of the sample as given (x-role = first group)."""
    parts = []
    for comp in cascade.components:
        if comp is Component.WILCOXON:
            parts.append(Rank(rank_sum(sample)))
        elif comp is Component.STUDENT_T:
            parts.append(student_t(sample, precision))
        else:
            parts.append(score_sum(sample, comp, precision))
    return LexTuple(tuple(parts))


def exact_perm_pvalue(
    sample: TwoSample,
    cascade: CascadeStatistic,
    precision: int = DEFAULT_PRECISION,
    max_enum: int = DEFAULT_MAX_ENUM,
    ctx: CompareContext | None = None,
) -> Fraction:
    """P[cascade value of a random assignment <= observed], by full enumeration.

    Every assignment of m of the pooled observations to the x-role is
    equally likely; rank-based cascades depend on the assignment only
    through its ranks, so the enumeration runs over rank subsets. Cascades
    containing the t component are rejected: their null calibration is the
    Gaussian sampling model (use mc_gaussian_pvalue).
    """
    if cascade.has_student_t:
        raise TCascadeNotExactError("t cascades have no exact permutation p-value; use mc_gaussian_pvalue")
    total = _check_enum_size(sample.m, sample.n, max_enum)
    vectors = _rank_vectors(cascade, sample.pool, precision)
    observed = _rank_value(x_ranks(sample), cascade.components, vectors, precision)
    own = ctx if ctx is not None else CompareContext()
    count = 0
    for combo in itertools.combinations(range(1, sample.pool + 1), sample.m):
        value = _rank_value(combo, cascade.components, vectors, precision)
        if compare(value, observed, own) is not Ordering.GT:
            count += 1
    return Fraction(count, total)


@dataclass(frozen=True)
class PermutationDistribution:
    """Cascade values over all C(m+n, m) equally likely x-role assignments.

    ``entries`` are (value, weight) pairs in ascending value order, one per
    assignment, each of weight 1/C(m+n, m); ``assignments`` lists the
    x-role rank sets in the same order.
    """

    m: int
    n: int
    entries: tuple
    assignments: tuple


@dataclass(frozen=True)
class TieGroup:
    """Assignments sharing one cascade value; cum_count counts assignments <= it."""

    value: OrdValue
    members: tuple
    cum_count: int

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class AttainableSet:
    """Grouped permutation distribution of a rank-based cascade.

    The induced p-function attains exactly the cumulative probabilities at
    the group boundaries; groups with more than one member are residual
    ties the cascade failed to break.
    """

    m: int
    n: int
    cascade: CascadeStatistic
    precision: int
    total: int
    groups: tuple
    imprecise: bool

    @property
    def values(self) -> tuple:
        return tuple(Fraction(g.cum_count, self.total) for g in self.groups)

    @property
    def residual_ties(self) -> tuple:
        return tuple(g for g in self.groups if g.size > 1)

    def breaks_all_ties(self) -> bool:
        return len(self.groups) == self.total


def permutation_distribution(
    m: int,
    n: int,
    cascade: CascadeStatistic,
    precision: int = DEFAULT_PRECISION,
    max_enum: int = DEFAULT_MAX_ENUM,
    ctx: CompareContext | None = None,
) -> PermutationDistribution:
    """Enumerate and sort the full cascade distribution (rank-based cascades only)."""
    if cascade.has_student_t:
        raise TCascadeNotExactError("t cascades have no data-free permutation distribution")
    total = _check_enum_size(m, n, max_enum)
    pool = m + n
    vectors = _rank_vectors(cascade, pool, precision)
    combos = list(itertools.combinations(range(1, pool + 1), m))
    values = [_rank_value(c, cascade.components, vectors, precision) for c in combos]
    # Exact sort keys: ranks are ints, score sums exact decimals. Threshold
    # (near-)equality is handled afterwards by adjacent grouping.
    keys = [tuple(p.value for p in v.components) for v in values]
    order = sorted(range(total), key=keys.__getitem__)
    weight = Fraction(1, total)
    return PermutationDistribution(
        m=m,
        n=n,
        entries=tuple((values[i], weight) for i in order),
        assignments=tuple(combos[i] for i in order),
    )


def _grouped(dist: PermutationDistribution, ctx: CompareContext) -> tuple:
    groups = []
    for value, _ in dist.entries:
        if groups and compare(value, groups[-1][0], ctx) is Ordering.EQ:
            groups[-1][1] += 1
        else:
            groups.append([value, 1])
    out = []
    cum = 0
    pos = 0
    for value, size in groups:
        cum += size
        out.append(TieGroup(value=value, members=dist.assignments[pos : pos + size], cum_count=cum))
        pos += size
    return tuple(out)


def _verify_range_exact(dist: PermutationDistribution, groups: tuple, total: int, ctx: CompareContext) -> None:
    if sum(g.size for g in groups) != total:
        raise TheoremCheckError("group sizes do not add up to the assignment count")
    for a, b in zip(groups, groups[1:]):
        if compare(a.value, b.value, ctx) is not Ordering.LT:
            raise TheoremCheckError("attainable groups are not strictly ascending")
    if total * len(groups) <= 2_000_000:
        # Independent recount of P[value <= group value] at every group.
        for g in groups:
            count = sum(
                1 for value, _ in dist.entries if compare(value, g.value, ctx) is not Ordering.GT
            )
            if count != g.cum_count:
                raise TheoremCheckError(
                    f"range-exactness failed at {g.cum_count}/{total}: recounted {count}"
                )


def attainable_set(
    m: int,
    n: int,
    cascade: CascadeStatistic,
    precision: int = DEFAULT_PRECISION,
    max_enum: int = DEFAULT_MAX_ENUM,
) -> AttainableSet:
    """Grouped attainable p-values of a rank-based cascade, verified range-exact."""
    ctx = CompareContext()
    dist = permutation_distribution(m, n, cascade, precision, max_enum, ctx)
    total = math.comb(m + n, m)
    groups = _grouped(dist, ctx)
    _verify_range_exact(dist, groups, total, ctx)
    return AttainableSet(
        m=m,
        n=n,
        cascade=cascade,
        precision=precision,
        total=total,
        groups=groups,
        imprecise=ctx.imprecise,
    )


def attainable_pvalues(
    m: int,
    n: int,
    cascade: CascadeStatistic,
    precision: int = DEFAULT_PRECISION,
    max_enum: int = DEFAULT_MAX_ENUM,
) -> list:
    """Sorted attainable p-values {P[V <= v] : v attained}; data-independent."""
    return list(attainable_set(m, n, cascade, precision, max_enum).values)


# ---------------------------------------------------------------------------
# Published reference values for m = n = 6 (Pratt & Gibbons, 1981, Table 5.1)


@dataclass(frozen=True)
class ReferenceTable:
    """Attainable values claimed by the published table inside a window.

    The source table was computed at limited numeric precision; where the
    exact enumeration disagrees the discrepancy is reported, not hidden.
    """

    source: str
    window_hi: Fraction
    values: frozenset


def _ref(nums, window_hi) -> ReferenceTable:
    return ReferenceTable(
        source="Pratt-Gibbons 1981 Table 5.1",
        window_hi=Fraction(window_hi, 924),
        values=frozenset(Fraction(k, 924) for k in nums),
    )


_WILCOXON_66 = (1, 2, 4, 7, 12, 19, 30, 43, 61)
_FYT_ADDED_66 = (5, 8, 10, 14, 15, 17, 21, 22, 24, 26, 28, 32, 34, 35, 37, 39, 40, 42, 48, 49)

REFERENCE_TABLES_66 = {
    ("wilcoxon",): _ref(_WILCOXON_66, 61),
    ("wilcoxon", "fyt"): _ref(tuple(k for k in _WILCOXON_66 if k <= 49) + _FYT_ADDED_66, 49),
    ("wilcoxon", "fyt", "vdw"): _ref(
        tuple(k for k in _WILCOXON_66 if k <= 49) + _FYT_ADDED_66 + (41,), 49
    ),
}


def reference_for(m: int, n: int, cascade: CascadeStatistic) -> ReferenceTable | None:
    if (m, n) != (6, 6):
        return None
    return REFERENCE_TABLES_66.get(tuple(c.value for c in cascade.components))


@dataclass(frozen=True)
class ReferenceMismatch:
    """One attainable value on which exact enumeration and the reference differ."""

    value: Fraction
    in_ours: bool
    in_reference: bool
    groups: tuple


def _deciding_groups(att: AttainableSet, k: int) -> tuple:
    # Groups that decide whether k/total is attained: the group reaching or
    # spanning cumulative count k, plus the next one at an exact boundary.
    for i, g in enumerate(att.groups):
        if g.cum_count >= k:
            if g.cum_count == k and i + 1 < len(att.groups):
                return (g, att.groups[i + 1])
            return (g,)
    return (att.groups[-1],)


def compare_with_reference(att: AttainableSet, reference: ReferenceTable) -> list:
    """Mismatches between the exact attainable set and a published reference window."""
    window = reference.window_hi
    ours = {v for v in att.values if v <= window}
    mismatches = []
    for value in sorted(ours.symmetric_difference(reference.values)):
        k = value.numerator * (att.total // value.denominator)
        mismatches.append(
            ReferenceMismatch(
                value=value,
                in_ours=value in ours,
                in_reference=value in reference.values,
                groups=_deciding_groups(att, k),
            )
        )
    return mismatches


def format_ranks(ranks) -> str:
    return ",".join(str(r) for r in ranks)


def format_tie_group(group: TieGroup, total: int) -> str:
    members = "|".join(format_ranks(m) for m in group.members)
    p = Fraction(group.cum_count, total)
    return (
        f"p={p} cum-count={group.cum_count} size={group.size}"
        f" value={format_ord(group.value)} members={members}"
    )


def describe_mismatch(mismatch: ReferenceMismatch, total: int) -> list:
    """Deterministic report lines: the verdict plus the deciding tie groups."""
    lines = [
        f"value={mismatch.value} ours={'attained' if mismatch.in_ours else 'absent'}"
        f" reference={'listed' if mismatch.in_reference else 'absent'}"
    ]
    lines.extend("  group " + format_tie_group(g, total) for g in mismatch.groups)
    return lines


# ---------------------------------------------------------------------------
# Monte Carlo calibration for t cascades


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    ci95: tuple
    count: int
    draws: int
    seed: int


def _wilson_ci95(count: int, draws: int) -> tuple:
    z = 1.959963984540054
    phat = count / draws
    denom = 1 + z * z / draws
    center = (phat + z * z / (2 * draws)) / denom
    half = z * math.sqrt(phat * (1 - phat) / draws + z * z / (4 * draws * draws)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _float_cascade_value(values, m: int, components, float_vectors) -> tuple:
    order = sorted(range(len(values)), key=values.__getitem__)
    rank_of = {idx: r for r, idx in enumerate(order, start=1)}
    ranks = [rank_of[i] for i in range(m)]
    xs = values[:m]
    ys = values[m:]
    parts = []
    for comp, vec in zip(components, float_vectors):
        if comp is Component.WILCOXON:
            parts.append(sum(ranks))
        elif comp is Component.STUDENT_T:
            xbar = sum(xs) / len(xs)
            ybar = sum(ys) / len(ys)
            spread = math.sqrt(sum((v - xbar) ** 2 for v in xs) + sum((v - ybar) ** 2 for v in ys))
            parts.append((xbar - ybar) / spread)
        else:
            parts.append(math.fsum(vec[r - 1] for r in ranks))
    return tuple(parts)


def mc_gaussian_pvalue(
    sample: TwoSample,
    cascade: CascadeStatistic,
    num_draws: int,
    seed: int,
    precision: int = DEFAULT_PRECISION,
) -> MonteCarloResult:
    """Gaussian-calibrated p-value estimate for a cascade ending in t.

    Draws num_draws pooled samples from the standard normal, assigns the
    first m draws to the x-role, and estimates P[cascade value <= observed].
    Deterministic for a fixed seed. Both the observed value and the draws
    are evaluated through the same float path so rank ties compare
    consistently.
    """
    if not cascade.has_student_t:
        raise InvalidCascadeError("the Gaussian Monte Carlo path is for t cascades; use exact_perm_pvalue")
    if num_draws < 1:
        raise RankTestError(f"num_draws must be >= 1, got {num_draws}")
    pool = sample.pool
    float_vectors = tuple(
        [float(d) for d in scheme_scores(c, pool, precision)] if c.rank_based else None
        for c in cascade.components
    )
    observed_values = [float(v) for v in sample.xs] + [float(v) for v in sample.ys]
    observed = _float_cascade_value(observed_values, sample.m, cascade.components, float_vectors)
    rng = random.Random(seed)
    count = 0
    for _ in range(num_draws):
        draw = [rng.gauss(0.0, 1.0) for _ in range(pool)]
        value = _float_cascade_value(draw, sample.m, cascade.components, float_vectors)
        if value <= observed:
            count += 1
    return MonteCarloResult(
        estimate=count / num_draws,
        ci95=_wilson_ci95(count, num_draws),
        count=count,
        draws=num_draws,
        seed=seed,
    )
