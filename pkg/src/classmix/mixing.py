"""Class-product distributions and their mixing statistics.

The central object is the distribution of x'y' where x' and y' are uniform
random conjugates of x and y.  It is a class function of the product, so it is
stored per conjugacy class.  Two independent routes compute it: the character
formula (p_char) and definitional pair counting (p_brute); their agreement is
a standing acceptance criterion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import config
from .characters import CharacterTable, StructureConstants, witten_zeta
from .errors import InvariantViolation, LoopBudgetExceeded, SpecSyntax
from .groups import ClassData, GroupTable

CLAMP_FLOOR = -1e-12
SUPPORT_THRESHOLD = 1e-10


@dataclass(frozen=True)
class PairDistribution:
    """Per-class values of the product distribution for one class pair.

    probs[k] is the probability of each single element of class k.  counts
    carries the exact pair counts when the brute-force route produced the
    distribution, else None.
    """

    x_class: int
    y_class: int
    probs: np.ndarray
    order: int
    source: str  # "char" | "brute"
    counts: tuple[int, ...] | None = None
    clamped: int = 0

    def weighted_sum(self, sizes) -> float:
        return float(np.asarray(sizes, dtype=np.float64) @ self.probs)


def p_char(xc: int, yc: int, table: CharacterTable, classes: ClassData) -> PairDistribution:
    """Distribution via the character sum; tiny negative lift noise is clamped."""
    vals = table.values
    degrees = np.asarray(table.degrees, dtype=np.float64)
    weights = vals[:, xc] * vals[:, yc] / degrees
    inv_cols = np.asarray(classes.inverse_class, dtype=np.intp)
    raw = (weights @ vals[:, inv_cols]) / table.order
    probs = raw.real.copy()
    if np.abs(raw.imag).max() > 1e-8:
        raise InvariantViolation(f"character sum has imaginary part {np.abs(raw.imag).max():.2e}")
    below = probs < 0
    if probs.min() < CLAMP_FLOOR:
        raise InvariantViolation(f"character sum produced negative probability {probs.min():.2e}")
    clamped = int(below.sum())
    probs[below] = 0.0
    return PairDistribution(
        x_class=xc, y_class=yc, probs=probs, order=table.order, source="char", clamped=clamped
    )


def p_brute(
    xc: int,
    yc: int,
    table: GroupTable,
    classes: ClassData,
    budget: int | None = None,
) -> PairDistribution:
    """Definitional oracle: exact integer pair counts over C_x times C_y."""
    mx = classes.members(xc)
    my = classes.members(yc)
    pairs = len(mx) * len(my)
    if pairs > config.loop_budget(budget):
        raise LoopBudgetExceeded(f"{pairs} pairs exceed the loop budget")
    k = classes.k
    class_of = classes.class_of
    counts = np.zeros(k, dtype=np.int64)
    if table.order <= 4096:
        mul = table.full_mul_table()
        prods = mul[np.ix_(mx, my)].ravel()
        counts = np.bincount(class_of[prods], minlength=k)
    else:
        for u in mx:
            rm_u = [table.mul_index(int(u), int(v)) for v in my]
            counts += np.bincount(class_of[rm_u], minlength=k)
    sizes = np.asarray(classes.sizes, dtype=np.float64)
    probs = counts / (float(pairs) * sizes)
    return PairDistribution(
        x_class=xc,
        y_class=yc,
        probs=probs,
        order=table.order,
        source="brute",
        counts=tuple(int(c) for c in counts),
    )


def l2_sq(dist: PairDistribution, classes: ClassData) -> float:
    """Squared l2 norm: sum over g of p(g)^2, via class sizes."""
    sizes = np.asarray(classes.sizes, dtype=np.float64)
    return float(sizes @ (dist.probs * dist.probs))


def l2_sq_char(xc: int, yc: int, table: CharacterTable) -> float:
    """Closed form |G|^-1 sum over characters of |chi(x)|^2 |chi(y)|^2 / chi(1)^2."""
    vals = table.values
    degrees = np.asarray(table.degrees, dtype=np.float64)
    terms = (np.abs(vals[:, xc]) ** 2) * (np.abs(vals[:, yc]) ** 2) / degrees**2
    return float(terms.sum() / table.order)


@dataclass(frozen=True)
class DistanceReport:
    l1: float
    l2_sq: float  # squared l2 distance to uniform, computed directly
    linf: float


def dist_to_uniform(dist: PairDistribution, classes: ClassData) -> DistanceReport:
    sizes = np.asarray(classes.sizes, dtype=np.float64)
    u = 1.0 / dist.order
    diff = dist.probs - u
    return DistanceReport(
        l1=float(sizes @ np.abs(diff)),
        l2_sq=float(sizes @ (diff * diff)),
        linf=float(np.abs(diff).max()),
    )


@dataclass(frozen=True)
class CoverageReport:
    support: int  # |x^G y^G| in elements
    fraction: float
    exact: bool


def coverage(dist: PairDistribution, classes: ClassData) -> CoverageReport:
    """Support of the product set, exact from brute counts, thresholded otherwise."""
    sizes = np.asarray(classes.sizes, dtype=np.int64)
    if dist.counts is not None:
        mask = np.asarray(dist.counts) > 0
        exact = True
    else:
        mask = dist.probs > SUPPORT_THRESHOLD
        exact = False
    support = int(sizes[mask].sum())
    return CoverageReport(support=support, fraction=support / dist.order, exact=exact)


# ---------------------------------------------------------------------------
# Thompson-type search


@dataclass(frozen=True)
class ThompsonResult:
    best_class: int
    support: int
    fraction: float
    witness: bool
    per_class: tuple[tuple[int, int], ...]  # (class index, support size)


def thompson_search(
    table: GroupTable, classes: ClassData, constants: StructureConstants
) -> ThompsonResult:
    """Exact search for a class whose square covers the group.

    Uses the integer structure constants: class k lies in (C_i)^2 exactly when
    tensor[i, i, k] > 0, so the coverage count is exact.
    """
    sizes = np.asarray(classes.sizes, dtype=np.int64)
    best_class, best_support = 0, 0
    per_class = []
    for i in range(classes.k):
        mask = constants.tensor[i, i, :] > 0
        support = int(sizes[mask].sum())
        per_class.append((i, support))
        if support > best_support:
            best_class, best_support = i, support
    return ThompsonResult(
        best_class=best_class,
        support=best_support,
        fraction=best_support / table.order,
        witness=best_support == table.order,
        per_class=tuple(per_class),
    )


# ---------------------------------------------------------------------------
# couplings and surveys


@dataclass(frozen=True)
class Independent:
    def describe(self) -> str:
        return "independent"


@dataclass(frozen=True)
class Diagonal:
    def describe(self) -> str:
        return "diagonal"


@dataclass(frozen=True)
class TranslatedInverse:
    """x uniform, y = x^-1 a for a fixed element a."""

    a_index: int

    def describe(self) -> str:
        return f"transinv:{self.a_index}"


@dataclass(frozen=True)
class BijectionCoupling:
    """x uniform, y = f(x) for an arbitrary permutation f of element indices."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise SpecSyntax("bijection table is not a permutation of element indices")

    def describe(self) -> str:
        return "bijection"


Coupling = Independent | Diagonal | TranslatedInverse | BijectionCoupling


@dataclass(frozen=True)
class SurveyPair:
    x_class: int
    y_class: int
    weight: float
    n_stat: float  # |G| * l2_sq, 1 for the uniform distribution
    l1: float
    coverage_fraction: float


@dataclass(frozen=True)
class SurveyReport:
    group: str
    coupling: str
    pairs: tuple[SurveyPair, ...]
    thresholds: tuple[tuple[float, float], ...]  # (delta, weighted P[N <= 1 + delta])
    quantiles: tuple[tuple[float, float], ...]
    sampled: bool
    sample_count: int
    normalization_note: str = "N = |G| * ||p_xy||_2^2; thresholds 1 + delta bound N"

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "group": self.group,
            "coupling": self.coupling,
            "normalization_note": self.normalization_note,
            "sampled": self.sampled,
            "sample_count": self.sample_count,
            "pairs": [
                {
                    "x_class": p.x_class,
                    "y_class": p.y_class,
                    "weight": p.weight,
                    "N": p.n_stat,
                    "l1": p.l1,
                    "coverage": p.coverage_fraction,
                }
                for p in self.pairs
            ],
            "thresholds": [{"delta": d, "prob": pr} for d, pr in self.thresholds],
            "quantiles": [{"q": q, "N": v} for q, v in self.quantiles],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["xclass,yclass,weight,N,l1,coverage"]
        for p in self.pairs:
            lines.append(
                f"{p.x_class},{p.y_class},{p.weight!r},{p.n_stat!r},{p.l1!r},{p.coverage_fraction!r}"
            )
        return "\n".join(lines) + "\n"

    def threshold_prob(self, delta: float) -> float:
        for d, pr in self.thresholds:
            if d == delta:
                return pr
        raise KeyError(delta)


DEFAULT_THRESHOLDS = (0.0, 0.01, 0.1, 0.5, 1.0, 2.0)
_QUANTILE_POINTS = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0)

EXACT_SWEEP_LIMIT = 10**5
MIN_SAMPLES = 10**5


def survey(
    table: GroupTable,
    classes: ClassData,
    chartable: CharacterTable,
    coupling: Coupling,
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
    stream: np.random.Generator | None = None,
    samples: int = MIN_SAMPLES,
) -> SurveyReport:
    """Coupling-weighted sweep of the normalized collision statistic N.

    Independent and Diagonal couplings are exact class sweeps.  Element-indexed
    couplings sweep every x in G exactly when |G| <= 10^5 and otherwise fall
    back to seeded sampling, flagged in the report.
    """
    k = classes.k
    sizes = classes.sizes
    order = table.order
    weights = np.zeros((k, k), dtype=np.float64)
    sampled = False
    sample_count = 0

    if isinstance(coupling, Independent):
        w = np.asarray(sizes, dtype=np.float64) / order
        weights = np.outer(w, w)
    elif isinstance(coupling, Diagonal):
        for i, s in enumerate(sizes):
            weights[i, i] = s / order
    elif isinstance(coupling, (TranslatedInverse, BijectionCoupling)):
        if order <= EXACT_SWEEP_LIMIT:
            counts = np.zeros((k, k), dtype=np.int64)
            for x in range(order):
                y = _coupled_partner(table, coupling, x)
                counts[classes.class_of[x], classes.class_of[y]] += 1
            weights = counts / float(order)
        else:
            if stream is None:
                raise SpecSyntax("sampling fallback requires a random stream")
            sampled = True
            sample_count = max(int(samples), MIN_SAMPLES)
            counts = np.zeros((k, k), dtype=np.int64)
            draws = stream.integers(0, order, size=sample_count)
            for x in draws:
                y = _coupled_partner(table, coupling, int(x))
                counts[classes.class_of[int(x)], classes.class_of[y]] += 1
            weights = counts / float(sample_count)
    else:
        raise SpecSyntax(f"unknown coupling {coupling!r}")

    n_matrix = np.empty((k, k), dtype=np.float64)
    for i in range(k):
        for j in range(i, k):
            n = order * l2_sq_char(i, j, chartable)
            n_matrix[i, j] = n_matrix[j, i] = n

    pair_rows = []
    for i in range(k):
        for j in range(k):
            if weights[i, j] == 0.0:
                continue
            dist = p_char(i, j, chartable, classes)
            dr = dist_to_uniform(dist, classes)
            cov = coverage(dist, classes)
            pair_rows.append(
                SurveyPair(
                    x_class=i,
                    y_class=j,
                    weight=float(weights[i, j]),
                    n_stat=float(n_matrix[i, j]),
                    l1=dr.l1,
                    coverage_fraction=cov.fraction,
                )
            )

    w_arr = np.array([p.weight for p in pair_rows])
    n_arr = np.array([p.n_stat for p in pair_rows])
    thr = tuple((float(d), float(w_arr[n_arr <= 1.0 + d].sum())) for d in thresholds)
    quant = _weighted_quantiles(n_arr, w_arr, _QUANTILE_POINTS)
    return SurveyReport(
        group=table.spec.label,
        coupling=coupling.describe(),
        pairs=tuple(pair_rows),
        thresholds=thr,
        quantiles=quant,
        sampled=sampled,
        sample_count=sample_count,
    )


def _coupled_partner(table: GroupTable, coupling, x: int) -> int:
    if isinstance(coupling, TranslatedInverse):
        return table.mul_index(table.inv_index(x), coupling.a_index)
    return coupling.mapping[x]


def _weighted_quantiles(values, weights, points) -> tuple[tuple[float, float], ...]:
    order = np.argsort(values, kind="stable")
    v = values[order]
    cw = np.cumsum(weights[order])
    total = cw[-1]
    out = []
    for q in points:
        target = q * total
        idx = int(np.searchsorted(cw, target, side="left"))
        idx = min(idx, len(v) - 1)
        out.append((float(q), float(v[idx])))
    return tuple(out)


# ---------------------------------------------------------------------------
# character-bound fraction


@dataclass(frozen=True)
class CharBoundReport:
    fraction: float
    lower_bound: float  # 2 - zeta_G(s)
    s: float
    binding: bool  # whether the bound was below 1 and thus asserted


def char_bound_fraction(
    table: GroupTable,
    classes: ClassData,
    chartable: CharacterTable,
    s: float,
    tol: float = 1e-9,
) -> CharBoundReport:
    """Class-size-weighted fraction of x with |chi(x)| <= chi(1)^(s/2) for all chi.

    The fraction is guaranteed to exceed 2 - zeta_G(s) whenever that bound is
    below 1; a violation means the character table is wrong, so it raises.
    """
    if s <= 0:
        raise SpecSyntax(f"character-bound fraction needs s > 0, got {s}")
    vals = np.abs(chartable.values)
    bounds = np.asarray(chartable.degrees, dtype=np.float64) ** (s / 2.0)
    good_cols = np.all(vals <= bounds[:, None] + tol, axis=0)
    sizes = np.asarray(classes.sizes, dtype=np.int64)
    fraction = Fraction(int(sizes[good_cols].sum()), table.order)
    bound = 2.0 - witten_zeta(chartable, s)
    binding = bound < 1.0
    if binding and not float(fraction) > bound:
        raise InvariantViolation(
            f"character-bound fraction {float(fraction)} fails lower bound {bound}"
        )
    return CharBoundReport(fraction=float(fraction), lower_bound=bound, s=s, binding=binding)


# ---------------------------------------------------------------------------
# exact coverage/norm link, used by tests and reports


def coverage_norm_link_holds(dist: PairDistribution, classes: ClassData) -> bool:
    """Exact check of: coverage fraction 1 - delta implies N >= 1/(1 - delta).

    Only meaningful for brute distributions, where both sides are rationals.
    """
    if dist.counts is None:
        raise SpecSyntax("exact link check needs a brute-force distribution")
    sizes = classes.sizes
    total_pairs = sum(dist.counts)
    support = sum(s for s, c in zip(sizes, dist.counts) if c > 0)
    # N = |G| * sum_k |C_k| p_k^2 with p_k = counts_k / (pairs * |C_k|)
    n_exact = (
        Fraction(dist.order)
        * sum(Fraction(c * c, s) for c, s in zip(dist.counts, sizes))
        / (Fraction(total_pairs) ** 2)
    )
    return n_exact >= Fraction(dist.order, support)
