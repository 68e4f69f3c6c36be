"""Interleaved products over G^t and the rectangle distinguishing experiment.

A t-tuple pair (a, b) multiplies out as a1 b1 a2 b2 ... at bt.  Tuple sets are
materialized explicitly (as sorted integer codes over base |G|) so densities
are exact rationals and exact enumeration is possible within the loop budget.
The conditional sampler for a fixed product g uses the free-coordinate
bijection: a and b1..b_{t-1} determine b_t, so drawing the free coordinates
uniformly is exactly uniform on the fiber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import config
from .errors import (
    ArityMismatch,
    LoopBudgetExceeded,
    OverlappingRectangles,
    SpecSyntax,
    UncoveredProbe,
)
from .groups import Element, GroupTable

MAX_MATERIALIZED = 64_000_000  # tuple-set codes kept in memory


@dataclass(frozen=True)
class TupleSet:
    """Subset of G^t held as sorted integer codes (base |G| digits = coordinates)."""

    arity: int
    group_order: int
    codes: np.ndarray  # int64, sorted, unique
    descriptor: str

    @property
    def size(self) -> int:
        return len(self.codes)

    @property
    def density(self) -> Fraction:
        return Fraction(self.size, self.group_order**self.arity)

    def rows(self, selection: np.ndarray | slice = slice(None)) -> np.ndarray:
        return decode_tuples(self.codes[selection], self.arity, self.group_order)

    def contains_code(self, code: int) -> bool:
        pos = int(np.searchsorted(self.codes, code))
        return pos < len(self.codes) and int(self.codes[pos]) == code

    def contains_codes(self, codes: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, len(self.codes) - 1)
        return self.codes[pos] == codes


def encode_tuples(rows: np.ndarray, order: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    t = rows.shape[1]
    weights = order ** np.arange(t, dtype=np.int64)
    return rows @ weights


def decode_tuples(codes: np.ndarray, arity: int, order: int) -> np.ndarray:
    out = np.empty((len(codes), arity), dtype=np.int64)
    rem = np.asarray(codes, dtype=np.int64).copy()
    for i in range(arity):
        out[:, i] = rem % order
        rem //= order
    return out


def explicit_tuple_set(table: GroupTable, rows: list[tuple[int, ...]], descriptor: str = "explicit") -> TupleSet:
    if not rows:
        raise SpecSyntax("tuple set cannot be empty")
    t = len(rows[0])
    for r in rows:
        if len(r) != t:
            raise ArityMismatch(f"tuple {r} has arity {len(r)}, expected {t}")
        if any(not (0 <= x < table.order) for x in r):
            raise SpecSyntax(f"element index out of range in tuple {r}")
    codes = encode_tuples(np.array(rows, dtype=np.int64), table.order)
    uniq = np.unique(codes)
    if len(uniq) != len(codes):
        raise SpecSyntax("duplicate tuples in explicit tuple set")
    return TupleSet(arity=t, group_order=table.order, codes=uniq, descriptor=descriptor)


def seeded_tuple_set(
    table: GroupTable, arity: int, density: float, stream: np.random.Generator, descriptor: str = ""
) -> TupleSet:
    """Uniform random subset of G^t of the given density, materialized explicitly.

    The realized density is exactly round(density * |G|^t) / |G|^t; the draw is
    reproducible from the stream.
    """
    if arity < 1:
        raise ArityMismatch(f"arity must be >= 1, got {arity}")
    if not (0.0 < density <= 1.0):
        raise SpecSyntax(f"density must lie in (0, 1], got {density}")
    total = table.order**arity
    m = max(1, round(density * total))
    if total > MAX_MATERIALIZED:
        raise LoopBudgetExceeded(
            f"G^t has {total} tuples; materialization is capped at {MAX_MATERIALIZED}"
        )
    codes = stream.choice(total, size=m, replace=False).astype(np.int64)
    codes.sort()
    return TupleSet(
        arity=arity,
        group_order=table.order,
        codes=codes,
        descriptor=descriptor or f"seeded(alpha={density})",
    )


def full_tuple_set(table: GroupTable, arity: int) -> TupleSet:
    total = table.order**arity
    if total > MAX_MATERIALIZED:
        raise LoopBudgetExceeded(f"G^t has {total} tuples; too large to materialize")
    return TupleSet(
        arity=arity,
        group_order=table.order,
        codes=np.arange(total, dtype=np.int64),
        descriptor="full",
    )


# ---------------------------------------------------------------------------
# products


def interleave_product(table: GroupTable, a, b) -> int:
    """Index of a1 b1 a2 b2 ... at bt; accepts index sequences or Elements."""
    a_idx = _tuple_indices(table, a)
    b_idx = _tuple_indices(table, b)
    if len(a_idx) != len(b_idx):
        raise ArityMismatch(f"arity {len(a_idx)} vs {len(b_idx)}")
    acc = 0
    for ai, bi in zip(a_idx, b_idx):
        acc = table.mul_index(acc, ai)
        acc = table.mul_index(acc, bi)
    return acc


def _tuple_indices(table: GroupTable, tup) -> list[int]:
    out = []
    for x in tup:
        if isinstance(x, Element):
            if x.table is not table:
                raise ArityMismatch("tuple element from a different group")
            out.append(x.index)
        else:
            out.append(int(x))
    return out


def _fold_products(table: GroupTable, a_row: np.ndarray, b_rows: np.ndarray, mul: np.ndarray) -> np.ndarray:
    """Vectorized a . b over all rows of b_rows for a fixed a_row."""
    acc = mul[a_row[0], b_rows[:, 0]]
    for i in range(1, len(a_row)):
        acc = mul[acc, a_row[i]]
        acc = mul[acc, b_rows[:, i]]
    return acc


@dataclass(frozen=True)
class InterleaveEstimate:
    """Distribution of a . b per group element, exact or Monte Carlo."""

    probs: np.ndarray  # float64, length |G|
    counts: np.ndarray  # int64 draws or exact pair counts
    total: int
    mode: str  # "exact" | "montecarlo"
    linf_dev: float
    stderr: np.ndarray | None = None  # per-cell standard error in MC mode

    def to_json_dict(self, table: GroupTable) -> dict:
        return {
            "schema": 1,
            "mode": self.mode,
            "total": self.total,
            "linf_dev": self.linf_dev,
            "probs": {table.elements[i].hex(): float(p) for i, p in enumerate(self.probs)},
        }


def _estimate_from_counts(counts: np.ndarray, total: int, order: int, mode: str) -> InterleaveEstimate:
    probs = counts / float(total)
    # deviation computed in exact integers: max |counts * |G| - total| / (total * |G|)
    dev_num = int(np.abs(counts * np.int64(order) - total).max())
    linf = dev_num / (total * order) if dev_num else 0.0
    stderr = None
    if mode == "montecarlo":
        stderr = np.sqrt(probs * (1.0 - probs) / total)
    return InterleaveEstimate(
        probs=probs, counts=counts, total=total, mode=mode, linf_dev=float(linf), stderr=stderr
    )


def exact_distribution(
    a_set: TupleSet, b_set: TupleSet, table: GroupTable, budget: int | None = None
) -> InterleaveEstimate:
    """Exact counts of a . b over all of A x B, within the loop budget."""
    _check_compat(a_set, b_set, table)
    pairs = a_set.size * b_set.size
    if pairs > config.loop_budget(budget):
        raise LoopBudgetExceeded(f"{pairs} pairs exceed the loop budget")
    mul = table.full_mul_table()
    b_rows = b_set.rows()
    counts = np.zeros(table.order, dtype=np.int64)
    for a_row in a_set.rows():
        prods = _fold_products(table, a_row, b_rows, mul)
        counts += np.bincount(prods, minlength=table.order)
    return _estimate_from_counts(counts, pairs, table.order, "exact")


def mc_distribution(
    a_set: TupleSet,
    b_set: TupleSet,
    samples: int,
    stream: np.random.Generator,
    table: GroupTable,
    block: int = 1_000_000,
) -> InterleaveEstimate:
    """Monte Carlo estimate with uniform draws from A and B, in stream-split blocks."""
    _check_compat(a_set, b_set, table)
    if samples < 10**4:
        raise SpecSyntax(f"at least 10^4 samples required, got {samples}")
    mul = table.full_mul_table()
    counts = np.zeros(table.order, dtype=np.int64)
    done = 0
    while done < samples:
        n = min(block, samples - done)
        ai = stream.integers(0, a_set.size, size=n)
        bi = stream.integers(0, b_set.size, size=n)
        a_rows = a_set.rows(ai)
        b_rows = b_set.rows(bi)
        acc = mul[a_rows[:, 0], b_rows[:, 0]]
        for i in range(1, a_set.arity):
            acc = mul[acc, a_rows[:, i]]
            acc = mul[acc, b_rows[:, i]]
        counts += np.bincount(acc, minlength=table.order)
        done += n
    return _estimate_from_counts(counts, samples, table.order, "montecarlo")


def _check_compat(a_set: TupleSet, b_set: TupleSet, table: GroupTable):
    if a_set.arity != b_set.arity:
        raise ArityMismatch(f"arity {a_set.arity} vs {b_set.arity}")
    if a_set.group_order != table.order or b_set.group_order != table.order:
        raise SpecSyntax("tuple sets were built over a different group order")


# ---------------------------------------------------------------------------
# deviation shapes


@dataclass(frozen=True)
class DeviationReport:
    """l-infinity deviation and the implied decay exponent at desk scale.

    normalized = D * alpha * beta * |G|; the implied exponent solves
    normalized = base^(-c * t) with base = n (alternating) or q (Lie type,
    rank folded in by the caller through t).  c > 0 is the qualitative pass.
    """

    linf_dev: float
    alpha: float
    beta: float
    order: int
    arity: int
    family: str
    base: float
    normalized: float
    implied_exponent: float  # inf when the deviation is exactly 0

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "linf_dev": self.linf_dev,
            "alpha": self.alpha,
            "beta": self.beta,
            "order": self.order,
            "arity": self.arity,
            "family": self.family,
            "base": self.base,
            "normalized": self.normalized,
            "implied_exponent": self.implied_exponent if math.isfinite(self.implied_exponent) else "inf",
        }


def deviation_report(
    estimate: InterleaveEstimate,
    alpha: float,
    beta: float,
    family: str,
    base: float,
    arity: int,
) -> DeviationReport:
    order = len(estimate.probs)
    normalized = estimate.linf_dev * alpha * beta * order
    if normalized <= 0.0:
        implied = math.inf
    else:
        implied = -math.log(normalized) / (arity * math.log(base))
    return DeviationReport(
        linf_dev=estimate.linf_dev,
        alpha=alpha,
        beta=beta,
        order=order,
        arity=arity,
        family=family,
        base=float(base),
        normalized=float(normalized),
        implied_exponent=float(implied) if math.isfinite(implied) else math.inf,
    )


# ---------------------------------------------------------------------------
# conditional fiber sampling


def fiber_sample(
    table: GroupTable, g: int | Element, arity: int, stream: np.random.Generator, draws: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (a, b) pairs exactly uniform on the fiber {(a, b) : a . b = g}.

    a and b1..b_{t-1} are uniform; b_t is the unique completion, and the map
    to the free coordinates is a bijection, so uniformity is exact.
    """
    if arity < 1:
        raise ArityMismatch(f"arity must be >= 1, got {arity}")
    g_idx = g.index if isinstance(g, Element) else int(g)
    mul = table.full_mul_table()
    inv = np.fromiter((table.inv_index(i) for i in range(table.order)), dtype=np.int64, count=table.order)
    a_rows = stream.integers(0, table.order, size=(draws, arity)).astype(np.int64)
    b_rows = np.empty((draws, arity), dtype=np.int64)
    if arity > 1:
        b_rows[:, : arity - 1] = stream.integers(0, table.order, size=(draws, arity - 1))
    # prefix = a1 b1 ... b_{t-1} a_t ; then b_t = prefix^-1 g
    acc = a_rows[:, 0]
    for i in range(1, arity):
        acc = mul[acc, b_rows[:, i - 1]]
        acc = mul[acc, a_rows[:, i]]
    b_rows[:, arity - 1] = mul[inv[acc], g_idx]
    return a_rows, b_rows


def enumerate_fiber(table: GroupTable, g: int | Element, arity: int, budget: int | None = None):
    """Yield every (a, b) with a . b = g by sweeping the free coordinates."""
    g_idx = g.index if isinstance(g, Element) else int(g)
    order = table.order
    free = 2 * arity - 1
    total = order**free
    if total > config.loop_budget(budget):
        raise LoopBudgetExceeded(f"fiber enumeration needs {total} tuples")
    mul = table.full_mul_table()
    inv = np.fromiter((table.inv_index(i) for i in range(order)), dtype=np.int64, count=order)
    free_rows = decode_tuples(np.arange(total, dtype=np.int64), free, order)
    a_rows = free_rows[:, :arity]
    b_rows = np.empty((total, arity), dtype=np.int64)
    if arity > 1:
        b_rows[:, : arity - 1] = free_rows[:, arity:]
    acc = a_rows[:, 0]
    for i in range(1, arity):
        acc = mul[acc, b_rows[:, i - 1]]
        acc = mul[acc, a_rows[:, i]]
    b_rows[:, arity - 1] = mul[inv[acc], g_idx]
    return a_rows, b_rows


# ---------------------------------------------------------------------------
# rectangle protocols


@dataclass(frozen=True)
class Rectangle:
    a_set: TupleSet
    b_set: TupleSet
    bit: int


@dataclass(frozen=True)
class RectangleProtocol:
    """Deterministic transcript partition: disjoint rectangles with output bits."""

    rectangles: tuple[Rectangle, ...]

    @property
    def bit_budget(self) -> int:
        n = len(self.rectangles)
        return 0 if n <= 1 else math.ceil(math.log2(n))

    def evaluate(self, a_code: int, b_code: int) -> int:
        hits = [r for r in self.rectangles if r.a_set.contains_code(a_code) and r.b_set.contains_code(b_code)]
        if not hits:
            raise UncoveredProbe(f"pair (a={a_code}, b={b_code}) not covered by any rectangle")
        if len(hits) > 1:
            raise OverlappingRectangles(f"pair (a={a_code}, b={b_code}) covered {len(hits)} times")
        return hits[0].bit

    def evaluate_codes(self, a_codes: np.ndarray, b_codes: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; raises on uncovered or doubly covered pairs."""
        bits = np.full(len(a_codes), -1, dtype=np.int64)
        covered = np.zeros(len(a_codes), dtype=np.int64)
        for rect in self.rectangles:
            mask = rect.a_set.contains_codes(a_codes) & rect.b_set.contains_codes(b_codes)
            covered += mask
            bits[mask] = rect.bit
        if (covered > 1).any():
            i = int(np.nonzero(covered > 1)[0][0])
            raise OverlappingRectangles(f"pair (a={int(a_codes[i])}, b={int(b_codes[i])}) multiply covered")
        if (covered == 0).any():
            i = int(np.nonzero(covered == 0)[0][0])
            raise UncoveredProbe(f"pair (a={int(a_codes[i])}, b={int(b_codes[i])}) not covered")
        return bits

    def validate_exact(self, table: GroupTable, budget: int | None = None):
        """Full disjointness/coverage check over G^t x G^t; tiny cases only."""
        t = self.rectangles[0].a_set.arity
        total = table.order**t
        if total * total > config.loop_budget(budget):
            raise LoopBudgetExceeded("exact protocol validation exceeds the loop budget")
        a_codes = np.repeat(np.arange(total, dtype=np.int64), total)
        b_codes = np.tile(np.arange(total, dtype=np.int64), total)
        self.evaluate_codes(a_codes, b_codes)


@dataclass(frozen=True)
class AdvantageReport:
    p_g: float
    p_h: float
    advantage: float
    stderr: float
    bit_budget: int
    samples: int

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "p_g": self.p_g,
            "p_h": self.p_h,
            "advantage": self.advantage,
            "stderr": self.stderr,
            "bit_budget": self.bit_budget,
            "samples": self.samples,
        }


def advantage(
    protocol: RectangleProtocol,
    table: GroupTable,
    g: int | Element,
    h: int | Element,
    samples: int,
    stream: np.random.Generator,
) -> AdvantageReport:
    """Monte Carlo |p_g - p_h| via conditional fiber sampling."""
    arity = protocol.rectangles[0].a_set.arity
    estimates = []
    for target in (g, h):
        a_rows, b_rows = fiber_sample(table, target, arity, stream, draws=samples)
        a_codes = encode_tuples(a_rows, table.order)
        b_codes = encode_tuples(b_rows, table.order)
        bits = protocol.evaluate_codes(a_codes, b_codes)
        estimates.append(float(bits.mean()))
    p_g, p_h = estimates
    se = math.sqrt((p_g * (1 - p_g) + p_h * (1 - p_h)) / samples)
    return AdvantageReport(
        p_g=p_g,
        p_h=p_h,
        advantage=abs(p_g - p_h),
        stderr=se,
        bit_budget=protocol.bit_budget,
        samples=samples,
    )


def exact_conditional_acceptance(
    protocol: RectangleProtocol, table: GroupTable, g: int | Element, budget: int | None = None
) -> Fraction:
    """Exact Pr[P(a,b) = 1 | a . b = g] by full fiber enumeration."""
    arity = protocol.rectangles[0].a_set.arity
    a_rows, b_rows = enumerate_fiber(table, g, arity, budget=budget)
    a_codes = encode_tuples(a_rows, table.order)
    b_codes = encode_tuples(b_rows, table.order)
    bits = protocol.evaluate_codes(a_codes, b_codes)
    return Fraction(int(bits.sum()), len(bits))


def rectangle_bound_check(
    protocol: RectangleProtocol, table: GroupTable, g: int | Element, h: int | Element
) -> tuple[float, float]:
    """Assemble the rectangle-decomposition inequality from exact data.

    Returns (|p_g - p_h| exact, 2^c * 2 * max over rectangles of D * alpha *
    beta * |G|).  The factor 2 is the triangle bound through the uniform
    distribution; the left side can never exceed the right.
    """
    lhs = abs(
        float(
            exact_conditional_acceptance(protocol, table, g)
            - exact_conditional_acceptance(protocol, table, h)
        )
    )
    worst = 0.0
    for rect in protocol.rectangles:
        est = exact_distribution(rect.a_set, rect.b_set, table)
        normalized = est.linf_dev * float(rect.a_set.density) * float(rect.b_set.density) * table.order
        worst = max(worst, normalized)
    rhs = (2.0**protocol.bit_budget) * 2.0 * worst
    return lhs, rhs


# ---------------------------------------------------------------------------
# file formats


def save_tuple_set(path, tset: TupleSet, group_label: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"t={tset.arity} group={group_label}\n")
        for row in tset.rows():
            fh.write(",".join(str(int(x)) for x in row) + "\n")


def load_tuple_set(path, table: GroupTable) -> TupleSet:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        m = _parse_header(header)
        if m["group"] != table.spec.label:
            raise SpecSyntax(f"tuple set was built for {m['group']}, not {table.spec.label}")
        arity = int(m["t"])
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != arity:
                raise SpecSyntax(f"tuple {line!r} does not have arity {arity}")
            rows.append(tuple(int(p) for p in parts))
    return explicit_tuple_set(table, rows, descriptor=f"file:{path}")


def _parse_header(header: str) -> dict:
    fields = {}
    for chunk in header.split():
        if "=" not in chunk:
            raise SpecSyntax(f"bad tuple-set header {header!r}")
        key, _, value = chunk.partition("=")
        fields[key] = value
    if "t" not in fields or "group" not in fields:
        raise SpecSyntax(f"tuple-set header must carry t= and group=: {header!r}")
    return fields


def load_protocol(path, table: GroupTable) -> RectangleProtocol:
    """Protocol file: one rectangle per line, `bit,<afile>,<bfile>` (paths relative to the file)."""
    import os

    base = os.path.dirname(os.path.abspath(path))
    rects = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise SpecSyntax(f"protocol line must be bit,<afile>,<bfile>: {line!r}")
            bit = int(parts[0])
            if bit not in (0, 1):
                raise SpecSyntax(f"protocol output bit must be 0 or 1, got {parts[0]}")
            a_set = load_tuple_set(os.path.join(base, parts[1]), table)
            b_set = load_tuple_set(os.path.join(base, parts[2]), table)
            rects.append(Rectangle(a_set=a_set, b_set=b_set, bit=bit))
    if not rects:
        raise SpecSyntax("protocol file has no rectangles")
    return RectangleProtocol(rectangles=tuple(rects))
