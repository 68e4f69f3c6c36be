"""Explicit finite group engines and conjugacy-class machinery.

Supported engines: permutation groups on up to 12 points (alternating,
symmetric, or generator-defined) and 2x2 matrix groups over GF(q) (SL2, PSL2,
or generator-defined).  Groups are fully enumerated up to a configurable cap;
elements are canonical byte strings so that tables, reports, and golden files
are reproducible byte for byte.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import config
from .errors import CapExceeded, MixedGroups, SpecSyntax, UnsupportedParameters
from .fields import Field, field_for_size

MAX_PERM_DEGREE = 12


# ---------------------------------------------------------------------------
# engines


class PermEngine:
    """Permutations of {0..n-1} stored as image arrays, one byte per point."""

    def __init__(self, n: int):
        self.n = n
        self.identity = bytes(range(n))

    def mul(self, a: bytes, b: bytes) -> bytes:
        # (a*b)(x) = a(b(x)): apply b first
        return bytes(a[x] for x in b)

    def inv(self, a: bytes) -> bytes:
        out = bytearray(self.n)
        for i, x in enumerate(a):
            out[x] = i
        return bytes(out)

    def describe(self) -> str:
        return f"perm({self.n})"


class Mat2Engine:
    """2x2 matrices over GF(q), row-major entries, fixed-width byte encoding.

    With projective=True elements are the cosets {M, -M}: the canonical
    representative is the lift whose first nonzero entry (row-major) has the
    smaller integer encoding.  In characteristic 2 the lifts coincide, which
    is the deterministic tie rule.
    """

    def __init__(self, gf: Field, projective: bool = False):
        self.field = gf
        self.projective = projective
        self.width = 1 if gf.q <= 256 else (2 if gf.q <= 65536 else 3)
        self.identity = self.encode((1, 0, 0, 1))

    def encode(self, entries: tuple[int, int, int, int]) -> bytes:
        raw = b"".join(e.to_bytes(self.width, "big") for e in entries)
        if not self.projective:
            return raw
        return self._canonical_lift(entries)

    def _canonical_lift(self, entries: tuple[int, int, int, int]) -> bytes:
        neg = tuple(self.field.neg(e) for e in entries)
        for a, b in zip(entries, neg):
            if a != b:
                chosen = entries if a < b else neg
                break
        else:
            chosen = entries  # characteristic 2, or the zero matrix
        return b"".join(e.to_bytes(self.width, "big") for e in chosen)

    def decode(self, data: bytes) -> tuple[int, int, int, int]:
        w = self.width
        return tuple(int.from_bytes(data[i * w : (i + 1) * w], "big") for i in range(4))

    def mul(self, a: bytes, b: bytes) -> bytes:
        f = self.field
        a11, a12, a21, a22 = self.decode(a)
        b11, b12, b21, b22 = self.decode(b)
        prod = (
            f.add(f.mul(a11, b11), f.mul(a12, b21)),
            f.add(f.mul(a11, b12), f.mul(a12, b22)),
            f.add(f.mul(a21, b11), f.mul(a22, b21)),
            f.add(f.mul(a21, b12), f.mul(a22, b22)),
        )
        return self.encode(prod)

    def inv(self, a: bytes) -> bytes:
        f = self.field
        a11, a12, a21, a22 = self.decode(a)
        det = f.sub(f.mul(a11, a22), f.mul(a12, a21))
        d = f.inv(det)
        entries = (f.mul(d, a22), f.mul(d, f.neg(a12)), f.mul(d, f.neg(a21)), f.mul(d, a11))
        return self.encode(entries)

    def describe(self) -> str:
        tag = "psl2" if self.projective else "mat2"
        return f"{tag}(q={self.field.q})"


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class GroupSpec:
    """Which group to build and under what enumeration cap."""

    kind: str  # alt | sym | sl2 | psl2 | permgen | matgen
    n: int | None = None
    q: int | None = None
    perm_generators: tuple[tuple[int, ...], ...] | None = None
    mat_generators: tuple[tuple[int, int, int, int], ...] | None = None
    max_order: int | None = None
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.kind == "alt":
            return f"A:{self.n}"
        if self.kind == "sym":
            return f"S:{self.n}"
        if self.kind == "sl2":
            return f"SL2:{self.q}"
        if self.kind == "psl2":
            return f"PSL2:{self.q}"
        return self.kind

    @staticmethod
    def alt(n: int, max_order: int | None = None) -> "GroupSpec":
        _check_degree(n)
        return GroupSpec(kind="alt", n=n, max_order=max_order)

    @staticmethod
    def sym(n: int, max_order: int | None = None) -> "GroupSpec":
        _check_degree(n)
        return GroupSpec(kind="sym", n=n, max_order=max_order)

    @staticmethod
    def sl2(q: int, max_order: int | None = None) -> "GroupSpec":
        _check_field_size(q)
        return GroupSpec(kind="sl2", q=q, max_order=max_order)

    @staticmethod
    def psl2(q: int, max_order: int | None = None) -> "GroupSpec":
        _check_field_size(q)
        return GroupSpec(kind="psl2", q=q, max_order=max_order)

    @staticmethod
    def from_perm_generators(
        gens: list[tuple[int, ...]], max_order: int | None = None, label: str = "permgen"
    ) -> "GroupSpec":
        if not gens:
            raise UnsupportedParameters("at least one permutation generator required")
        degree = len(gens[0])
        if degree > MAX_PERM_DEGREE:
            raise UnsupportedParameters(f"permutation degree {degree} exceeds {MAX_PERM_DEGREE}")
        for g in gens:
            if len(g) != degree or sorted(g) != list(range(degree)):
                raise SpecSyntax(f"not a permutation of 0..{degree - 1}: {g}")
        return GroupSpec(
            kind="permgen",
            n=degree,
            perm_generators=tuple(tuple(g) for g in gens),
            max_order=max_order,
            label=label,
        )

    @staticmethod
    def from_matrix_generators(
        gens: list[tuple[int, int, int, int]],
        q: int,
        projective: bool = False,
        max_order: int | None = None,
        label: str = "matgen",
    ) -> "GroupSpec":
        _check_field_size(q)
        for g in gens:
            if len(g) != 4 or any(not (0 <= e < q) for e in g):
                raise SpecSyntax(f"matrix entries must lie in [0, {q}): {g}")
        kind = "matgen"
        return GroupSpec(
            kind=kind,
            q=q,
            mat_generators=tuple(tuple(g) for g in gens),
            max_order=max_order,
            label=label,
        )

    def predicted_order(self) -> int | None:
        if self.kind == "alt":
            return math.factorial(self.n) // 2
        if self.kind == "sym":
            return math.factorial(self.n)
        if self.kind == "sl2":
            return self.q * (self.q**2 - 1)
        if self.kind == "psl2":
            return self.q * (self.q**2 - 1) // math.gcd(2, self.q - 1)
        return None


def _check_degree(n):
    if not (3 <= n <= MAX_PERM_DEGREE):
        raise UnsupportedParameters(f"degree must be in [3, {MAX_PERM_DEGREE}], got {n}")


def _check_field_size(q):
    if q < 4:
        raise UnsupportedParameters(f"SL2/PSL2 require q >= 4, got {q}")
    field_for_size(q)  # raises UnsupportedParameters unless q is a prime power


# ---------------------------------------------------------------------------
# elements and tables


class Element:
    """Immutable handle (table, index); the canonical bytes live in the table."""

    __slots__ = ("table", "index")

    def __init__(self, table: "GroupTable", index: int):
        if not (0 <= index < table.order):
            raise IndexError(f"element index {index} out of range for order {table.order}")
        self.table = table
        self.index = index

    @property
    def key(self) -> bytes:
        return self.table.elements[self.index]

    def __mul__(self, other: "Element") -> "Element":
        if other.table is not self.table:
            raise MixedGroups("elements belong to different group tables")
        return Element(self.table, self.table.mul_index(self.index, other.index))

    def inverse(self) -> "Element":
        return Element(self.table, self.table.inv_index(self.index))

    def __pow__(self, m: int) -> "Element":
        return Element(self.table, self.table.pow_index(self.index, m))

    def order(self) -> int:
        return self.table.element_order(self.index)

    def __eq__(self, other) -> bool:
        return isinstance(other, Element) and other.table is self.table and other.index == self.index

    def __hash__(self) -> int:
        return hash((id(self.table), self.index))

    def __repr__(self) -> str:
        return f"Element({self.table.spec.label}, {self.index}, {self.key.hex()})"


class GroupTable:
    """Fully enumerated group: canonical elements, index map, generator indices.

    The element list is sorted by canonical bytes except that the identity is
    pinned to index 0.  Immutable after construction and safe to share.
    """

    def __init__(self, spec: GroupSpec, engine, elements: list[bytes], generators: list[bytes], degenerate: bool):
        self.spec = spec
        self.engine = engine
        self.elements = elements
        self.order = len(elements)
        self.index = {e: i for i, e in enumerate(elements)}
        self.generator_indices = tuple(self.index[g] for g in generators)
        self.identity_index = 0
        self.degenerate = degenerate
        self._inv_idx: np.ndarray | None = None
        self._mul_table: np.ndarray | None = None
        self._rows: np.ndarray | None = None
        self._codes: tuple[np.ndarray, np.ndarray] | None = None

    # -- element-level ops ---------------------------------------------------

    def element(self, i: int) -> Element:
        return Element(self, i)

    def identity(self) -> Element:
        return Element(self, 0)

    def index_of(self, key: bytes) -> int:
        try:
            return self.index[key]
        except KeyError:
            raise MixedGroups(f"element {key.hex()} does not belong to group {self.spec.label}") from None

    def mul_index(self, i: int, j: int) -> int:
        if self._mul_table is not None:
            return int(self._mul_table[i, j])
        return self.index_of(self.engine.mul(self.elements[i], self.elements[j]))

    def inv_index(self, i: int) -> int:
        if self._inv_idx is None:
            self._build_inverses()
        return int(self._inv_idx[i])

    def pow_index(self, i: int, m: int) -> int:
        if m < 0:
            return self.pow_index(self.inv_index(i), -m)
        acc, cur = 0, i
        while m:
            if m & 1:
                acc = self.mul_index(acc, cur)
            cur = self.mul_index(cur, cur)
            m >>= 1
        return acc

    def element_order(self, i: int) -> int:
        m, cur = 1, i
        while cur != 0:
            cur = self.mul_index(cur, i)
            m += 1
        return m

    def conjugate_index(self, h: int, g: int) -> int:
        """Index of h g h^-1."""
        return self.mul_index(self.mul_index(h, g), self.inv_index(h))

    # -- bulk helpers ----------------------------------------------------------

    def _build_inverses(self) -> None:
        if isinstance(self.engine, PermEngine) and self.order > 1:
            rows = self._perm_rows()
            inv_rows = np.argsort(rows, axis=1).astype(np.uint8)
            self._inv_idx = self._perm_lookup(inv_rows)
        else:
            self._inv_idx = np.fromiter(
                (self.index_of(self.engine.inv(e)) for e in self.elements), dtype=np.int64, count=self.order
            )

    def _perm_rows(self) -> np.ndarray:
        if self._rows is None:
            self._rows = np.frombuffer(b"".join(self.elements), dtype=np.uint8).reshape(self.order, self.engine.n)
        return self._rows

    def _perm_codes(self) -> tuple[np.ndarray, np.ndarray]:
        if self._codes is None:
            n = self.engine.n
            weights = (n ** np.arange(n)).astype(np.int64)
            codes = self._perm_rows().astype(np.int64) @ weights
            order_perm = np.argsort(codes, kind="stable")
            self._codes = (codes[order_perm], order_perm)
        return self._codes

    def _perm_lookup(self, rows: np.ndarray) -> np.ndarray:
        """Map a (m, n) array of image rows to element indices."""
        n = self.engine.n
        weights = (n ** np.arange(n)).astype(np.int64)
        q = rows.astype(np.int64) @ weights
        sorted_codes, order_perm = self._perm_codes()
        pos = np.searchsorted(sorted_codes, q)
        return order_perm[pos].astype(np.int64)

    def right_mul_indices(self, g: int) -> np.ndarray:
        """Array r with r[h] = index(h * g) for every element h."""
        if isinstance(self.engine, PermEngine) and self.order > 1:
            rows = self._perm_rows()
            g_img = np.frombuffer(self.elements[g], dtype=np.uint8)
            return self._perm_lookup(rows[:, g_img])
        return np.fromiter(
            (self.index_of(self.engine.mul(e, self.elements[g])) for e in self.elements),
            dtype=np.int64,
            count=self.order,
        )

    def conjugation_permutation(self, h: int) -> np.ndarray:
        """Array c with c[g] = index(h g h^-1)."""
        if isinstance(self.engine, PermEngine) and self.order > 1:
            rows = self._perm_rows()
            h_img = np.frombuffer(self.elements[h], dtype=np.uint8)
            hinv_img = np.frombuffer(self.elements[self.inv_index(h)], dtype=np.uint8)
            conj = h_img[rows[:, hinv_img]]
            return self._perm_lookup(conj)
        hinv = self.inv_index(h)
        return np.fromiter(
            (self.index_of(self.engine.mul(self.engine.mul(self.elements[h], e), self.elements[hinv])) for e in self.elements),
            dtype=np.int64,
            count=self.order,
        )

    def full_mul_table(self, limit: int = 4096) -> np.ndarray:
        """Dense index multiplication table; only sensible for small groups."""
        if self.order > limit:
            raise CapExceeded(f"multiplication table of order {self.order} exceeds limit {limit}")
        if self._mul_table is None:
            table = np.empty((self.order, self.order), dtype=np.int32)
            for g in range(self.order):
                table[:, g] = self.right_mul_indices(g)
            self._mul_table = table
        return self._mul_table

    def __repr__(self) -> str:
        return f"GroupTable({self.spec.label}, order={self.order})"


def group_build(spec: GroupSpec) -> GroupTable:
    """Breadth-first closure over the spec's generators.

    Raises CapExceeded when the (predicted or discovered) order exceeds the
    cap.  A generator set producing the trivial group is allowed and flagged.
    """
    cap = config.max_order(spec.max_order)
    predicted = spec.predicted_order()
    if predicted is not None and predicted > cap:
        raise CapExceeded(f"{spec.label} has order {predicted}, above the cap {cap}")

    engine, generators = _make_engine(spec)
    seen = {engine.identity}
    frontier = [engine.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in generators:
                y = engine.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise CapExceeded(f"{spec.label} enumeration passed the cap {cap}")
        frontier = nxt

    rest = sorted(seen - {engine.identity})
    elements = [engine.identity] + rest
    degenerate = len(elements) == 1
    if predicted is not None and len(elements) != predicted:
        raise UnsupportedParameters(
            f"{spec.label}: enumerated order {len(elements)} != predicted {predicted}"
        )
    return GroupTable(spec, engine, elements, list(dict.fromkeys(generators)), degenerate)


def _make_engine(spec: GroupSpec):
    if spec.kind in ("alt", "sym", "permgen"):
        engine = PermEngine(spec.n)
        if spec.kind == "alt":
            gens = _alt_generators(spec.n)
        elif spec.kind == "sym":
            gens = _sym_generators(spec.n)
        else:
            gens = [bytes(g) for g in spec.perm_generators]
        return engine, gens
    if spec.kind in ("sl2", "psl2", "matgen"):
        gf = field_for_size(spec.q)
        projective = spec.kind == "psl2"
        engine = Mat2Engine(gf, projective=projective)
        if spec.kind == "matgen":
            gens = [engine.encode(g) for g in spec.mat_generators]
        else:
            gens = _sl2_generators(engine, gf)
        return engine, gens
    raise UnsupportedParameters(f"unknown group kind {spec.kind!r}")


def _alt_generators(n: int) -> list[bytes]:
    three = _cycle_to_image([(0, 1, 2)], n)
    if n % 2 == 1:
        big = _cycle_to_image([tuple(range(n))], n)
    else:
        big = _cycle_to_image([tuple(range(1, n))], n)
    return [bytes(three), bytes(big)]


def _sym_generators(n: int) -> list[bytes]:
    swap = _cycle_to_image([(0, 1)], n)
    big = _cycle_to_image([tuple(range(n))], n)
    return [bytes(swap), bytes(big)]


def _sl2_generators(engine: Mat2Engine, gf: Field) -> list[bytes]:
    # upper transvections for an additive basis of GF(q), plus the Weyl element
    gens = [engine.encode((1, b, 0, 1)) for b in gf.generator_candidates()]
    gens.append(engine.encode((0, 1, gf.neg(1), 0)))
    return gens


def _cycle_to_image(cycles: list[tuple[int, ...]], n: int) -> list[int]:
    img = list(range(n))
    for cyc in cycles:
        for i, a in enumerate(cyc):
            img[a] = cyc[(i + 1) % len(cyc)]
    return img


# ---------------------------------------------------------------------------
# cycle-notation parsing (generator files)

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int | None = None) -> tuple[int, ...]:
    """Parse 1-based cycle notation like ``(1 2 3)(4 5)`` into a 0-based image tuple.

    Points may be separated by spaces or commas.  ``()`` or ``e`` denotes the
    identity (degree must then be supplied).
    """
    text = text.strip()
    if text in ("()", "e", "id"):
        if degree is None:
            raise SpecSyntax("identity permutation needs an explicit degree")
        return tuple(range(degree))
    chunks = _CYCLE_RE.findall(text)
    if not chunks or _CYCLE_RE.sub("", text).strip():
        raise SpecSyntax(f"cannot parse cycle notation: {text!r}")
    cycles = []
    seen: set[int] = set()
    maxpt = 0
    for chunk in chunks:
        pts = [p for p in re.split(r"[,\s]+", chunk.strip()) if p]
        try:
            cyc = tuple(int(p) - 1 for p in pts)
        except ValueError as exc:
            raise SpecSyntax(f"bad cycle {chunk!r}") from exc
        if any(p < 0 for p in cyc):
            raise SpecSyntax(f"points are 1-based: {chunk!r}")
        if len(set(cyc)) != len(cyc) or seen & set(cyc):
            raise SpecSyntax(f"repeated point in {text!r}")
        seen |= set(cyc)
        maxpt = max(maxpt, max(cyc, default=-1) + 1)
        if len(cyc) > 1:
            cycles.append(cyc)
    n = degree if degree is not None else maxpt
    if maxpt > n:
        raise SpecSyntax(f"point {maxpt} exceeds declared degree {n}")
    return tuple(_cycle_to_image(cycles, n))


def image_to_cycles(img: tuple[int, ...] | bytes) -> str:
    """Inverse of parse_cycles, for reports."""
    img = tuple(img)
    n = len(img)
    seen = [False] * n
    out = []
    for start in range(n):
        if seen[start] or img[start] == start:
            seen[start] = True
            continue
        cyc = [start]
        seen[start] = True
        x = img[start]
        while x != start:
            cyc.append(x)
            seen[x] = True
            x = img[x]
        out.append("(" + " ".join(str(p + 1) for p in cyc) + ")")
    return "".join(out) if out else "()"


# ---------------------------------------------------------------------------
# conjugacy classes


@dataclass(frozen=True, eq=False)
class ClassData:
    """Conjugacy classes: representatives, sizes, maps, and power maps."""

    reps: tuple[int, ...]
    sizes: tuple[int, ...]
    class_of: np.ndarray  # element index -> class index
    inverse_class: tuple[int, ...]
    orders: tuple[int, ...]  # order of each class representative
    exponent: int
    power_map: np.ndarray  # (exponent + 1, k); row m = class of rep^m
    _members: dict = dc_field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return len(self.reps)

    @property
    def order(self) -> int:
        return int(sum(self.sizes))

    def centralizer_orders(self) -> tuple[int, ...]:
        n = self.order
        return tuple(n // s for s in self.sizes)

    def members(self, c: int) -> np.ndarray:
        if c not in self._members:
            self._members[c] = np.nonzero(self.class_of == c)[0]
        return self._members[c]


def conj_classes(table: GroupTable) -> ClassData:
    """Partition the element indices into conjugation orbits.

    Orbits are closed under conjugation by the generators, which act as
    permutations of finite order, so forward closure suffices.  Class
    representatives are the minimal canonical elements, and classes are
    numbered by their representative's index (identity class first).
    """
    n = table.order
    gens = table.generator_indices if table.order > 1 else ()
    conj_perms = [table.conjugation_permutation(h) for h in gens]

    class_of = np.full(n, -1, dtype=np.int64)
    reps: list[int] = []
    sizes: list[int] = []
    for start in range(n):
        if class_of[start] >= 0:
            continue
        cidx = len(reps)
        stack = [start]
        class_of[start] = cidx
        count = 0
        while stack:
            g = stack.pop()
            count += 1
            for perm in conj_perms:
                h = int(perm[g])
                if class_of[h] < 0:
                    class_of[h] = cidx
                    stack.append(h)
        reps.append(start)
        sizes.append(count)

    k = len(reps)
    orders = tuple(table.element_order(r) for r in reps)
    exponent = math.lcm(*orders) if orders else 1
    power_map = np.empty((exponent + 1, k), dtype=np.int64)
    power_map[0, :] = class_of[0]
    for j, r in enumerate(reps):
        cur = 0
        for m in range(1, exponent + 1):
            cur = table.mul_index(cur, r)
            power_map[m, j] = class_of[cur]
    inverse_class = tuple(int(class_of[table.inv_index(r)]) for r in reps)
    return ClassData(
        reps=tuple(reps),
        sizes=tuple(sizes),
        class_of=class_of,
        inverse_class=inverse_class,
        orders=orders,
        exponent=exponent,
        power_map=power_map,
    )


def random_element(table: GroupTable, stream: np.random.Generator) -> Element:
    """Uniform draw from the element list; reproducible given the stream state."""
    return Element(table, int(stream.integers(0, table.order)))
